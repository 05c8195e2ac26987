#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mimo_ppsnr/cxmat.hpp"

namespace mimo {

enum class Modulation { kBpsk, kQpsk, kQam16 };

std::string_view to_string(Modulation m) noexcept;
/// Accepts "bpsk", "qpsk", "qam16" (also "16qam"). Throws std::invalid_argument.
Modulation parse_modulation(std::string_view name);
unsigned bits_per_symbol(Modulation m) noexcept;

/// One bit per element, each 0 or 1.
using BitBlock = std::vector<std::uint8_t>;

/// Gray-labelled constellation scaled to average symbol energy es.
///
/// Point i carries label i, whose bits are read most significant first. QPSK
/// and 16QAM are separable: the leading half of the label selects the
/// in-phase level, the trailing half the quadrature level. Per axis the first
/// bit is the sign (0 -> positive) and, for 16QAM, the second bit selects the
/// outer level, so the axis reads -3,-1,+1,+3 <-> 11,10,00,01.
class Constellation {
 public:
  explicit Constellation(Modulation m, double es = 1.0);

  Modulation modulation() const noexcept { return modulation_; }
  unsigned bits_per_symbol() const noexcept { return bits_; }
  double es() const noexcept { return es_; }
  std::span<const Cx> points() const noexcept { return points_; }

  Cx map(unsigned label) const noexcept { return points_[label]; }

  /// Nearest point by Euclidean distance; ties go to the lower label.
  unsigned slice(Cx symbol) const noexcept;

 private:
  unsigned slice_axis(double value) const noexcept;

  Modulation modulation_;
  unsigned bits_;
  double es_;
  double axis_scale_;
  std::vector<Cx> points_;
};

/// Gaussian tail probability P(N(0,1) > x).
double q_function(double x) noexcept;

/// Per-bit error probability on an AWGN channel at symbol SNR gamma (linear).
///   BPSK  : Q(sqrt(2 gamma))
///   QPSK  : Q(sqrt(gamma))
///   16QAM : 3/4 Q(sqrt(gamma/5)) + 1/2 Q(3 sqrt(gamma/5)) - 1/4 Q(5 sqrt(gamma/5))
/// Throws std::invalid_argument for negative or NaN gamma.
double ber_awgn(Modulation m, double gamma);

/// Throws std::invalid_argument if bits.size() is not a multiple of the
/// bits per symbol or an element is not 0/1.
std::vector<Cx> modulate(std::span<const std::uint8_t> bits, const Constellation& c);

BitBlock demodulate(std::span<const Cx> symbols, const Constellation& c);

}  // namespace mimo
