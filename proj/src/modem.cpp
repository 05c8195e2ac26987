#include "mimo_ppsnr/modem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mimo {
namespace {

// Level of one 16QAM axis for a 2-bit gray label (sign, outer).
double qam16_level(unsigned axis_label) noexcept {
  const double sign = (axis_label & 0b10U) ? -1.0 : 1.0;
  const double magnitude = (axis_label & 0b01U) ? 3.0 : 1.0;
  return sign * magnitude;
}

}  // namespace

std::string_view to_string(Modulation m) noexcept {
  switch (m) {
    case Modulation::kBpsk:
      return "bpsk";
    case Modulation::kQpsk:
      return "qpsk";
    case Modulation::kQam16:
      return "qam16";
  }
  return "unknown";
}

Modulation parse_modulation(std::string_view name) {
  if (name == "bpsk") return Modulation::kBpsk;
  if (name == "qpsk") return Modulation::kQpsk;
  if (name == "qam16" || name == "16qam") return Modulation::kQam16;
  throw std::invalid_argument("unknown modulation '" + std::string(name) +
                              "' (expected bpsk, qpsk or qam16)");
}

unsigned bits_per_symbol(Modulation m) noexcept {
  switch (m) {
    case Modulation::kBpsk:
      return 1;
    case Modulation::kQpsk:
      return 2;
    case Modulation::kQam16:
      return 4;
  }
  return 0;
}

Constellation::Constellation(Modulation m, double es)
    : modulation_(m), bits_(mimo::bits_per_symbol(m)), es_(es) {
  if (!(es > 0.0) || !std::isfinite(es)) {
    throw std::invalid_argument("Constellation: es must be positive");
  }
  const std::size_t count = std::size_t{1} << bits_;
  points_.resize(count);
  switch (m) {
    case Modulation::kBpsk:
      axis_scale_ = std::sqrt(es);
      points_[0] = {axis_scale_, 0.0};
      points_[1] = {-axis_scale_, 0.0};
      break;
    case Modulation::kQpsk:
      axis_scale_ = std::sqrt(es / 2.0);
      for (unsigned label = 0; label < count; ++label) {
        const double re = (label & 0b10U) ? -1.0 : 1.0;
        const double im = (label & 0b01U) ? -1.0 : 1.0;
        points_[label] = {axis_scale_ * re, axis_scale_ * im};
      }
      break;
    case Modulation::kQam16:
      axis_scale_ = std::sqrt(es / 10.0);
      for (unsigned label = 0; label < count; ++label) {
        points_[label] = {axis_scale_ * qam16_level(label >> 2), axis_scale_ * qam16_level(label & 0b11U)};
      }
      break;
  }
}

unsigned Constellation::slice_axis(double value) const noexcept {
  const double v = value / axis_scale_;
  if (modulation_ != Modulation::kQam16) return v < 0.0 ? 1U : 0U;
  const unsigned sign = v < 0.0 ? 1U : 0U;
  const unsigned outer = std::abs(v) > 2.0 ? 1U : 0U;
  return (sign << 1) | outer;
}

unsigned Constellation::slice(Cx symbol) const noexcept {
  switch (modulation_) {
    case Modulation::kBpsk:
      return slice_axis(symbol.real());
    case Modulation::kQpsk:
      return (slice_axis(symbol.real()) << 1) | slice_axis(symbol.imag());
    case Modulation::kQam16:
      return (slice_axis(symbol.real()) << 2) | slice_axis(symbol.imag());
  }
  return 0;
}

double q_function(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double ber_awgn(Modulation m, double gamma) {
  if (!(gamma >= 0.0)) {
    throw std::invalid_argument("ber_awgn: gamma must be >= 0");
  }
  switch (m) {
    case Modulation::kBpsk:
      return q_function(std::sqrt(2.0 * gamma));
    case Modulation::kQpsk:
      return q_function(std::sqrt(gamma));
    case Modulation::kQam16: {
      const double x = std::sqrt(gamma / 5.0);
      return 0.75 * q_function(x) + 0.5 * q_function(3.0 * x) - 0.25 * q_function(5.0 * x);
    }
  }
  return 0.5;
}

std::vector<Cx> modulate(std::span<const std::uint8_t> bits, const Constellation& c) {
  const unsigned bps = c.bits_per_symbol();
  if (bits.size() % bps != 0) {
    throw std::invalid_argument("modulate: bit count " + std::to_string(bits.size()) +
                                " is not a multiple of " + std::to_string(bps));
  }
  std::vector<Cx> symbols;
  symbols.reserve(bits.size() / bps);
  for (std::size_t i = 0; i < bits.size(); i += bps) {
    unsigned label = 0;
    for (unsigned b = 0; b < bps; ++b) {
      if (bits[i + b] > 1) throw std::invalid_argument("modulate: bits must be 0 or 1");
      label = (label << 1) | bits[i + b];
    }
    symbols.push_back(c.map(label));
  }
  return symbols;
}

BitBlock demodulate(std::span<const Cx> symbols, const Constellation& c) {
  const unsigned bps = c.bits_per_symbol();
  BitBlock bits;
  bits.reserve(symbols.size() * bps);
  for (const Cx& s : symbols) {
    const unsigned label = c.slice(s);
    for (unsigned b = bps; b-- > 0;) bits.push_back(static_cast<std::uint8_t>((label >> b) & 1U));
  }
  return bits;
}

}  // namespace mimo
