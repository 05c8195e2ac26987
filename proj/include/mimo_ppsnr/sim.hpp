#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "mimo_ppsnr/channel.hpp"
#include "mimo_ppsnr/cxmat.hpp"
#include "mimo_ppsnr/modem.hpp"
#include "mimo_ppsnr/rng.hpp"

namespace mimo {

/// How the receiver obtains its channel estimate for each packet.
enum class CeMode {
  kPerfectCsi,  ///< h_hat = h
  kMlTraining,  ///< least-squares estimate from an orthogonal training block
  kFixedSigma,  ///< h_hat = h + dH with dH ~ CN(0, sigma_e^2), SNR independent
};

std::string_view to_string(CeMode m) noexcept;
/// Accepts "perfect", "ml", "fixed". Throws std::invalid_argument.
CeMode parse_ce_mode(std::string_view name);

/// One link configuration swept over an Eb/N0 grid.
///
/// Energies: every transmit antenna sends symbols of energy es, and the
/// per-antenna Es/N0 is Eb/N0 * log2(M).
struct LinkConfig {
  std::size_t n_t = 2;
  std::size_t n_r = 4;
  std::size_t n_tr = 4;
  Modulation modulation = Modulation::kBpsk;
  std::vector<double> snr_grid_db;  ///< Eb/N0 per transmit antenna
  CeMode ce_mode = CeMode::kMlTraining;
  double sigma_e = 0.0;  ///< error standard deviation for kFixedSigma
  std::size_t n_channels = 200;
  std::size_t n_packets = 50;
  std::size_t n_symbols = 500;
  std::uint64_t seed = 1;
  /// Stop a grid point at the first packet, in channel-major order, at which
  /// this many bit errors have been counted. Zero disables early stopping.
  std::uint64_t max_bit_errors = 10000;
  CeVarianceScaling ce_variance_scaling = CeVarianceScaling::kPerAntenna;
  double es = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  double esn0_db(double ebn0_db) const;
  double n0_for(double ebn0_db) const;
  /// Estimation error variance the analysis assumes at this grid point.
  double analytic_sigma_e2(double ebn0_db) const;
};

/// Linear receive filter built from a channel estimate (n_t x n_r).
using EqualizerFn = std::function<CMat(const CMat& h_hat, double es, double n0)>;

/// Exact MMSE filter (H^H H + N0/Es I)^{-1} H^H of the estimate.
CMat mmse_equalizer(const CMat& h_hat, double es, double n0);

/// Channel estimate for one packet, drawn according to cfg.ce_mode.
CMat estimate_channel(const CMat& h, const LinkConfig& cfg, double n0, RngStream& rng);

struct PacketResult {
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  std::vector<std::uint64_t> stream_errors;
};

/// Sends one packet of cfg.n_symbols symbol vectors through y = Hx + n after
/// estimating the channel per cfg.ce_mode, detects with the filter built
/// from the estimate and counts bit errors. Estimation and data draws use
/// separate children of rng.
PacketResult run_packet(const CMat& h, const LinkConfig& cfg, double ebn0_db, RngStream& rng,
                        const EqualizerFn& equalizer = mmse_equalizer);

struct ChannelAnalytics {
  double ber = 0.0;                  ///< stream average
  std::vector<double> ber_streams;
  std::vector<double> gamma_est;     ///< linear
  double sigma_e2 = 0.0;
};

ChannelAnalytics analyze_channel(const CMat& h, const LinkConfig& cfg, double ebn0_db);

/// Stream-averaged BER predicted by plugging each stream's closed-form SINR
/// into the AWGN formula.
double analytic_ber_for_channel(const CMat& h, const LinkConfig& cfg, double ebn0_db);

struct BerCurvePoint {
  double ebn0_db = 0.0;
  double esn0_db = 0.0;
  double sigma_e2 = 0.0;  ///< value used by the analysis
  double ber_sim = 0.0;
  double ber_analytic = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits_total = 0;
  double ci95_halfwidth = 0.0;
  std::vector<double> mean_ppsnr_db;
  std::vector<double> ber_sim_streams;
  std::size_t channels_used = 0;  ///< the last one may be partial
  std::size_t packets_used = 0;
  bool stopped_early = false;
};

struct RunOptions {
  /// Worker threads; 0 picks hardware concurrency. Either way the
  /// MIMO_PPSNR_THREADS environment variable caps the count.
  unsigned threads = 0;
};

unsigned resolve_thread_count(unsigned requested);

/// BER sweep over cfg.snr_grid_db. Channel realizations are shared across
/// grid points; results do not depend on the worker count.
std::vector<BerCurvePoint> run_curve(const LinkConfig& cfg, const RunOptions& options = {},
                                     const EqualizerFn& equalizer = mmse_equalizer);

/// The channel used for index `channel` of a sweep with this seed.
CMat sweep_channel(const LinkConfig& cfg, std::size_t channel);

struct SinrEstimate {
  std::vector<double> sinr;       ///< measured, linear
  std::vector<double> predicted;  ///< closed form, linear
  std::size_t trials = 0;
  double sigma_e2 = 0.0;
};

/// Measures the per-stream SINR of the receiver built from fresh channel
/// estimates: signal Es |(WH)_kk|^2 with the true-channel W, and the power of
/// x~_k - (WH)_kk x_k over fresh estimates, symbols and noise.
/// Requires n_trials >= 1000.
SinrEstimate empirical_sinr(const CMat& h, const LinkConfig& cfg, double ebn0_db,
                            std::size_t n_trials, RngStream& rng);

}  // namespace mimo
