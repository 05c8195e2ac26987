#include "mimo_ppsnr/sim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "mimo_ppsnr/mmse.hpp"

namespace mimo {
namespace {

void fail(const std::string& msg) { throw std::invalid_argument("LinkConfig: " + msg); }

struct ChannelResult {
  std::vector<PacketResult> packets;
  double ber_analytic = 0.0;
  std::vector<double> gamma_db;
};

ChannelResult run_channel(const LinkConfig& cfg, std::size_t channel, double ebn0_db,
                          const EqualizerFn& equalizer) {
  const CMat h = sweep_channel(cfg, channel);
  ChannelResult out;
  out.packets.reserve(cfg.n_packets);
  const std::uint64_t lane = std::bit_cast<std::uint64_t>(ebn0_db);
  for (std::size_t p = 0; p < cfg.n_packets; ++p) {
    RngStream rng(cfg.seed, {channel, p}, DrawPurpose::kPacket, lane);
    out.packets.push_back(run_packet(h, cfg, ebn0_db, rng, equalizer));
  }
  const ChannelAnalytics an = analyze_channel(h, cfg, ebn0_db);
  out.ber_analytic = an.ber;
  out.gamma_db.reserve(an.gamma_est.size());
  for (double g : an.gamma_est) out.gamma_db.push_back(to_db(g));
  return out;
}

// Runs channels [0, n_channels) over `threads` workers and returns the
// shortest channel-major prefix of packets whose error count reaches
// cfg.max_bit_errors (or everything). The last channel may be cut short.
// The prefix is a function of the per-packet results only.
std::vector<ChannelResult> run_point(const LinkConfig& cfg, double ebn0_db, unsigned threads,
                                     const EqualizerFn& equalizer) {
  const std::size_t n = cfg.n_channels;
  std::vector<std::optional<ChannelResult>> results(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> limit{n};
  std::mutex mu;
  std::size_t prefix = 0;
  std::uint64_t prefix_errors = 0;
  bool limit_found = false;

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= limit.load()) return;
      ChannelResult r = run_channel(cfg, c, ebn0_db, equalizer);
      std::lock_guard<std::mutex> lock(mu);
      results[c] = std::move(r);
      while (!limit_found && prefix < n && results[prefix]) {
        std::vector<PacketResult>& packets = results[prefix]->packets;
        for (std::size_t p = 0; p < packets.size(); ++p) {
          prefix_errors += packets[p].bit_errors;
          if (cfg.max_bit_errors > 0 && prefix_errors >= cfg.max_bit_errors) {
            packets.resize(p + 1);
            limit_found = true;
            break;
          }
        }
        ++prefix;
        if (limit_found) limit.store(prefix);
      }
    }
  };

  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<ChannelResult> used;
  used.reserve(limit.load());
  for (std::size_t c = 0; c < limit.load(); ++c) used.push_back(std::move(*results[c]));
  return used;
}

}  // namespace

std::string_view to_string(CeMode m) noexcept {
  switch (m) {
    case CeMode::kPerfectCsi:
      return "perfect";
    case CeMode::kMlTraining:
      return "ml";
    case CeMode::kFixedSigma:
      return "fixed";
  }
  return "unknown";
}

CeMode parse_ce_mode(std::string_view name) {
  if (name == "perfect") return CeMode::kPerfectCsi;
  if (name == "ml") return CeMode::kMlTraining;
  if (name == "fixed") return CeMode::kFixedSigma;
  throw std::invalid_argument("unknown channel estimation mode '" + std::string(name) +
                              "' (expected perfect, ml or fixed)");
}

void LinkConfig::validate() const {
  if (n_t < 1) fail("n_t must be >= 1");
  if (n_r < 1) fail("n_r must be >= 1");
  if (ce_mode == CeMode::kMlTraining) {
    if (n_t > 4) fail("ML training supports at most 4 transmit antennas, got n_t=" + std::to_string(n_t));
    if (n_tr > 4) fail("n_tr must be <= 4, got " + std::to_string(n_tr));
    if (n_tr < n_t) {
      fail("n_tr (" + std::to_string(n_tr) + ") must be >= n_t (" + std::to_string(n_t) + ")");
    }
  }
  if (ce_mode == CeMode::kFixedSigma && (!(sigma_e >= 0.0) || !std::isfinite(sigma_e))) {
    fail("sigma_e must be finite and >= 0");
  }
  if (snr_grid_db.empty()) fail("snr grid is empty");
  for (double s : snr_grid_db) {
    if (!std::isfinite(s)) fail("snr grid contains a non-finite value");
  }
  if (n_channels < 1) fail("channels must be >= 1");
  if (n_packets < 1) fail("packets must be >= 1");
  if (n_symbols < 1) fail("symbols must be >= 1");
  if (!(es > 0.0) || !std::isfinite(es)) fail("es must be positive");
}

double LinkConfig::esn0_db(double ebn0_db) const {
  return ebn0_db + to_db(static_cast<double>(bits_per_symbol(modulation)));
}

double LinkConfig::n0_for(double ebn0_db) const { return es / from_db(esn0_db(ebn0_db)); }

double LinkConfig::analytic_sigma_e2(double ebn0_db) const {
  switch (ce_mode) {
    case CeMode::kPerfectCsi:
      return 0.0;
    case CeMode::kFixedSigma:
      return sigma_e * sigma_e;
    case CeMode::kMlTraining:
      return ce_noise_variance(n_tr, es, n0_for(ebn0_db), ce_variance_scaling, n_t);
  }
  return 0.0;
}

CMat mmse_equalizer(const CMat& h_hat, double es, double n0) {
  return mmse_detector(h_hat, es, n0).w;
}

CMat estimate_channel(const CMat& h, const LinkConfig& cfg, double n0, RngStream& rng) {
  switch (cfg.ce_mode) {
    case CeMode::kPerfectCsi:
      return h;
    case CeMode::kFixedSigma:
      return h + draw_estimation_error(h.rows(), h.cols(), cfg.sigma_e * cfg.sigma_e, rng);
    case CeMode::kMlTraining: {
      const TrainingMatrix training = build_training(cfg.n_t, cfg.n_tr, cfg.es);
      return ml_estimate(simulate_training_rx(h, training, n0, rng), training);
    }
  }
  return h;
}

PacketResult run_packet(const CMat& h, const LinkConfig& cfg, double ebn0_db, RngStream& rng,
                        const EqualizerFn& equalizer) {
  const std::size_t n_r = h.rows();
  const std::size_t n_t = h.cols();
  if (n_r != cfg.n_r || n_t != cfg.n_t) {
    throw std::invalid_argument("run_packet: channel shape does not match LinkConfig");
  }
  const double n0 = cfg.n0_for(ebn0_db);
  const Constellation constellation(cfg.modulation, cfg.es);
  const unsigned bps = constellation.bits_per_symbol();
  const std::uint64_t label_mask = (std::uint64_t{1} << bps) - 1;

  RngStream ce_rng = rng.fork(DrawPurpose::kTrainingNoise);
  RngStream data_rng = rng.fork(DrawPurpose::kData);

  const CMat h_hat = estimate_channel(h, cfg, n0, ce_rng);
  const CMat g = equalizer(h_hat, cfg.es, n0);
  if (g.rows() != n_t || g.cols() != n_r) {
    throw std::invalid_argument("run_packet: equalizer returned the wrong shape");
  }

  // Per-stream amplitude the receiver believes it sees; dividing by it
  // re-centres the QAM decision regions (MMSE output is biased low).
  const CMat gh = g * h_hat;
  std::vector<double> inv_gain(n_t);
  for (std::size_t k = 0; k < n_t; ++k) {
    const double gain = gh(k, k).real();
    inv_gain[k] = gain > 0.0 ? 1.0 / gain : 1.0;
  }

  PacketResult result;
  result.stream_errors.assign(n_t, 0);
  std::vector<unsigned> labels(n_t);
  std::vector<Cx> x(n_t);
  std::vector<Cx> y(n_r);

  for (std::size_t s = 0; s < cfg.n_symbols; ++s) {
    for (std::size_t t = 0; t < n_t; ++t) {
      labels[t] = static_cast<unsigned>(data_rng.next_u64() & label_mask);
      x[t] = constellation.map(labels[t]);
    }
    for (std::size_t r = 0; r < n_r; ++r) {
      Cx acc = data_rng.complex_gaussian(n0);
      for (std::size_t t = 0; t < n_t; ++t) acc += h(r, t) * x[t];
      y[r] = acc;
    }
    for (std::size_t t = 0; t < n_t; ++t) {
      Cx est = 0.0;
      for (std::size_t r = 0; r < n_r; ++r) est += g(t, r) * y[r];
      const unsigned decided = constellation.slice(est * inv_gain[t]);
      result.stream_errors[t] += static_cast<std::uint64_t>(std::popcount(decided ^ labels[t]));
    }
  }
  for (std::uint64_t e : result.stream_errors) result.bit_errors += e;
  result.bits = static_cast<std::uint64_t>(cfg.n_symbols) * n_t * bps;
  return result;
}

ChannelAnalytics analyze_channel(const CMat& h, const LinkConfig& cfg, double ebn0_db) {
  ChannelAnalytics out;
  out.sigma_e2 = cfg.analytic_sigma_e2(ebn0_db);
  const PpsnrReport report = ppsnr_estimated(h, cfg.es, cfg.n0_for(ebn0_db), out.sigma_e2);
  out.gamma_est = report.gamma_est;
  out.ber_streams.reserve(out.gamma_est.size());
  for (double g : out.gamma_est) {
    out.ber_streams.push_back(ber_awgn(cfg.modulation, g));
    out.ber += out.ber_streams.back();
  }
  out.ber /= static_cast<double>(out.ber_streams.size());
  return out;
}

double analytic_ber_for_channel(const CMat& h, const LinkConfig& cfg, double ebn0_db) {
  return analyze_channel(h, cfg, ebn0_db).ber;
}

unsigned resolve_thread_count(unsigned requested) {
  unsigned count = requested > 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MIMO_PPSNR_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) {
      count = std::min(count, static_cast<unsigned>(cap));
    }
  }
  return count;
}

CMat sweep_channel(const LinkConfig& cfg, std::size_t channel) {
  RngStream rng(cfg.seed, {channel, 0}, DrawPurpose::kChannel);
  return draw_rayleigh(cfg.n_r, cfg.n_t, rng);
}

std::vector<BerCurvePoint> run_curve(const LinkConfig& cfg, const RunOptions& options,
                                     const EqualizerFn& equalizer) {
  cfg.validate();
  const unsigned threads = resolve_thread_count(options.threads);
  std::vector<BerCurvePoint> curve;
  curve.reserve(cfg.snr_grid_db.size());

  for (double ebn0_db : cfg.snr_grid_db) {
    const std::vector<ChannelResult> channels = run_point(cfg, ebn0_db, threads, equalizer);

    BerCurvePoint pt;
    pt.ebn0_db = ebn0_db;
    pt.esn0_db = cfg.esn0_db(ebn0_db);
    pt.sigma_e2 = cfg.analytic_sigma_e2(ebn0_db);
    pt.channels_used = channels.size();
    pt.mean_ppsnr_db.assign(cfg.n_t, 0.0);
    std::vector<std::uint64_t> stream_errors(cfg.n_t, 0);
    std::uint64_t stream_bits = 0;
    // Analytic values are weighted by the packets each channel contributed,
    // matching the pooled simulated count.
    double analytic_sum = 0.0;
    for (const ChannelResult& c : channels) {
      const double weight = static_cast<double>(c.packets.size());
      pt.packets_used += c.packets.size();
      for (const PacketResult& pr : c.packets) {
        pt.bit_errors += pr.bit_errors;
        pt.bits_total += pr.bits;
        stream_bits += pr.bits / cfg.n_t;
        for (std::size_t k = 0; k < cfg.n_t; ++k) stream_errors[k] += pr.stream_errors[k];
      }
      analytic_sum += weight * c.ber_analytic;
      for (std::size_t k = 0; k < cfg.n_t; ++k) pt.mean_ppsnr_db[k] += weight * c.gamma_db[k];
    }
    pt.stopped_early = pt.packets_used < cfg.n_channels * cfg.n_packets;
    const double n_used = static_cast<double>(pt.packets_used);
    for (double& v : pt.mean_ppsnr_db) v /= n_used;
    pt.ber_analytic = analytic_sum / n_used;
    pt.ber_sim = static_cast<double>(pt.bit_errors) / static_cast<double>(pt.bits_total);
    pt.ci95_halfwidth =
        1.96 * std::sqrt(pt.ber_sim * (1.0 - pt.ber_sim) / static_cast<double>(pt.bits_total));
    for (std::size_t k = 0; k < cfg.n_t; ++k) {
      pt.ber_sim_streams.push_back(static_cast<double>(stream_errors[k]) /
                                   static_cast<double>(stream_bits));
    }
    curve.push_back(std::move(pt));
  }
  return curve;
}

SinrEstimate empirical_sinr(const CMat& h, const LinkConfig& cfg, double ebn0_db,
                            std::size_t n_trials, RngStream& rng) {
  if (n_trials < 1000) {
    throw std::invalid_argument("empirical_sinr: n_trials must be >= 1000");
  }
  const std::size_t n_r = h.rows();
  const std::size_t n_t = h.cols();
  const double n0 = cfg.n0_for(ebn0_db);
  const Constellation constellation(cfg.modulation, cfg.es);
  const std::uint64_t label_mask = (std::uint64_t{1} << constellation.bits_per_symbol()) - 1;

  const Detector ideal = mmse_detector(h, cfg.es, n0);
  const CMat wh = ideal.w * h;

  SinrEstimate est;
  est.trials = n_trials;
  est.sigma_e2 = cfg.analytic_sigma_e2(ebn0_db);
  est.predicted = ppsnr_estimated(h, cfg.es, n0, est.sigma_e2).gamma_est;

  std::vector<double> error_power(n_t, 0.0);
  std::vector<Cx> x(n_t);
  std::vector<Cx> y(n_r);
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    RngStream ce_rng = rng.fork(DrawPurpose::kTrainingNoise, trial);
    RngStream data_rng = rng.fork(DrawPurpose::kData, trial);
    const CMat w_hat = mmse_equalizer(estimate_channel(h, cfg, n0, ce_rng), cfg.es, n0);
    for (std::size_t t = 0; t < n_t; ++t) {
      x[t] = constellation.map(static_cast<unsigned>(data_rng.next_u64() & label_mask));
    }
    for (std::size_t r = 0; r < n_r; ++r) {
      Cx acc = data_rng.complex_gaussian(n0);
      for (std::size_t t = 0; t < n_t; ++t) acc += h(r, t) * x[t];
      y[r] = acc;
    }
    for (std::size_t k = 0; k < n_t; ++k) {
      Cx out = 0.0;
      for (std::size_t r = 0; r < n_r; ++r) out += w_hat(k, r) * y[r];
      error_power[k] += std::norm(out - wh(k, k) * x[k]);
    }
  }
  est.sinr.reserve(n_t);
  for (std::size_t k = 0; k < n_t; ++k) {
    const double signal = cfg.es * std::norm(wh(k, k));
    est.sinr.push_back(signal / (error_power[k] / static_cast<double>(n_trials)));
  }
  return est;
}

}  // namespace mimo
