#include "mimo_ppsnr/selfcheck.hpp"

#include <cmath>
#include <cstdio>

#include "mimo_ppsnr/channel.hpp"
#include "mimo_ppsnr/mmse.hpp"
#include "mimo_ppsnr/modem.hpp"
#include "mimo_ppsnr/sim.hpp"

namespace mimo {
namespace {

std::string fmt(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

double rel_frob(const CMat& got, const CMat& want) { return frob_norm(got - want) / frob_norm(want); }

CheckResult check_inverse(std::uint64_t seed) {
  RngStream rng(seed, {0, 0}, DrawPurpose::kUser, 1);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const CMat h = draw_rayleigh(4, 4, rng);
    CMat gram = hermitian(h) * h;
    for (std::size_t d = 0; d < 4; ++d) gram(d, d) += 0.01;
    worst = std::max(worst, frob_norm(gram * inv_hpd(gram) - CMat::identity(4)) / 2.0);
  }
  return {"cholesky inverse residual", worst < 1e-9, fmt("max ||A A^-1 - I||_F/sqrt(n) = %.2e (limit %.0e)", worst, 1e-9)};
}

CheckResult check_error_identity(std::uint64_t seed) {
  RngStream rng(seed, {0, 0}, DrawPurpose::kUser, 2);
  const double s2 = 0.01;
  const CMat a = [&] {
    const CMat b = draw_rayleigh(3, 3, rng);
    return b * hermitian(b) + CMat::identity(3);
  }();
  CMat acc = CMat::zeros(2, 2);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const CMat dh = draw_estimation_error(2, 3, s2, rng);
    acc += dh * a * hermitian(dh);
  }
  acc *= 1.0 / draws;
  const double err = rel_frob(acc, CMat::identity(2) * Cx{s2 * trace(a).real()});
  return {"E[dH A dH^H] = s2 tr(A) I", err < 0.05, fmt("relative error %.3f (limit %.2f)", err, 0.05)};
}

CheckResult check_covariance_terms(std::uint64_t seed) {
  RngStream rng(seed, {0, 0}, DrawPurpose::kUser, 3);
  const CMat h = draw_rayleigh(2, 2, rng);
  const Detector d = mmse_detector(h, 1.0, 0.1);
  const double s2 = 1e-4;
  const CMat hhh = h * hermitian(h);
  CMat sig = CMat::zeros(2, 2);
  CMat noi = CMat::zeros(2, 2);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const CMat dw = delta_w(h, draw_estimation_error(2, 2, s2, rng), d);
    const CMat dw_h = hermitian(dw);
    sig += dw * hhh * dw_h;
    noi += dw * dw_h;
  }
  sig *= 1.0 / draws;
  noi *= 1.0 / draws;
  const double e_sig = rel_frob(cov_signal_term(h, d, s2), sig);
  const double e_noi = rel_frob(cov_noise_term(h, d, s2), noi);
  const double worst = std::max(e_sig, e_noi);
  return {"covariance closed forms vs Monte Carlo", worst < 0.05,
          fmt("signal term %.3f, noise term %.3f relative error (limit 0.05)", e_sig, e_noi)};
}

CheckResult check_ml_variance(std::uint64_t seed) {
  RngStream rng(seed, {0, 0}, DrawPurpose::kUser, 4);
  const TrainingMatrix training = build_training(2, 4, 1.0);
  const double n0 = 0.1;
  const CMat h = draw_rayleigh(2, 2, rng);
  double power = 0.0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const CMat dh = ml_estimate(simulate_training_rx(h, training, n0, rng), training) - h;
    power += frob_norm(dh) * frob_norm(dh) / 4.0;
  }
  const double measured = power / trials;
  const double expected = ce_noise_variance(4, 1.0, n0);
  const double err = std::abs(measured / expected - 1.0);
  return {"ML channel estimate error variance", err < 0.05,
          fmt("measured/expected - 1 = %.3f (limit %.2f)", err, 0.05)};
}

CheckResult check_sinr(std::uint64_t seed) {
  LinkConfig cfg;
  cfg.n_t = 4;
  cfg.n_r = 4;
  cfg.modulation = Modulation::kQpsk;
  cfg.ce_mode = CeMode::kMlTraining;
  RngStream rng(seed, {0, 0}, DrawPurpose::kUser, 5);
  const CMat h = draw_rayleigh(4, 4, rng);
  const double ebn0_db = 15.0 - to_db(2.0);
  const SinrEstimate est = empirical_sinr(h, cfg, ebn0_db, 5000, rng);
  double worst = 0.0;
  for (std::size_t k = 0; k < est.sinr.size(); ++k) {
    worst = std::max(worst, std::abs(est.predicted[k] / est.sinr[k] - 1.0));
  }
  return {"closed-form SINR vs measured (4x4, ML training, 15 dB)", worst < 0.08,
          fmt("worst stream relative error %.3f (limit %.2f)", worst, 0.08)};
}

CheckResult check_awgn_ber(std::uint64_t seed) {
  const Constellation c(Modulation::kBpsk);
  RngStream rng(seed, {0, 0}, DrawPurpose::kUser, 6);
  const double gamma = from_db(6.0);
  const int n = 200000;
  int errors = 0;
  for (int i = 0; i < n; ++i) {
    const unsigned label = static_cast<unsigned>(rng.next_u64() & 1U);
    const Cx rx = c.map(label) + rng.complex_gaussian(1.0 / gamma);
    errors += c.slice(rx) != label ? 1 : 0;
  }
  const double p = ber_awgn(Modulation::kBpsk, gamma);
  const double sigma = std::sqrt(p * (1 - p) / n);
  const double z = std::abs(errors / static_cast<double>(n) - p) / sigma;
  return {"BPSK AWGN BER at 6 dB", z < 3.0, fmt("deviation %.2f sigma, predicted %.3e", z, p)};
}

}  // namespace

std::vector<CheckResult> run_self_checks(std::uint64_t seed) {
  return {check_inverse(seed),  check_error_identity(seed), check_covariance_terms(seed),
          check_ml_variance(seed), check_sinr(seed),          check_awgn_ber(seed)};
}

}  // namespace mimo
