#include "mimo_ppsnr/channel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mimo {
namespace {

// HT-LTF orthogonal mapping matrix for up to four spatial streams.
constexpr std::array<std::array<double, 4>, 4> kLtfMapping = {{
    {1, -1, 1, 1},
    {1, 1, -1, 1},
    {1, 1, 1, -1},
    {-1, 1, 1, 1},
}};

CMat draw_zmcscg(std::size_t n_r, std::size_t n_t, double variance, RngStream& rng) {
  CMat out(n_r, n_t);
  for (Cx& z : out.data()) z = rng.complex_gaussian(variance);
  return out;
}

}  // namespace

bool TrainingMatrix::orthogonal() const {
  const CMat gram = x_tr * hermitian(x_tr);
  const CMat target = CMat::identity(n_t()) * Cx{es * static_cast<double>(n_tr)};
  return frob_norm(gram - target) <= 1e-12 * frob_norm(target);
}

CMat draw_rayleigh(std::size_t n_r, std::size_t n_t, RngStream& rng) {
  return draw_zmcscg(n_r, n_t, 1.0, rng);
}

CMat draw_estimation_error(std::size_t n_r, std::size_t n_t, double sigma_e2, RngStream& rng) {
  if (!(sigma_e2 >= 0.0) || !std::isfinite(sigma_e2)) {
    throw std::invalid_argument("draw_estimation_error: variance must be finite and >= 0");
  }
  if (sigma_e2 == 0.0) return CMat::zeros(n_r, n_t);
  return draw_zmcscg(n_r, n_t, sigma_e2, rng);
}

ChannelDraw perturb_channel(const CMat& h, double sigma_e2, RngStream& rng) {
  ChannelDraw draw;
  draw.h = h;
  draw.delta_h = draw_estimation_error(h.rows(), h.cols(), sigma_e2, rng);
  draw.h_hat = h + draw.delta_h;
  draw.sigma_e2 = sigma_e2;
  return draw;
}

TrainingMatrix build_training(std::size_t n_t, std::size_t n_tr, double es) {
  if (n_t < 1 || n_t > kLtfMapping.size()) {
    throw std::invalid_argument("build_training: n_t must be in [1, 4], got " +
                                std::to_string(n_t));
  }
  if (n_tr > kLtfMapping.size()) {
    throw std::invalid_argument("build_training: n_tr must be <= 4, got " + std::to_string(n_tr));
  }
  if (n_tr < n_t) {
    throw std::invalid_argument("build_training: n_tr (" + std::to_string(n_tr) +
                                ") must be >= n_t (" + std::to_string(n_t) + ")");
  }
  if (!(es > 0.0) || !std::isfinite(es)) {
    throw std::invalid_argument("build_training: es must be positive");
  }
  const double amplitude = std::sqrt(es);
  TrainingMatrix training{CMat(n_t, n_tr), n_tr, es};
  for (std::size_t i = 0; i < n_t; ++i) {
    for (std::size_t j = 0; j < n_tr; ++j) training.x_tr(i, j) = amplitude * kLtfMapping[i][j];
  }
  return training;
}

CMat simulate_training_rx(const CMat& h, const TrainingMatrix& training, double n0,
                          RngStream& rng) {
  if (!(n0 >= 0.0)) {
    throw std::invalid_argument("simulate_training_rx: n0 must be >= 0");
  }
  CMat y = h * training.x_tr;
  if (n0 > 0.0) {
    for (Cx& z : y.data()) z += rng.complex_gaussian(n0);
  }
  return y;
}

CMat ml_estimate(const CMat& y_tr, const TrainingMatrix& training) {
  if (y_tr.cols() != training.x_tr.cols()) {
    throw std::invalid_argument("ml_estimate: y_tr has " + std::to_string(y_tr.cols()) +
                                " columns, training has " + std::to_string(training.x_tr.cols()));
  }
  const CMat x_h = hermitian(training.x_tr);
  return y_tr * x_h * inv_general(training.x_tr * x_h);
}

double ce_noise_variance(std::size_t n_tr, double es, double n0, CeVarianceScaling scaling,
                         std::size_t n_t) {
  if (n_tr < 1) throw std::invalid_argument("ce_noise_variance: n_tr must be >= 1");
  if (!(es > 0.0)) throw std::invalid_argument("ce_noise_variance: es must be positive");
  if (!(n0 >= 0.0)) throw std::invalid_argument("ce_noise_variance: n0 must be >= 0");
  const double base = n0 / (static_cast<double>(n_tr) * es);
  return scaling == CeVarianceScaling::kTimesNumTx ? static_cast<double>(n_t) * base : base;
}

}  // namespace mimo
