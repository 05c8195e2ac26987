#pragma once

#include <cstddef>

#include "mimo_ppsnr/cxmat.hpp"
#include "mimo_ppsnr/rng.hpp"

namespace mimo {

/// One channel realization together with the receiver's estimate of it.
/// h_hat == h + delta_h entrywise.
struct ChannelDraw {
  CMat h;
  CMat h_hat;
  CMat delta_h;
  double sigma_e2 = 0.0;
};

/// Known training block sent ahead of each packet: sqrt(Es) times the leading
/// n_t x n_tr block of the 4x4 HT-LTF mapping matrix.
struct TrainingMatrix {
  CMat x_tr;
  std::size_t n_tr = 0;
  double es = 0.0;

  std::size_t n_t() const noexcept { return x_tr.rows(); }
  /// X X^H == Es * n_tr * I within 1e-12. Only orthogonal blocks give i.i.d.
  /// estimation error with the variance of ce_noise_variance().
  bool orthogonal() const;
};

/// How the per-entry estimation-error variance is tied to the SNR.
enum class CeVarianceScaling {
  kPerAntenna,   ///< N0 / (n_tr * Es)
  kTimesNumTx,   ///< n_t * N0 / (n_tr * Es), for total-power SNR definitions
};

/// i.i.d. ZMCSCG entries with unit variance.
CMat draw_rayleigh(std::size_t n_r, std::size_t n_t, RngStream& rng);

/// i.i.d. ZMCSCG entries with variance sigma_e2. Returns the zero matrix for
/// sigma_e2 == 0 without consuming randomness. Throws std::invalid_argument
/// for negative or non-finite variance.
CMat draw_estimation_error(std::size_t n_r, std::size_t n_t, double sigma_e2, RngStream& rng);

/// Additive error model: h_hat = h + delta_h with fresh delta_h.
ChannelDraw perturb_channel(const CMat& h, double sigma_e2, RngStream& rng);

/// Throws std::invalid_argument unless 1 <= n_t <= n_tr <= 4 and es > 0.
TrainingMatrix build_training(std::size_t n_t, std::size_t n_tr, double es);

/// Y_tr = H X_tr + noise, noise entries ZMCSCG with variance n0.
CMat simulate_training_rx(const CMat& h, const TrainingMatrix& training, double n0,
                          RngStream& rng);

/// Least-squares (ML under Gaussian noise) estimate Y X^H (X X^H)^{-1}.
/// Throws LinalgError if the training Gram matrix is singular.
CMat ml_estimate(const CMat& y_tr, const TrainingMatrix& training);

/// Per-entry estimation error variance of ml_estimate() under orthogonal
/// training: N0 / (n_tr * Es), optionally scaled by n_t.
double ce_noise_variance(std::size_t n_tr, double es, double n0,
                         CeVarianceScaling scaling = CeVarianceScaling::kPerAntenna,
                         std::size_t n_t = 1);

}  // namespace mimo
