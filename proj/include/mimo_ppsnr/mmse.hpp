#pragma once

#include <vector>

#include "mimo_ppsnr/cxmat.hpp"

namespace mimo {

/// Linear MMSE detector for y = Hx + n with E[xx^H] = Es I, E[nn^H] = N0 I.
///
/// k = (H^H H + (N0/Es) I)^{-1} is kept alongside w = k H^H because every
/// covariance expression below is written in terms of it.
struct Detector {
  CMat w;  ///< n_t x n_r
  CMat k;  ///< n_t x n_t, Hermitian positive definite
  double es = 0.0;
  double n0 = 0.0;
};

/// Per-stream split of a post-processing SINR denominator.
struct StreamPower {
  double signal = 0.0;        ///< Es |(WH)_kk|^2
  double interference = 0.0;  ///< Es sum_{l != k} |(WH)_kl|^2
  double noise = 0.0;         ///< diagonal of the post-detection noise covariance
};

/// Covariance of the post-detection noise dW H x + W n + dW n, with each of
/// its five expectation terms kept separately. The two cross terms vanish to
/// first order and are stored as zero matrices.
struct PostNoiseCov {
  CMat cov;
  CMat signal_leak;   ///< Es * E[dW H H^H dW^H]
  CMat thermal;       ///< N0 * W W^H
  CMat cross_w_dw;    ///< E[W n n^H dW^H]
  CMat cross_dw_w;    ///< E[dW n n^H W^H]
  CMat error_noise;   ///< N0 * E[dW dW^H]
};

struct PpsnrReport {
  std::vector<double> gamma_perfect;  ///< linear, known channel
  std::vector<double> gamma_est;      ///< linear, with estimation error
  double sigma_e2 = 0.0;
  std::vector<StreamPower> perfect_terms;
  std::vector<StreamPower> est_terms;
};

/// W = (H^H H + (N0/Es) I)^{-1} H^H. Requires es > 0 and n0 > 0.
Detector mmse_detector(const CMat& h, double es, double n0);

/// Post-processing SINR of each stream with the channel known exactly.
std::vector<double> ppsnr_perfect(const Detector& d, const CMat& h);
std::vector<StreamPower> ppsnr_perfect_terms(const Detector& d, const CMat& h);

/// First-order change of W when H is replaced by H + delta_h:
/// -K (H^H dH + dH^H H) K H^H + K dH^H.
CMat delta_w(const CMat& h, const CMat& delta_h, const Detector& d);

/// E[dW H H^H dW^H] over i.i.d. CN(0, sigma_e2) estimation error, using the
/// first-order dW. Closed form:
///   s2 [ tr(K H^H H H^H H K^H) K H^H H K^H
///      + tr(H K H^H H H^H H K^H H^H) K K^H
///      - tr(H K H^H H H^H) K K^H
///      - tr(H H^H H K^H H^H) K K^H
///      + tr(H H^H) K K^H ]
CMat cov_signal_term(const CMat& h, const Detector& d, double sigma_e2);

/// E[dW dW^H], same model. Closed form:
///   s2 [ tr(K H^H H K^H) K H^H H K^H
///      + tr(H K H^H H K^H H^H) K K^H
///      - tr(H K H^H) K K^H
///      - tr(H K^H H^H) K K^H
///      + n_r K K^H ]
CMat cov_noise_term(const CMat& h, const Detector& d, double sigma_e2);

/// Es * cov_signal_term + N0 W W^H + N0 * cov_noise_term.
PostNoiseCov post_noise_cov(const CMat& h, const Detector& d, double sigma_e2);

/// Closed-form per-stream SINR of an MMSE receiver built from a noisy
/// channel estimate. Signal and interference use the true-channel W and H;
/// the estimation error enters only through the noise covariance.
PpsnrReport ppsnr_estimated(const CMat& h, double es, double n0, double sigma_e2);

double to_db(double linear) noexcept;
double from_db(double db) noexcept;

}  // namespace mimo
