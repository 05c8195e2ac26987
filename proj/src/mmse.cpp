#include "mimo_ppsnr/mmse.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mimo {
namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("mmse: ") + what + " must be positive and finite");
  }
}

void require_nonnegative(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("mmse: ") + what + " must be >= 0 and finite");
  }
}

void require_detector_for(const Detector& d, const CMat& h) {
  if (d.w.rows() != h.cols() || d.w.cols() != h.rows()) {
    throw std::invalid_argument("mmse: detector shape does not match channel");
  }
}

// Products shared by the two covariance closed forms.
struct Blocks {
  CMat k_h;      // K^H
  CMat hh;       // H^H
  CMat khhk;     // K H^H H K^H
  CMat kk;       // K K^H
};

Blocks make_blocks(const CMat& h, const Detector& d) {
  Blocks b;
  b.k_h = hermitian(d.k);
  b.hh = hermitian(h);
  b.khhk = d.k * b.hh * h * b.k_h;
  b.kk = d.k * b.k_h;
  return b;
}

double real_trace(const CMat& a) { return trace(a).real(); }

std::vector<StreamPower> stream_terms(const CMat& wh, double es,
                                      const CMat& noise_cov) {
  const std::size_t n_t = wh.rows();
  std::vector<StreamPower> terms(n_t);
  for (std::size_t k = 0; k < n_t; ++k) {
    terms[k].signal = es * std::norm(wh(k, k));
    double leak = 0.0;
    for (std::size_t l = 0; l < wh.cols(); ++l) {
      if (l != k) leak += std::norm(wh(k, l));
    }
    terms[k].interference = es * leak;
    terms[k].noise = noise_cov(k, k).real();
  }
  return terms;
}

std::vector<double> ratios(const std::vector<StreamPower>& terms) {
  std::vector<double> out;
  out.reserve(terms.size());
  for (const StreamPower& t : terms) {
    // A zero signal (H = 0) would otherwise give 0/0 with perfect CSI.
    out.push_back(t.signal == 0.0 ? 0.0 : t.signal / (t.interference + t.noise));
  }
  return out;
}

}  // namespace

Detector mmse_detector(const CMat& h, double es, double n0) {
  require_positive(es, "es");
  require_positive(n0, "n0");
  const CMat hh = hermitian(h);
  CMat gram = hh * h;
  const double reg = n0 / es;
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += reg;
  Detector d;
  d.k = inv_hpd(gram);
  d.w = d.k * hh;
  d.es = es;
  d.n0 = n0;
  return d;
}

std::vector<StreamPower> ppsnr_perfect_terms(const Detector& d, const CMat& h) {
  require_detector_for(d, h);
  return stream_terms(d.w * h, d.es, d.n0 * (d.w * hermitian(d.w)));
}

std::vector<double> ppsnr_perfect(const Detector& d, const CMat& h) {
  return ratios(ppsnr_perfect_terms(d, h));
}

CMat delta_w(const CMat& h, const CMat& delta_h, const Detector& d) {
  require_detector_for(d, h);
  if (delta_h.rows() != h.rows() || delta_h.cols() != h.cols()) {
    throw std::invalid_argument("delta_w: delta_h shape does not match channel");
  }
  const CMat dh_h = hermitian(delta_h);
  const CMat sym = hermitian(h) * delta_h + dh_h * h;
  return d.k * dh_h - d.k * sym * d.w;
}

CMat cov_signal_term(const CMat& h, const Detector& d, double sigma_e2) {
  require_detector_for(d, h);
  require_nonnegative(sigma_e2, "sigma_e2");
  const Blocks b = make_blocks(h, d);
  const CMat hhh = h * b.hh;                 // H H^H
  const CMat hhhh = b.hh * hhh * h;          // H^H H H^H H
  const CMat hkh = h * d.k * b.hh;           // H K H^H
  const CMat hkhh = h * b.k_h * b.hh;        // H K^H H^H

  const double t1 = real_trace(d.k * hhhh * b.k_h);
  const double t2 = real_trace(h * d.k * hhhh * b.k_h * b.hh);
  const double t3 = real_trace(hkh * hhh);
  const double t4 = real_trace(hhh * hkhh);
  const double t5 = real_trace(hhh);

  CMat out = b.khhk * Cx{t1} + b.kk * Cx{t2 - t3 - t4 + t5};
  return out * Cx{sigma_e2};
}

CMat cov_noise_term(const CMat& h, const Detector& d, double sigma_e2) {
  require_detector_for(d, h);
  require_nonnegative(sigma_e2, "sigma_e2");
  const Blocks b = make_blocks(h, d);
  const double n_r = static_cast<double>(h.rows());

  const double t1 = real_trace(b.khhk);
  const double t2 = real_trace(h * b.khhk * b.hh);
  const double t3 = real_trace(h * d.k * b.hh);
  const double t4 = real_trace(h * b.k_h * b.hh);

  CMat out = b.khhk * Cx{t1} + b.kk * Cx{t2 - t3 - t4 + n_r};
  return out * Cx{sigma_e2};
}

PostNoiseCov post_noise_cov(const CMat& h, const Detector& d, double sigma_e2) {
  PostNoiseCov pn;
  pn.signal_leak = cov_signal_term(h, d, sigma_e2) * Cx{d.es};
  pn.thermal = (d.w * hermitian(d.w)) * Cx{d.n0};
  pn.cross_w_dw = CMat::zeros(d.w.rows(), d.w.rows());
  pn.cross_dw_w = pn.cross_w_dw;
  pn.error_noise = cov_noise_term(h, d, sigma_e2) * Cx{d.n0};
  pn.cov = pn.thermal + pn.signal_leak + pn.cross_w_dw + pn.cross_dw_w + pn.error_noise;
  return pn;
}

PpsnrReport ppsnr_estimated(const CMat& h, double es, double n0, double sigma_e2) {
  require_nonnegative(sigma_e2, "sigma_e2");
  const Detector d = mmse_detector(h, es, n0);
  const CMat wh = d.w * h;
  PpsnrReport report;
  report.sigma_e2 = sigma_e2;
  report.perfect_terms = stream_terms(wh, es, d.n0 * (d.w * hermitian(d.w)));
  report.est_terms = stream_terms(wh, es, post_noise_cov(h, d, sigma_e2).cov);
  report.gamma_perfect = ratios(report.perfect_terms);
  report.gamma_est = ratios(report.est_terms);
  return report;
}

double to_db(double linear) noexcept { return 10.0 * std::log10(linear); }
double from_db(double db) noexcept { return std::pow(10.0, db / 10.0); }

}  // namespace mimo
