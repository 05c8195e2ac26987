#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mimo_ppsnr/channel.hpp"
#include "mimo_ppsnr/mmse.hpp"
#include "mimo_ppsnr/modem.hpp"
#include "mimo_ppsnr/selfcheck.hpp"
#include "mimo_ppsnr/sim.hpp"

namespace py = pybind11;
using namespace mimo;

namespace {

using CArray = py::array_t<Cx, py::array::c_style | py::array::forcecast>;

CMat to_cmat(const CArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return CMat(rows, cols, std::vector<Cx>(a.data(), a.data() + rows * cols));
}

CArray to_array(const CMat& m) {
  CArray out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::dict point_to_dict(const BerCurvePoint& p) {
  py::dict d;
  d["ebn0_db"] = p.ebn0_db;
  d["esn0_db"] = p.esn0_db;
  d["sigma_e2"] = p.sigma_e2;
  d["ber_sim"] = p.ber_sim;
  d["ber_analytic"] = p.ber_analytic;
  d["bit_errors"] = p.bit_errors;
  d["bits_total"] = p.bits_total;
  d["ci95_halfwidth"] = p.ci95_halfwidth;
  d["mean_ppsnr_db"] = p.mean_ppsnr_db;
  d["ber_sim_streams"] = p.ber_sim_streams;
  d["channels_used"] = p.channels_used;
  d["packets_used"] = p.packets_used;
  d["stopped_early"] = p.stopped_early;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Post-processing SNR of MIMO MMSE receivers with channel estimation error";

  py::register_exception<LinalgError>(m, "LinalgError", PyExc_ArithmeticError);

  m.def("mmse_filter", [](const CArray& h, double es, double n0) { return to_array(mmse_detector(to_cmat(h), es, n0).w); },
        py::arg("h"), py::arg("es"), py::arg("n0"));

  m.def(
      "ppsnr_perfect",
      [](const CArray& h, double es, double n0) {
        const CMat hm = to_cmat(h);
        return ppsnr_perfect(mmse_detector(hm, es, n0), hm);
      },
      py::arg("h"), py::arg("es"), py::arg("n0"));

  m.def(
      "ppsnr_estimated",
      [](const CArray& h, double es, double n0, double sigma_e2) {
        const PpsnrReport r = ppsnr_estimated(to_cmat(h), es, n0, sigma_e2);
        py::dict d;
        d["gamma_perfect"] = r.gamma_perfect;
        d["gamma_est"] = r.gamma_est;
        d["sigma_e2"] = r.sigma_e2;
        return d;
      },
      py::arg("h"), py::arg("es"), py::arg("n0"), py::arg("sigma_e2"));

  m.def(
      "post_noise_cov",
      [](const CArray& h, double es, double n0, double sigma_e2) {
        const CMat hm = to_cmat(h);
        return to_array(post_noise_cov(hm, mmse_detector(hm, es, n0), sigma_e2).cov);
      },
      py::arg("h"), py::arg("es"), py::arg("n0"), py::arg("sigma_e2"));

  m.def("ce_noise_variance",
        [](std::size_t n_tr, double es, double n0) { return ce_noise_variance(n_tr, es, n0); },
        py::arg("n_tr"), py::arg("es"), py::arg("n0"));

  m.def("q_function", &q_function, py::arg("x"));
  m.def(
      "ber_awgn", [](const std::string& mod, double gamma) { return ber_awgn(parse_modulation(mod), gamma); },
      py::arg("modulation"), py::arg("gamma"));

  m.def(
      "run_curve",
      [](std::size_t n_t, std::size_t n_r, const std::string& modulation, const std::string& ce,
         std::vector<double> snr_db, double sigma_e, std::size_t n_tr, std::size_t channels, std::size_t packets,
         std::size_t symbols, std::uint64_t seed, std::uint64_t max_errors, unsigned threads) {
        LinkConfig cfg;
        cfg.n_t = n_t;
        cfg.n_r = n_r;
        cfg.n_tr = n_tr;
        cfg.modulation = parse_modulation(modulation);
        cfg.ce_mode = parse_ce_mode(ce);
        cfg.sigma_e = sigma_e;
        cfg.snr_grid_db = std::move(snr_db);
        cfg.n_channels = channels;
        cfg.n_packets = packets;
        cfg.n_symbols = symbols;
        cfg.seed = seed;
        cfg.max_bit_errors = max_errors;
        std::vector<BerCurvePoint> curve;
        {
          py::gil_scoped_release release;
          curve = run_curve(cfg, RunOptions{threads});
        }
        py::list out;
        for (const BerCurvePoint& p : curve) out.append(point_to_dict(p));
        return out;
      },
      py::arg("n_t"), py::arg("n_r"), py::arg("modulation"), py::arg("ce"), py::arg("snr_db"),
      py::arg("sigma_e") = 0.0, py::arg("n_tr") = 4, py::arg("channels") = 200, py::arg("packets") = 50,
      py::arg("symbols") = 500, py::arg("seed") = 1, py::arg("max_errors") = 10000, py::arg("threads") = 0);

  m.def(
      "self_checks",
      [](std::uint64_t seed) {
        py::list out;
        for (const CheckResult& c : run_self_checks(seed)) out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
      },
      py::arg("seed") = 2024);
}
