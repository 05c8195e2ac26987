#include <bit>
#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "mimo_ppsnr/mmse.hpp"
#include "mimo_ppsnr/sim.hpp"
#include "oracles.hpp"

using namespace mimo;

namespace {

LinkConfig small_config(Modulation m, CeMode ce, std::size_t n_t, std::size_t n_r) {
  LinkConfig cfg;
  cfg.n_t = n_t;
  cfg.n_r = n_r;
  cfg.n_tr = 4;
  cfg.modulation = m;
  cfg.ce_mode = ce;
  cfg.snr_grid_db = {0.0, 4.0, 8.0};
  cfg.n_channels = 12;
  cfg.n_packets = 4;
  cfg.n_symbols = 100;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("LinkConfig validation") {
  LinkConfig cfg = small_config(Modulation::kBpsk, CeMode::kMlTraining, 4, 4);
  CHECK_NOTHROW(cfg.validate());
  cfg.n_tr = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(Modulation::kBpsk, CeMode::kMlTraining, 5, 5);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(Modulation::kBpsk, CeMode::kFixedSigma, 2, 2);
  cfg.sigma_e = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(Modulation::kBpsk, CeMode::kPerfectCsi, 2, 2);
  cfg.snr_grid_db.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(Modulation::kBpsk, CeMode::kPerfectCsi, 2, 2);
  cfg.n_channels = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("Eb/N0 to Es/N0 and sigma_e2") {
  LinkConfig cfg = small_config(Modulation::kQam16, CeMode::kMlTraining, 2, 4);
  CHECK(cfg.esn0_db(10.0) == doctest::Approx(10.0 + 10.0 * std::log10(4.0)));
  CHECK(cfg.n0_for(10.0) == doctest::Approx(1.0 / 40.0));
  CHECK(cfg.analytic_sigma_e2(10.0) == doctest::Approx(1.0 / 40.0 / 4.0));
  cfg.ce_mode = CeMode::kPerfectCsi;
  CHECK(cfg.analytic_sigma_e2(10.0) == 0.0);
  cfg.ce_mode = CeMode::kFixedSigma;
  cfg.sigma_e = 0.1;
  CHECK(cfg.analytic_sigma_e2(10.0) == doctest::Approx(0.01));
}

TEST_CASE("run_packet: noiseless perfect CSI makes no errors") {
  std::mt19937_64 gen(401);
  for (Modulation m : {Modulation::kBpsk, Modulation::kQpsk, Modulation::kQam16}) {
    LinkConfig cfg = small_config(m, CeMode::kPerfectCsi, 2, 4);
    const CMat h = oracle::random_matrix(4, 2, gen);
    RngStream rng(402, {0, 0});
    const PacketResult r = run_packet(h, cfg, 200.0, rng);
    CHECK(r.bit_errors == 0);
    CHECK(r.bits == cfg.n_symbols * 2 * bits_per_symbol(m));
  }
}

TEST_CASE("run_packet: identity channel reduces to AWGN") {
  LinkConfig cfg = small_config(Modulation::kQpsk, CeMode::kPerfectCsi, 4, 4);
  cfg.n_symbols = 5000;
  const double ebn0_db = 3.0;
  std::uint64_t errors = 0, bits = 0;
  for (std::size_t p = 0; p < 10; ++p) {
    RngStream rng(403, {0, p});
    const PacketResult r = run_packet(CMat::identity(4), cfg, ebn0_db, rng);
    errors += r.bit_errors;
    bits += r.bits;
  }
  // With H = I the biased MMSE output is rescaled before slicing, so the
  // stream sees the AWGN channel at Es/N0.
  const double p = ber_awgn(Modulation::kQpsk, from_db(cfg.esn0_db(ebn0_db)));
  const double ber = static_cast<double>(errors) / static_cast<double>(bits);
  CHECK(std::abs(ber - p) < 4.0 * std::sqrt(p * (1 - p) / static_cast<double>(bits)));
}

TEST_CASE("run_packet: fixed sigma_e = 0 matches perfect CSI bit for bit") {
  std::mt19937_64 gen(404);
  const CMat h = oracle::random_matrix(4, 2, gen);
  LinkConfig perfect = small_config(Modulation::kQam16, CeMode::kPerfectCsi, 2, 4);
  LinkConfig fixed = perfect;
  fixed.ce_mode = CeMode::kFixedSigma;
  fixed.sigma_e = 0.0;
  RngStream a(405, {1, 2});
  RngStream b(405, {1, 2});
  const PacketResult ra = run_packet(h, perfect, 6.0, a);
  const PacketResult rb = run_packet(h, fixed, 6.0, b);
  CHECK(ra.bit_errors == rb.bit_errors);
  CHECK(ra.stream_errors == rb.stream_errors);
}

TEST_CASE("run_packet rejects mismatched shapes") {
  LinkConfig cfg = small_config(Modulation::kBpsk, CeMode::kPerfectCsi, 2, 4);
  RngStream rng(406, {0, 0});
  CHECK_THROWS_AS(run_packet(CMat::identity(3), cfg, 0.0, rng), std::invalid_argument);
  auto bad = [](const CMat&, double, double) { return CMat::zeros(3, 3); };
  CHECK_THROWS_AS(run_packet(CMat::zeros(4, 2), cfg, 0.0, rng, bad), std::invalid_argument);
}

TEST_CASE("analyze_channel") {
  std::mt19937_64 gen(407);
  const CMat h = oracle::random_matrix(4, 2, gen);
  LinkConfig cfg = small_config(Modulation::kBpsk, CeMode::kMlTraining, 2, 4);
  const ChannelAnalytics an = analyze_channel(h, cfg, 6.0);
  const double n0 = cfg.n0_for(6.0);
  CHECK(an.sigma_e2 == doctest::Approx(n0 / 4.0));
  const PpsnrReport r = ppsnr_estimated(h, 1.0, n0, an.sigma_e2);
  double mean = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(an.gamma_est[k] == doctest::Approx(r.gamma_est[k]));
    CHECK(an.ber_streams[k] == doctest::Approx(ber_awgn(Modulation::kBpsk, r.gamma_est[k])));
    mean += an.ber_streams[k] / 2.0;
  }
  CHECK(an.ber == doctest::Approx(mean));
  CHECK(analytic_ber_for_channel(h, cfg, 6.0) == an.ber);
}

TEST_CASE("run_curve bookkeeping") {
  LinkConfig cfg = small_config(Modulation::kQpsk, CeMode::kMlTraining, 2, 4);
  const auto curve = run_curve(cfg, RunOptions{1});
  REQUIRE(curve.size() == 3);
  for (const BerCurvePoint& pt : curve) {
    CHECK(pt.esn0_db == doctest::Approx(pt.ebn0_db + 10.0 * std::log10(2.0)));
    CHECK(pt.ber_sim == doctest::Approx(static_cast<double>(pt.bit_errors) / pt.bits_total));
    CHECK(pt.ci95_halfwidth ==
          doctest::Approx(1.96 * std::sqrt(pt.ber_sim * (1 - pt.ber_sim) / pt.bits_total)));
    CHECK(pt.bits_total == pt.packets_used * cfg.n_symbols * 2 * 2);
    CHECK(pt.mean_ppsnr_db.size() == 2);
    CHECK(pt.ber_sim_streams.size() == 2);
    CHECK(pt.ber_analytic > 0.0);
  }
  CHECK(curve[0].ber_sim > curve[2].ber_sim);
}

TEST_CASE("run_curve early stop keeps a channel-ordered prefix") {
  LinkConfig cfg = small_config(Modulation::kBpsk, CeMode::kMlTraining, 4, 4);
  cfg.snr_grid_db = {0.0};
  cfg.max_bit_errors = 300;
  const auto stopped = run_curve(cfg, RunOptions{1});
  cfg.max_bit_errors = 0;
  const auto full = run_curve(cfg, RunOptions{1});
  REQUIRE(stopped[0].stopped_early);
  CHECK(!full[0].stopped_early);
  CHECK(full[0].channels_used == cfg.n_channels);
  CHECK(stopped[0].bit_errors >= 300);

  // The prefix is the shortest channel-major run of packets reaching the limit.
  std::uint64_t errors = 0;
  std::size_t channels = 0, packets = 0;
  while (errors < 300) {
    const std::size_t c = packets / cfg.n_packets;
    const std::size_t p = packets % cfg.n_packets;
    RngStream rng(cfg.seed, {c, p}, DrawPurpose::kPacket, std::bit_cast<std::uint64_t>(0.0));
    errors += run_packet(sweep_channel(cfg, c), cfg, 0.0, rng).bit_errors;
    ++packets;
    channels = c + 1;
  }
  CHECK(stopped[0].packets_used == packets);
  CHECK(stopped[0].channels_used == channels);
  CHECK(stopped[0].bit_errors == errors);
  CHECK(stopped[0].bits_total == packets * cfg.n_symbols * 4);
}

TEST_CASE("run_curve does not depend on the worker count") {
  LinkConfig cfg = small_config(Modulation::kQam16, CeMode::kMlTraining, 2, 4);
  cfg.max_bit_errors = 500;
  const auto one = run_curve(cfg, RunOptions{1});
  const auto four = run_curve(cfg, RunOptions{4});
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].bit_errors == four[i].bit_errors);
    CHECK(one[i].bits_total == four[i].bits_total);
    CHECK(one[i].ber_analytic == four[i].ber_analytic);
    CHECK(one[i].mean_ppsnr_db == four[i].mean_ppsnr_db);
    CHECK(one[i].channels_used == four[i].channels_used);
    CHECK(one[i].packets_used == four[i].packets_used);
  }
}

TEST_CASE("channels are shared across grid points") {
  LinkConfig a = small_config(Modulation::kBpsk, CeMode::kPerfectCsi, 2, 4);
  LinkConfig b = a;
  b.snr_grid_db = {20.0};
  b.modulation = Modulation::kQam16;
  for (std::size_t c = 0; c < 5; ++c) CHECK(sweep_channel(a, c) == sweep_channel(b, c));
  CHECK(sweep_channel(a, 0) != sweep_channel(a, 1));
}

TEST_CASE("resolve_thread_count") {
  CHECK(resolve_thread_count(3) >= 1);
  ::setenv("MIMO_PPSNR_THREADS", "2", 1);
  CHECK(resolve_thread_count(8) == 2);
  CHECK(resolve_thread_count(1) == 1);
  ::unsetenv("MIMO_PPSNR_THREADS");
  CHECK(resolve_thread_count(8) == 8);
}

TEST_CASE("empirical_sinr tracks the closed form at 15 dB") {
  // One random 4x4 channel, ML training: per stream within 0.2 dB.
  std::mt19937_64 gen(408);
  const CMat h = oracle::random_matrix(4, 4, gen);
  LinkConfig cfg = small_config(Modulation::kQpsk, CeMode::kMlTraining, 4, 4);
  RngStream rng(409, {0, 0});
  const SinrEstimate est = empirical_sinr(h, cfg, 15.0 - to_db(2.0), 20000, rng);
  CHECK(est.trials == 20000);
  CHECK(est.sigma_e2 == doctest::Approx(cfg.analytic_sigma_e2(15.0 - to_db(2.0))));
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::abs(to_db(est.sinr[k]) - to_db(est.predicted[k])) < 0.2);
  }
  CHECK_THROWS_AS(empirical_sinr(h, cfg, 10.0, 999, rng), std::invalid_argument);
}

TEST_CASE("parse_ce_mode") {
  CHECK(parse_ce_mode("perfect") == CeMode::kPerfectCsi);
  CHECK(parse_ce_mode("ml") == CeMode::kMlTraining);
  CHECK(parse_ce_mode("fixed") == CeMode::kFixedSigma);
  CHECK_THROWS_AS(parse_ce_mode("oracle"), std::invalid_argument);
}
