#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mimo_ppsnr/cli.hpp"

using namespace mimo;
using namespace mimo::cli;

namespace {

struct RunOutput {
  int status;
  std::string out;
  std::string err;
};

RunOutput run(std::vector<std::string> args) {
  args.insert(args.begin(), "mimo_ppsnr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

KeyValues kv_from(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in, "test.cfg");
}

}  // namespace

TEST_CASE("presets") {
  CHECK(parse_preset("fig1") == Preset::kFig1Bpsk);
  CHECK(parse_preset("fig2-16qam") == Preset::kFig2Qam16);
  CHECK(parse_preset("fig2-qam16") == Preset::kFig2Qam16);
  CHECK(parse_preset("fig3") == Preset::kFig3QpskFloor);
  CHECK(parse_preset("custom") == Preset::kCustom);
  CHECK_THROWS_AS(parse_preset("fig4"), ConfigError);

  const auto fig1 = preset_configs(Preset::kFig1Bpsk);
  CHECK(fig1.size() == 6);
  for (const LinkConfig& c : fig1) {
    CHECK(c.modulation == Modulation::kBpsk);
    CHECK(c.n_r == 4);
    CHECK(c.n_tr == 4);
    CHECK(c.snr_grid_db.size() == 11);
    CHECK(c.snr_grid_db.back() == 20.0);
  }
  const auto fig3 = preset_configs(Preset::kFig3QpskFloor);
  REQUIRE(fig3.size() == 4);
  const double sigmas[] = {0.0, 0.05, 0.1, 0.2};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(fig3[i].n_t == 4);
    CHECK(fig3[i].n_r == 5);
    CHECK(fig3[i].ce_mode == CeMode::kFixedSigma);
    CHECK(fig3[i].sigma_e == sigmas[i]);
    CHECK(fig3[i].snr_grid_db.back() == 40.0);
  }
}

TEST_CASE("parse_key_values") {
  const KeyValues kv = kv_from("# comment\n\npreset = fig1\n seed=7\n");
  CHECK(kv.at("preset") == "fig1");
  CHECK(kv.at("seed") == "7");
  CHECK_THROWS_WITH_AS(kv_from("preset=fig1\nbogus=1\n"), doctest::Contains("test.cfg:2"), ConfigError);
  CHECK_THROWS_AS(kv_from("no equals sign\n"), ConfigError);
}

TEST_CASE("resolve_experiment") {
  SUBCASE("custom defaults and overrides") {
    const Experiment e = resolve_experiment(
        kv_from("nt=2\nnr=3\nmod=qam16\nce=perfect\nsnr-start=4\nsnr-stop=8\nsnr-step=2\nchannels=5\n"));
    REQUIRE(e.configs.size() == 1);
    const LinkConfig& c = e.configs[0];
    CHECK(c.n_t == 2);
    CHECK(c.n_r == 3);
    CHECK(c.modulation == Modulation::kQam16);
    CHECK(c.ce_mode == CeMode::kPerfectCsi);
    CHECK(c.snr_grid_db == std::vector<double>{4.0, 6.0, 8.0});
    CHECK(c.n_channels == 5);
  }
  SUBCASE("sigma-e implies fixed") {
    const Experiment e = resolve_experiment(kv_from("sigma-e=0.1\n"));
    CHECK(e.configs[0].ce_mode == CeMode::kFixedSigma);
    CHECK(e.configs[0].sigma_e == 0.1);
    CHECK_THROWS_AS(resolve_experiment(kv_from("sigma-e=0.1\nce=ml\n")), ConfigError);
  }
  SUBCASE("training shorter than the antenna count") {
    CHECK_THROWS_WITH_AS(resolve_experiment(kv_from("ntr=2\nnt=4\n")), doctest::Contains("n_tr"), ConfigError);
  }
  SUBCASE("structural keys conflict with a preset") {
    CHECK_THROWS_AS(resolve_experiment(kv_from("preset=fig1\nnt=2\n")), ConfigError);
    CHECK_NOTHROW(resolve_experiment(kv_from("preset=fig1\nseed=3\nchannels=2\n")));
  }
  SUBCASE("paper scale") {
    const Experiment e = resolve_experiment(kv_from("preset=fig3\npaper-scale=true\n"));
    for (const LinkConfig& c : e.configs) {
      CHECK(c.n_channels == 1000);
      CHECK(c.n_packets == 500);
      CHECK(c.n_symbols == 2000);
    }
  }
  SUBCASE("bad values") {
    CHECK_THROWS_AS(resolve_experiment(kv_from("channels=-3\n")), ConfigError);
    CHECK_THROWS_AS(resolve_experiment(kv_from("snr-step=0\n")), ConfigError);
    CHECK_THROWS_AS(resolve_experiment(kv_from("mod=8psk\n")), ConfigError);
    CHECK_THROWS_AS(resolve_experiment({{"nope", "1"}}), ConfigError);
  }
}

TEST_CASE("parse_matrix") {
  const CMat m = parse_matrix("1,-0.5j;0.3-1.2j,2");
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m(0, 0) == Cx{1, 0});
  CHECK(m(0, 1) == Cx{0, -0.5});
  CHECK(m(1, 0) == Cx{0.3, -1.2});
  CHECK(m(1, 1) == Cx{2, 0});
  CHECK_THROWS_AS(parse_matrix("1,2;3"), ConfigError);
  CHECK_THROWS_AS(parse_matrix("1,x"), ConfigError);
}

TEST_CASE("curve CSV is reproducible byte for byte") {
  const std::vector<std::string> args = {"curve", "--nt", "2", "--nr", "2", "--mod", "qpsk",
                                         "--snr-stop", "4", "--channels", "4", "--packets", "2",
                                         "--symbols", "50", "--seed", "5"};
  const RunOutput a = run(args);
  const RunOutput b = run(args);
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("# mimo_ppsnr 0.1.0\n", 0) == 0);
  CHECK(a.out.find("# seed: 5") != std::string::npos);
  CHECK(a.out.find("\npreset,n_t,n_r,modulation,ce_mode,sigma_e,ebn0_db,esn0_db,ber_sim,") != std::string::npos);
  std::size_t rows = 0;
  std::istringstream lines(a.out);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("custom,", 0) == 0) ++rows;
  }
  CHECK(rows == 3);

  std::vector<std::string> threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  CHECK(run(threaded).out == a.out);
}

TEST_CASE("curve writes to --out") {
  const std::string path = "cli_test_out.csv";
  std::remove(path.c_str());
  const RunOutput r = run({"curve", "--nt", "1", "--nr", "2", "--snr-stop", "2", "--channels", "2",
                           "--packets", "1", "--symbols", "20", "--out", path});
  CHECK(r.status == 0);
  std::ifstream in(path);
  CHECK(in.good());
  std::remove(path.c_str());

  CHECK(run({"curve", "--nt", "1", "--channels", "1", "--out", "/nonexistent-dir/x.csv"}).status == 3);
}

TEST_CASE("curve reads a config file; flags win") {
  const std::string path = "cli_test.cfg";
  {
    std::ofstream f(path);
    f << "nt=1\nnr=2\nsnr-stop=2\nchannels=2\npackets=1\nsymbols=20\nseed=9\n";
  }
  const RunOutput r = run({"curve", "--config", path, "--seed", "10"});
  CHECK(r.status == 0);
  CHECK(r.out.find("# seed: 10") != std::string::npos);
  std::remove(path.c_str());
  CHECK(run({"curve", "--config", "missing.cfg"}).status == 2);
}

TEST_CASE("exit codes for configuration errors") {
  const RunOutput r = run({"curve", "--ntr", "2", "--nt", "4"});
  CHECK(r.status == 2);
  CHECK(r.err.find("n_tr") != std::string::npos);
  CHECK(run({"curve", "--preset", "fig1", "--nt", "2"}).status == 2);
  CHECK(run({"curve", "--bogus", "1"}).status == 2);
  CHECK(run({}).status == 2);
}

TEST_CASE("analytics subcommand") {
  const RunOutput r = run({"analytics", "--matrix", "1,0;0,1", "--esn0-db", "10", "--sigma-e2", "0.01"});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("stream,gamma_perfect,gamma_perfect_db,gamma_est") != std::string::npos);
  CHECK(r.out.find("\n0,1.000000e+01,10.0000,8.448541e+00,") != std::string::npos);
  CHECK(run({"analytics", "--matrix", "1,0;0,1", "--esn0-db", "10", "--sigma-e2", "0.1", "--ml-ntr", "4"})
            .status == 2);
  CHECK(run({"analytics", "--matrix", "1,0;0", "--esn0-db", "10"}).status == 2);
}
