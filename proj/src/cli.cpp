#include "mimo_ppsnr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mimo_ppsnr/mmse.hpp"
#include "mimo_ppsnr/selfcheck.hpp"

namespace mimo::cli {
namespace {

constexpr std::size_t kPaperChannels = 1000;
constexpr std::size_t kPaperPackets = 500;
constexpr std::size_t kPaperSymbols = 2000;

// Keys that describe the link itself; a preset fixes them.
const std::vector<std::string> kStructuralKeys = {"nt", "nr", "ntr", "mod", "ce", "sigma-e"};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(value)) {
    throw ConfigError("invalid number for '" + key + "': '" + text + "'");
  }
  return value;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("invalid non-negative integer for '" + key + "': '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("invalid boolean for '" + key + "': '" + text + "'");
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("snr-step must be positive");
  if (stop < start) throw ConfigError("snr-stop must be >= snr-start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

std::string format(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

std::string db4(double v) { return format("%.4f", v); }
std::string sci(double v) { return format("%.6e", v); }
std::string num(double v) { return format("%.6g", v); }

std::string join(const std::vector<double>& values, std::string (*fmt)(double)) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += fmt(values[i]);
  }
  return out;
}

std::string_view scaling_name(CeVarianceScaling s) {
  return s == CeVarianceScaling::kTimesNumTx ? "times-nt" : "per-antenna";
}

std::string describe(const LinkConfig& c) {
  std::ostringstream out;
  out << "nt=" << c.n_t << " nr=" << c.n_r << " ntr=" << c.n_tr << " mod=" << to_string(c.modulation)
      << " ce=" << to_string(c.ce_mode) << " sigma_e=" << num(c.sigma_e)
      << " snr_db=" << join(c.snr_grid_db, db4) << " channels=" << c.n_channels
      << " packets=" << c.n_packets << " symbols=" << c.n_symbols
      << " max_errors=" << c.max_bit_errors << " seed=" << c.seed
      << " ce_variance_scaling=" << scaling_name(c.ce_variance_scaling) << " es=" << num(c.es);
  return out.str();
}

std::vector<LinkConfig> figure_configs(Modulation m) {
  std::vector<LinkConfig> configs;
  for (std::size_t n_t : {1, 2, 4}) {
    for (CeMode ce : {CeMode::kMlTraining, CeMode::kPerfectCsi}) {
      LinkConfig c;
      c.n_t = n_t;
      c.n_r = 4;
      c.n_tr = 4;
      c.modulation = m;
      c.ce_mode = ce;
      c.snr_grid_db = make_grid(0.0, 20.0, 2.0);
      configs.push_back(c);
    }
  }
  return configs;
}

Cx parse_complex(std::string_view raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw ConfigError("empty matrix entry");
  auto parse_part = [&](std::string_view part, bool imaginary) {
    if (imaginary && (part.empty() || part == "+" || part == "-")) {
      return part == "-" ? -1.0 : 1.0;
    }
    std::string s(part);
    if (!s.empty() && s.front() == '+') s.erase(0, 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw ConfigError("invalid matrix entry '" + text + "'");
    }
    return v;
  };
  const char last = text.back();
  if (last != 'j' && last != 'i') return {parse_part(text, false), 0.0};
  const std::string_view body(text.data(), text.size() - 1);
  // Split at the last sign that is not the leading one or an exponent sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string_view::npos) return {0.0, parse_part(body, true)};
  return {parse_part(body.substr(0, split), false), parse_part(body.substr(split), true)};
}

int run_curve_command(const KeyValues& kv, std::ostream& out, std::ostream& err) {
  const Experiment exp = resolve_experiment(kv);
  const std::vector<CurveResult> results = run_experiment(exp);
  if (exp.out_path.empty()) {
    write_csv(out, exp, results);
    write_summary(err, results);
    return 0;
  }
  std::ofstream file(exp.out_path, std::ios::binary | std::ios::trunc);
  if (!file) {
    err << "error: cannot open '" << exp.out_path << "' for writing\n";
    return 3;
  }
  write_csv(file, exp, results);
  file.flush();
  if (!file) {
    err << "error: failed writing '" << exp.out_path << "'\n";
    return 3;
  }
  write_summary(out, results);
  out << "wrote " << exp.out_path << "\n";
  return 0;
}

int run_analytics_command(const std::string& matrix, double esn0_db, double sigma_e2,
                          std::size_t ml_ntr, double es, std::ostream& out) {
  const CMat h = parse_matrix(matrix);
  if (!(es > 0.0)) throw ConfigError("es must be positive");
  const double n0 = es / from_db(esn0_db);
  if (ml_ntr > 0) sigma_e2 = ce_noise_variance(ml_ntr, es, n0);
  if (!(sigma_e2 >= 0.0)) throw ConfigError("sigma-e2 must be >= 0");
  const PpsnrReport r = ppsnr_estimated(h, es, n0, sigma_e2);

  out << "# channel " << h.rows() << "x" << h.cols() << " (n_r x n_t), Es=" << num(es)
      << " Es/N0=" << db4(esn0_db) << " dB, sigma_e2=" << sci(sigma_e2) << "\n";
  out << "stream,gamma_perfect,gamma_perfect_db,gamma_est,gamma_est_db,signal,interference,noise\n";
  for (std::size_t k = 0; k < r.gamma_est.size(); ++k) {
    out << k << ',' << sci(r.gamma_perfect[k]) << ',' << db4(to_db(r.gamma_perfect[k])) << ','
        << sci(r.gamma_est[k]) << ',' << db4(to_db(r.gamma_est[k])) << ','
        << sci(r.est_terms[k].signal) << ',' << sci(r.est_terms[k].interference) << ','
        << sci(r.est_terms[k].noise) << "\n";
  }
  return 0;
}

int run_validate_command(std::uint64_t seed, std::ostream& out) {
  const std::vector<CheckResult> checks = run_self_checks(seed);
  bool all = true;
  for (const CheckResult& c : checks) {
    out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    all = all && c.passed;
  }
  out << (all ? "all checks passed\n" : "some checks failed\n");
  return all ? 0 : 1;
}

}  // namespace

std::string_view to_string(Preset p) noexcept {
  switch (p) {
    case Preset::kFig1Bpsk:
      return "fig1-bpsk";
    case Preset::kFig2Qam16:
      return "fig2-16qam";
    case Preset::kFig3QpskFloor:
      return "fig3-qpsk-floor";
    case Preset::kCustom:
      return "custom";
  }
  return "custom";
}

Preset parse_preset(std::string_view name) {
  if (name == "fig1" || name == "fig1-bpsk") return Preset::kFig1Bpsk;
  if (name == "fig2" || name == "fig2-16qam" || name == "fig2-qam16") return Preset::kFig2Qam16;
  if (name == "fig3" || name == "fig3-qpsk-floor") return Preset::kFig3QpskFloor;
  if (name == "custom") return Preset::kCustom;
  throw ConfigError("unknown preset '" + std::string(name) +
                    "' (expected fig1-bpsk, fig2-16qam, fig3-qpsk-floor or custom)");
}

std::vector<LinkConfig> preset_configs(Preset p) {
  switch (p) {
    case Preset::kFig1Bpsk:
      return figure_configs(Modulation::kBpsk);
    case Preset::kFig2Qam16:
      return figure_configs(Modulation::kQam16);
    case Preset::kFig3QpskFloor: {
      std::vector<LinkConfig> configs;
      for (double sigma_e : {0.0, 0.05, 0.10, 0.20}) {
        LinkConfig c;
        c.n_t = 4;
        c.n_r = 5;
        c.n_tr = 4;
        c.modulation = Modulation::kQpsk;
        c.ce_mode = CeMode::kFixedSigma;
        c.sigma_e = sigma_e;
        c.snr_grid_db = make_grid(0.0, 40.0, 2.0);
        configs.push_back(c);
      }
      return configs;
    }
    case Preset::kCustom:
      break;
  }
  return {};
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "preset",  "nt",        "nr",          "ntr",        "mod",      "ce",
      "sigma-e", "snr-start", "snr-stop",    "snr-step",   "channels", "packets",
      "symbols", "seed",      "out",         "paper-scale", "max-errors", "threads",
      "ce-variance-scaling"};
  return keys;
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  const auto& keys = known_keys();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    if (key.starts_with("--")) key.erase(0, 2);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_key_values(in, path);
}

Experiment resolve_experiment(const KeyValues& kv) {
  const auto& keys = known_keys();
  for (const auto& [key, value] : kv) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  Experiment exp;
  if (const auto* p = get("preset")) exp.preset = parse_preset(trim(*p));

  if (exp.preset == Preset::kCustom) {
    LinkConfig c;
    c.snr_grid_db = make_grid(0.0, 20.0, 2.0);
    if (const auto* v = get("nt")) c.n_t = parse_uint("nt", *v);
    if (const auto* v = get("nr")) c.n_r = parse_uint("nr", *v);
    if (const auto* v = get("ntr")) c.n_tr = parse_uint("ntr", *v);
    try {
      if (const auto* v = get("mod")) c.modulation = parse_modulation(trim(*v));
      if (const auto* v = get("ce")) c.ce_mode = parse_ce_mode(trim(*v));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (const auto* v = get("sigma-e")) {
      c.sigma_e = parse_double("sigma-e", *v);
      if (!get("ce")) c.ce_mode = CeMode::kFixedSigma;
      if (c.ce_mode != CeMode::kFixedSigma) {
        throw ConfigError("sigma-e only applies with ce=fixed");
      }
    }
    exp.configs.push_back(c);
  } else {
    for (const std::string& key : kStructuralKeys) {
      if (get(key)) {
        throw ConfigError("key '" + key + "' cannot be combined with preset " +
                          std::string(to_string(exp.preset)));
      }
    }
    exp.configs = preset_configs(exp.preset);
  }

  const bool has_start = get("snr-start") != nullptr;
  const bool has_stop = get("snr-stop") != nullptr;
  const bool has_step = get("snr-step") != nullptr;
  const bool paper_scale = get("paper-scale") && parse_bool("paper-scale", *get("paper-scale"));

  for (LinkConfig& c : exp.configs) {
    if (has_start || has_stop || has_step) {
      const double start = has_start ? parse_double("snr-start", *get("snr-start")) : c.snr_grid_db.front();
      const double stop = has_stop ? parse_double("snr-stop", *get("snr-stop")) : c.snr_grid_db.back();
      const double step = has_step ? parse_double("snr-step", *get("snr-step"))
                                   : (c.snr_grid_db.size() > 1 ? c.snr_grid_db[1] - c.snr_grid_db[0] : 1.0);
      c.snr_grid_db = make_grid(start, stop, step);
    }
    if (paper_scale) {
      c.n_channels = kPaperChannels;
      c.n_packets = kPaperPackets;
      c.n_symbols = kPaperSymbols;
    }
    if (const auto* v = get("channels")) c.n_channels = parse_uint("channels", *v);
    if (const auto* v = get("packets")) c.n_packets = parse_uint("packets", *v);
    if (const auto* v = get("symbols")) c.n_symbols = parse_uint("symbols", *v);
    if (const auto* v = get("seed")) c.seed = parse_uint("seed", *v);
    if (const auto* v = get("max-errors")) c.max_bit_errors = parse_uint("max-errors", *v);
    if (const auto* v = get("ce-variance-scaling")) {
      const std::string s = trim(*v);
      if (s == "per-antenna") {
        c.ce_variance_scaling = CeVarianceScaling::kPerAntenna;
      } else if (s == "times-nt") {
        c.ce_variance_scaling = CeVarianceScaling::kTimesNumTx;
      } else {
        throw ConfigError("invalid ce-variance-scaling '" + s + "' (expected per-antenna or times-nt)");
      }
    }
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (const auto* v = get("out")) exp.out_path = trim(*v);
  if (const auto* v = get("threads")) exp.threads = static_cast<unsigned>(parse_uint("threads", *v));
  return exp;
}

std::vector<CurveResult> run_experiment(const Experiment& exp) {
  std::vector<CurveResult> results;
  results.reserve(exp.configs.size());
  const RunOptions options{exp.threads};
  for (const LinkConfig& c : exp.configs) results.push_back({c, run_curve(c, options)});
  return results;
}

void write_csv(std::ostream& out, const Experiment& exp, const std::vector<CurveResult>& results) {
  out << "# mimo_ppsnr " << kToolVersion << "\n";
  out << "# preset: " << to_string(exp.preset) << "\n";
  if (!exp.configs.empty()) out << "# seed: " << exp.configs.front().seed << "\n";
  out << "# energy: Es/N0 = Eb/N0 * log2(M) per transmit antenna\n";
  out << "# early stop: first packet (channel-major order) at which bit errors reach max_errors (0 = never)\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    out << "# config " << i + 1 << ": " << describe(results[i].config) << "\n";
  }
  out << "preset,n_t,n_r,modulation,ce_mode,sigma_e,ebn0_db,esn0_db,ber_sim,ber_analytic,ci95,"
         "bits_total,bit_errors,channels_used,packets_used,stopped_early,sigma_e2_analytic,"
         "mean_ppsnr_db_per_stream,ber_sim_per_stream\n";
  for (const CurveResult& r : results) {
    const LinkConfig& c = r.config;
    for (const BerCurvePoint& p : r.points) {
      out << to_string(exp.preset) << ',' << c.n_t << ',' << c.n_r << ',' << to_string(c.modulation)
          << ',' << to_string(c.ce_mode) << ',' << num(c.ce_mode == CeMode::kFixedSigma ? c.sigma_e : 0.0)
          << ',' << db4(p.ebn0_db) << ',' << db4(p.esn0_db) << ',' << sci(p.ber_sim) << ','
          << sci(p.ber_analytic) << ',' << sci(p.ci95_halfwidth) << ',' << p.bits_total << ','
          << p.bit_errors << ',' << p.channels_used << ',' << p.packets_used << ',' << (p.stopped_early ? 1 : 0) << ','
          << sci(p.sigma_e2) << ',' << join(p.mean_ppsnr_db, db4) << ','
          << join(p.ber_sim_streams, sci) << "\n";
    }
  }
}

void write_summary(std::ostream& out, const std::vector<CurveResult>& results) {
  for (const CurveResult& r : results) {
    const LinkConfig& c = r.config;
    out << c.n_t << "x" << c.n_r << " " << to_string(c.modulation) << " ce=" << to_string(c.ce_mode);
    if (c.ce_mode == CeMode::kFixedSigma) out << " sigma_e=" << num(c.sigma_e);
    out << "\n";
    out << "  Eb/N0[dB]    ber_sim       ber_analytic  analytic/sim\n";
    for (const BerCurvePoint& p : r.points) {
      char line[128];
      const double ratio = p.ber_sim > 0.0 ? p.ber_analytic / p.ber_sim : 0.0;
      std::snprintf(line, sizeof line, "  %9.4f  %12.4e  %12.4e  %s\n", p.ebn0_db, p.ber_sim,
                    p.ber_analytic, p.ber_sim > 0.0 ? format("%.3f", ratio).c_str() : "n/a");
      out << line;
    }
  }
}

CMat parse_matrix(std::string_view text) {
  std::vector<std::vector<Cx>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(';', start), text.size());
    const std::string_view row_text = text.substr(start, end - start);
    std::vector<Cx> row;
    std::size_t s = 0;
    while (s <= row_text.size()) {
      const std::size_t e = std::min(row_text.find(',', s), row_text.size());
      row.push_back(parse_complex(row_text.substr(s, e - s)));
      s = e + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError("matrix rows have different lengths");
    }
    rows.push_back(std::move(row));
    start = end + 1;
  }
  std::vector<Cx> entries;
  for (const auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
  return CMat(rows.size(), rows.front().size(), std::move(entries));
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Post-processing SNR of MIMO MMSE receivers with channel estimation error"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CLI::App* curve = app.add_subcommand("curve", "Monte Carlo BER sweep with analytic prediction");
  std::string config_path;
  curve->add_option("--config", config_path, "key=value file; flags override its entries");
  KeyValues flag_values;
  std::vector<std::pair<std::string, CLI::Option*>> curve_opts;
  for (const std::string& key : known_keys()) {
    if (key == "paper-scale") continue;
    curve_opts.emplace_back(key, curve->add_option("--" + key, flag_values[key]));
  }
  bool paper_scale = false;
  CLI::Option* paper_opt =
      curve->add_flag("--paper-scale", paper_scale, "1000 channels x 500 packets x 2000 symbols");

  CLI::App* analytics = app.add_subcommand("analytics", "Closed-form per-stream SINR for one channel");
  std::string matrix;
  double esn0_db = 10.0;
  double sigma_e2 = 0.0;
  std::size_t ml_ntr = 0;
  double es = 1.0;
  analytics->add_option("--matrix", matrix, "channel rows separated by ';', entries by ','")->required();
  analytics->add_option("--esn0-db", esn0_db, "per-antenna Es/N0 in dB")->required();
  CLI::Option* s2_opt = analytics->add_option("--sigma-e2", sigma_e2, "estimation error variance");
  analytics->add_option("--ml-ntr", ml_ntr, "derive sigma_e2 from ML training of this length")
      ->excludes(s2_opt);
  analytics->add_option("--es", es, "symbol energy per transmit antenna");

  CLI::App* validate = app.add_subcommand("validate", "Run Monte Carlo self-checks");
  std::uint64_t validate_seed = 2024;
  validate->add_option("--seed", validate_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (curve->parsed()) {
      KeyValues kv;
      if (!config_path.empty()) kv = read_config_file(config_path);
      for (const auto& [key, opt] : curve_opts) {
        if (opt->count() > 0) kv[key] = flag_values[key];
      }
      if (paper_opt->count() > 0) kv["paper-scale"] = paper_scale ? "true" : "false";
      return run_curve_command(kv, out, err);
    }
    if (analytics->parsed()) {
      return run_analytics_command(matrix, esn0_db, sigma_e2, ml_ntr, es, out);
    }
    if (validate->parsed()) return run_validate_command(validate_seed, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace mimo::cli
