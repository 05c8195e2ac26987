#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mimo_ppsnr/sim.hpp"

namespace mimo::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Bad configuration; the message names the offending key or value.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Preset { kFig1Bpsk, kFig2Qam16, kFig3QpskFloor, kCustom };

std::string_view to_string(Preset p) noexcept;
/// Accepts the full names and the short forms fig1, fig2, fig3.
Preset parse_preset(std::string_view name);

/// Link configurations reproducing one figure at desk scale.
///   fig1-bpsk / fig2-qam16: {1x4, 2x4, 4x4} x {ML training, perfect CSI},
///                           n_tr = 4, Eb/N0 0..20 dB step 2
///   fig3-qpsk-floor:        4x5 QPSK, fixed sigma_e in {0, 0.05, 0.10, 0.20},
///                           Eb/N0 0..40 dB step 2
std::vector<LinkConfig> preset_configs(Preset p);

/// Flat key=value settings; keys are the long flag names without dashes.
using KeyValues = std::map<std::string, std::string>;

/// Every key accepted in a config file or as a `curve` flag.
const std::vector<std::string>& known_keys();

/// Parses key=value lines. Blank lines and lines starting with '#' are
/// skipped. Throws ConfigError for malformed lines and unknown keys.
KeyValues parse_key_values(std::istream& in, const std::string& source);
KeyValues read_config_file(const std::string& path);

struct Experiment {
  Preset preset = Preset::kCustom;
  std::vector<LinkConfig> configs;
  std::string out_path;  ///< empty: CSV to stdout
  unsigned threads = 0;
};

/// Builds and validates an experiment. Throws ConfigError.
Experiment resolve_experiment(const KeyValues& kv);

struct CurveResult {
  LinkConfig config;
  std::vector<BerCurvePoint> points;
};

std::vector<CurveResult> run_experiment(const Experiment& exp);

/// CSV with a '#' comment block recording version, resolved configs and
/// seed. Locale independent; dB values carry four decimals.
void write_csv(std::ostream& out, const Experiment& exp, const std::vector<CurveResult>& results);
void write_summary(std::ostream& out, const std::vector<CurveResult>& results);

/// Parses "a,b;c,d" (rows split by ';', entries by ',') where each entry is
/// a real or complex literal such as 1, -0.5j, 0.3-1.2j.
CMat parse_matrix(std::string_view text);

/// Entry point shared by the executable and the tests. Returns the process
/// exit status.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mimo::cli
