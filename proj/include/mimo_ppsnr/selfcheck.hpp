#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mimo {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick Monte Carlo cross-checks of the closed forms against brute-force
/// estimates, sized to finish in seconds. Backs `mimo_ppsnr validate`.
std::vector<CheckResult> run_self_checks(std::uint64_t seed = 2024);

}  // namespace mimo
