#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splitree/levy_core.hpp"

namespace splitree {

// One statistical or exact check. For tests, `passed` means p_value > alpha;
// for exact checks p_value is NaN and statistic counts mismatches.
struct Check {
  std::string name;
  std::string method;
  double statistic = 0.0;
  double p_value = 0.0;
  double alpha = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::string battery;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::vector<Check> checks;

  auto passed() const -> bool;
};

struct VerifyOptions {
  std::size_t reps = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  double alpha = 0.01;
  std::optional<double> h;
  std::optional<double> x_max;
};

// Tree side (N_T, T | T < inf) against the killed reflected Levy side
// (M, -I_M | M != 0), plus the Vervaat round trip through the contour.
auto verify_vervaat(const LifespanMeasure& measure, double delta, const VerifyOptions& opt) -> VerifyReport;

// Simulated trees against the analytic laws: N_T, cdf of T, ages and
// residuals (y = inf and a finite window), fixed-time extinction.
auto verify_laws(const LifespanMeasure& measure, double delta, const VerifyOptions& opt) -> VerifyReport;

}  // namespace splitree
