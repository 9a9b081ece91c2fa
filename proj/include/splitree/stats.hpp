#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace splitree::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df = 0.0;  // chi-square tests only
};

// P(K > lambda) for the Kolmogorov distribution.
auto kolmogorov_q(double lambda) -> double;

auto ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) -> TestResult;
auto ks_two_sample(std::vector<double> a, std::vector<double> b) -> TestResult;

// Goodness of fit of counts to probabilities. Bins are merged left to right
// until every merged bin expects at least `min_expected`. `probs` need not sum
// to one: the remainder is a final bin with observed count total - sum(counts).
auto chi_square_gof(std::span<const double> counts, std::span<const double> probs, double total,
                    double min_expected = 5.0) -> TestResult;

// Homogeneity of two count vectors over the same categories, with the same merging.
auto chi_square_two_sample(std::span<const double> a, std::span<const double> b,
                           double min_expected = 5.0) -> TestResult;

auto chi_square_sf(double x, double df) -> double;

auto pearson(std::span<const double> x, std::span<const double> y) -> double;

// Permutation test for a trend in `values` against their index (|Pearson r|
// as statistic), `rounds` random relabelings.
auto index_trend_test(std::span<const double> values, std::uint64_t seed, int rounds = 999) -> TestResult;

struct Summary {
  double mean;
  double sd;
};
auto summarize(std::span<const double> x) -> Summary;

// |observed - expected| in units of the binomial standard error over n draws.
auto binomial_z(double successes, double n, double p) -> double;

}  // namespace splitree::stats
