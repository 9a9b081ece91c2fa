#include "splitree/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "splitree/error.hpp"
#include "splitree/laws.hpp"
#include "splitree/levy_path.hpp"
#include "splitree/parallel.hpp"
#include "splitree/stats.hpp"
#include "splitree/tree_sim.hpp"

namespace splitree {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t max_count_bin = 200;
// two-sided tail beyond 3 sigma
const double three_sigma = std::erfc(3.0 / std::sqrt(2.0));

auto z_check(std::string name, double successes, double n, double p, std::string detail) -> Check {
  double z = stats::binomial_z(successes, n, p);
  double pv = std::erfc(z / std::sqrt(2.0));
  std::ostringstream d;
  d << detail << "; empirical " << successes / n << " vs " << p;
  return {std::move(name), "binomial z (3 sigma)", z, pv, three_sigma, z <= 3.0, d.str()};
}

auto test_check(std::string name, std::string method, const stats::TestResult& r, double alpha,
                std::string detail = {}) -> Check {
  return {std::move(name), std::move(method), r.statistic, r.p_value, alpha, r.p_value > alpha, std::move(detail)};
}

void add_count(std::vector<double>& counts, std::size_t n) {
  if (counts.size() <= n) counts.resize(n + 1, 0.0);
  counts[n] += 1;
}

// cdf from cell masses, tabulated on a uniform grid up to the largest finite
// sample value and interpolated linearly; thin cells are never integrated
auto tabulated_cdf(const std::function<double(double, double)>& mass, const std::vector<double>& sample)
    -> std::function<double(double)> {
  double top = 0.0;
  for (double x : sample) {
    if (std::isfinite(x)) top = std::max(top, x);
  }
  const std::size_t n = 4000;
  std::vector<double> F(n + 1, 0.0);
  double h = top / static_cast<double>(n);
  for (std::size_t k = 1; k <= n && top > 0; ++k) {
    F[k] = F[k - 1] + mass(h * static_cast<double>(k - 1), h * static_cast<double>(k));
  }
  return [F = std::move(F), h, top](double x) {
    if (std::isinf(x)) return 1.0;
    if (x <= 0 || top <= 0) return 0.0;
    if (x >= top) return std::min(F.back(), 1.0);
    double u = x / h;
    auto k = std::min(static_cast<std::size_t>(u), F.size() - 2);
    double w = u - static_cast<double>(k);
    return std::min((1 - w) * F[k] + w * F[k + 1], 1.0);
  };
}

}  // namespace

auto VerifyReport::passed() const -> bool {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

auto verify_vervaat(const LifespanMeasure& measure, double delta, const VerifyOptions& opt) -> VerifyReport {
  require(delta > 0 && std::isfinite(delta), Errc::config, "delta must be positive");
  require(opt.reps > 0, Errc::config, "reps must be positive");
  VerifyReport report{"vervaat", opt.seed, opt.reps, {}};

  auto trees = run_replicates(TreeModel(measure, delta), opt.reps, opt.seed, opt.workers);
  std::vector<double> tree_counts, tree_T;
  for (const auto& o : trees) {
    if (!o.detected()) continue;
    add_count(tree_counts, std::min(o.N_T(), max_count_bin));
    tree_T.push_back(o.T);
  }

  struct LevySide {
    std::size_t M = 0;
    double depth = 0.0;
    bool mismatch = false;
    bool ambiguous = false;
  };
  std::vector<LevySide> levy(opt.reps);
  parallel_for(opt.reps, opt.workers, [&](std::size_t i) {
    auto rng = replicate_rng(opt.seed, i, 1);
    auto y = build_killed_reflected(measure, delta, rng);
    auto& out = levy[i];
    out.M = y.M;
    out.depth = -y.I_M;
    if (y.M == 0) return;
    try {
      auto zp = vervaat_transform(y.Y);
      auto d = decompose_contour(zp, out.depth);
      if (d.visits() != y.M) {
        out.mismatch = true;
        return;
      }
      std::vector<double> ages, und;
      for (const auto& c : d.crossings) ages.push_back(c.age);
      for (const auto& e : y.excursions) und.push_back(e.undershoot);
      std::sort(ages.begin(), ages.end());
      std::sort(und.begin(), und.end());
      for (std::size_t k = 0; k < ages.size(); ++k) {
        if (std::abs(ages[k] - und[k]) > 1e-9 * (1 + out.depth)) out.mismatch = true;
      }
    } catch (const Error& e) {
      if (e.code() != Errc::ambiguity) throw;
      out.ambiguous = true;
    }
  });
  std::vector<double> levy_counts, levy_depth;
  std::size_t mismatches = 0, ambiguous = 0, nonzero = 0;
  for (const auto& l : levy) {
    mismatches += l.mismatch;
    ambiguous += l.ambiguous;
    if (l.M == 0) continue;
    ++nonzero;
    add_count(levy_counts, std::min(l.M, max_count_bin));
    levy_depth.push_back(l.depth);
  }
  require(!tree_T.empty() && !levy_depth.empty(), Errc::empty, "no detections or no nonzero M; raise reps");

  std::size_t bins = std::max(tree_counts.size(), levy_counts.size());
  tree_counts.resize(bins, 0.0);
  levy_counts.resize(bins, 0.0);
  tree_counts.erase(tree_counts.begin());  // N_T >= 1 and M >= 1 here
  levy_counts.erase(levy_counts.begin());
  const double a = opt.alpha / 2;  // Bonferroni over the two marginals
  std::ostringstream sizes;
  sizes << tree_T.size() << " detected trees vs " << nonzero << " paths with M > 0";
  report.checks.push_back(test_check("N_T vs M", "two-sample chi-square (Bonferroni)",
                                     stats::chi_square_two_sample(tree_counts, levy_counts), a, sizes.str()));
  report.checks.push_back(
      test_check("T vs -I_M", "two-sample KS (Bonferroni)", stats::ks_two_sample(tree_T, levy_depth), a, sizes.str()));
  std::ostringstream m;
  m << "visits and ages of the Vervaat-transformed path at level -I_M; " << ambiguous << " tied minima skipped";
  report.checks.push_back({"Vervaat contour round trip", "exact", static_cast<double>(mismatches), nan, 0.0,
                           mismatches == 0, m.str()});
  return report;
}

auto verify_laws(const LifespanMeasure& measure, double delta, const VerifyOptions& opt) -> VerifyReport {
  require(delta > 0 && std::isfinite(delta), Errc::config, "delta must be positive");
  require(opt.reps > 0, Errc::config, "reps must be positive");
  VerifyReport report{"laws", opt.seed, opt.reps, {}};
  LaplaceExponent exponent(measure);
  DetectionLaw law(exponent, delta, opt.h, opt.x_max);
  const double reps = static_cast<double>(opt.reps);

  auto trees = run_replicates(TreeModel(measure, delta), opt.reps, opt.seed, opt.workers);
  double detected = 0;
  std::vector<double> counts(max_count_bin, 0.0), probs(max_count_bin, 0.0);
  for (const auto& o : trees) {
    if (!o.detected()) continue;
    ++detected;
    if (o.N_T() <= counts.size()) counts[o.N_T() - 1] += 1;
  }
  require(detected > 0, Errc::empty, "no tree was detected; raise reps");
  report.checks.push_back(z_check("P(T < inf)", detected, reps, law.p(), "(phi(delta) - delta) / b"));
  for (std::size_t n = 1; n <= probs.size(); ++n) probs[n - 1] = law.pmf_NT(n, true);
  report.checks.push_back(test_check("N_T | T < inf", "chi-square goodness of fit",
                                     stats::chi_square_gof(counts, probs, detected), opt.alpha,
                                     "geometric with ratio 1 - delta / phi(delta)"));

  for (double y : {0.5, 1.0, 2.0}) {
    double hits = 0;
    for (const auto& o : trees) hits += o.detected() && o.T < y;
    std::ostringstream name;
    name << "P(T < " << y << ")";
    report.checks.push_back(z_check(name.str(), hits, reps, law.cdf_T(y), "(delta / b)(1 - G(y)) / G(y)"));
  }

  // ages and residuals at y = inf from the first 1e4 carriers in replicate order
  std::vector<double> ages, residuals;
  for (const auto& o : trees) {
    for (const auto& c : o.carriers) {
      if (ages.size() >= 10000) break;
      ages.push_back(c.age);
      residuals.push_back(c.residual);
    }
  }
  report.checks.push_back(test_check(
      "ages at y = inf", "KS one-sample",
      stats::ks_one_sample(ages, tabulated_cdf([&](double a0, double a1) {
                             return law.age_residual_cell(inf, a0, a1, 0, inf);
                           }, ages)),
      opt.alpha));
  report.checks.push_back(test_check(
      "residuals at y = inf", "KS one-sample",
      stats::ks_one_sample(residuals, tabulated_cdf([&](double r0, double r1) {
                             return law.age_residual_cell(inf, 0, inf, r0, r1);
                           }, residuals)),
      opt.alpha));
  if (measure.lifetime().exponential_rate() && measure.mass_at_infinity() == 0) {
    double r = stats::pearson(ages, residuals);
    double z = std::abs(r) * std::sqrt(static_cast<double>(ages.size()));
    report.checks.push_back({"corr(A, R) at y = inf", "Pearson z (3 sigma)", z, std::erfc(z / std::sqrt(2.0)),
                             three_sigma, z <= 3.0, "independent for exponential lifetimes"});
  }

  // finite window y = 2: carriers of trees detected before y, binned
  const double y = 2.0;
  const std::vector<double> a_edges{0.0, 0.5, 1.0, 1.5, 2.0};
  const std::vector<double> r_edges{0.0, 0.3, 0.8, 1.6, inf};
  std::vector<double> cells((a_edges.size() - 1) * (r_edges.size() - 1), 0.0), cell_p(cells.size(), 0.0);
  double carriers = 0;
  for (const auto& o : trees) {
    if (!o.detected() || !(o.T < y)) continue;
    for (const auto& c : o.carriers) {
      auto ia = static_cast<std::size_t>(std::upper_bound(a_edges.begin(), a_edges.end(), c.age) - a_edges.begin()) - 1;
      auto ir = static_cast<std::size_t>(std::upper_bound(r_edges.begin(), r_edges.end(), c.residual) - r_edges.begin()) - 1;
      ia = std::min(ia, a_edges.size() - 2);
      ir = std::min(ir, r_edges.size() - 2);
      cells[ia * (r_edges.size() - 1) + ir] += 1;
      ++carriers;
    }
  }
  for (std::size_t i = 0; i + 1 < a_edges.size(); ++i) {
    for (std::size_t j = 0; j + 1 < r_edges.size(); ++j) {
      cell_p[i * (r_edges.size() - 1) + j] = law.age_residual_cell(y, a_edges[i], a_edges[i + 1], r_edges[j], r_edges[j + 1]);
    }
  }
  if (carriers > 0) {
    report.checks.push_back(test_check("(A, R) at y = 2", "binned 2-D chi-square",
                                       stats::chi_square_gof(cells, cell_p, carriers), opt.alpha));
  }

  // fixed time t = 1 without clocks
  const double t = 1.0;
  auto table = ScaleTable::build(exponent, 0.0, opt.h.value_or(default_scale_step),
                                 std::max(2 * t, opt.x_max.value_or(2 * t)));
  double p0 = fixed_time_law(table, t).pmf(0);
  SimCaps caps;
  caps.horizon = t;
  TreeModel plain(measure, 0.0);
  std::vector<std::uint8_t> extinct(opt.reps, 0);
  parallel_for(opt.reps, opt.workers, [&](std::size_t i) {
    auto rng = replicate_rng(opt.seed, i, 2);
    auto run = simulate_tree(plain, rng, caps);
    extinct[i] = run.tree.alive_count(t) == 0;
  });
  double zeros = 0;
  for (auto e : extinct) zeros += e;
  report.checks.push_back(z_check("P(N_1 = 0)", zeros, reps, p0, "int mu(ds) W(t - s) / W(t) at q = 0"));
  return report;
}

}  // namespace splitree
