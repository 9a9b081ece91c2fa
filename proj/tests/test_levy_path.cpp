#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "splitree/error.hpp"
#include "splitree/levy_path.hpp"
#include "splitree/stats.hpp"
#include "splitree/tree_sim.hpp"

namespace splitree {
namespace {

auto reference_measure() -> LifespanMeasure {
  return LifespanMeasure(0.8, LifetimeDistribution::exponential(1.0));
}

// 0 -> descend 1 -> jump to 0.5 -> descend 2 -> jump to 1 -> descend 1.5
auto sample_path() -> JccpPath {
  JccpPath z;
  z.events.push_back({1.0, -1.0, 0.5, 0.5});
  z.events.push_back({2.0, -1.5, 1.0, 1.0});
  z.tail = 1.5;
  z.end = -0.5;
  return z;
}

void expect_vervaat_definition(const JccpPath& z, const JccpPath& zp) {
  auto m = z.minimum();
  double V = z.lifetime(), H = m.time, I = m.value;
  EXPECT_NEAR(zp.lifetime(), V, 1e-12 * (1 + V));
  EXPECT_EQ(zp.end, 0.0);
  for (int k = 0; k < 200; ++k) {
    double s = V * (k + 0.37) / 200.0;
    double expected = path_value(z, std::fmod(s + H, V)) - I;
    EXPECT_NEAR(path_value(zp, s), expected, 1e-10) << s;
    // inverse shift by V - H, then re-add I
    EXPECT_NEAR(path_value(zp, std::fmod(s + V - H, V)) + I, path_value(z, s), 1e-10) << s;
  }
}

TEST(Excursion, SingleJumpCrossing) {
  LifespanMeasure m(1.0, LifetimeDistribution::point_mass(5.0));
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    auto rng = replicate_rng(4, rep);
    auto e = sample_excursion(m, rng, std::nullopt);
    if (e.path.events.size() != 1 || !e.crossed()) continue;
    double t1 = e.path.events[0].gap;
    EXPECT_EQ(e.undershoot, t1);
    EXPECT_EQ(e.overshoot, 5.0 - t1);
    EXPECT_EQ(e.lifetime, t1);
    EXPECT_EQ(e.infimum, -t1);
    auto [left, right] = split_at_min(e);
    EXPECT_EQ(left.lifetime(), t1);
    EXPECT_EQ(left.end, -t1);
    EXPECT_TRUE(right.events.empty());
    EXPECT_EQ(right.start, 5.0 - t1);
    EXPECT_EQ(right.lifetime(), 0.0);
  }
}

TEST(Excursion, CrossingFractionMatchesOneMinusG) {
  auto m = reference_measure();
  const int reps = 100000;
  double crossed = 0;
  for (int rep = 0; rep < reps; ++rep) {
    auto rng = replicate_rng(77, static_cast<std::uint64_t>(rep));
    crossed += sample_excursion(m, rng, 0.3).crossed();
  }
  EXPECT_LE(stats::binomial_z(crossed, reps, 0.5), 3.0);
}

TEST(Excursion, UndershootOvershootLaw) {
  auto m = reference_measure();
  std::vector<double> und, ove;
  for (std::uint64_t rep = 0; und.size() < 10000; ++rep) {
    auto rng = replicate_rng(78, rep);
    auto e = sample_excursion(m, rng, 0.3);
    if (!e.crossed()) continue;
    und.push_back(e.undershoot);
    ove.push_back(e.overshoot);
  }
  double bound = 1.36 / std::sqrt(10000.0);
  EXPECT_LT(stats::ks_one_sample(und, [](double x) { return 1 - std::exp(-1.6 * x); }).statistic, bound);
  EXPECT_LT(stats::ks_one_sample(ove, [](double x) { return 1 - std::exp(-x); }).statistic, bound);
}

TEST(Excursion, CapWithoutCensor) {
  // supercritical: with probability 1/2 + the excursion drifts to -inf (here slowly enough to hit the cap)
  LifespanMeasure m(0.5, LifetimeDistribution::exponential(1.0));
  std::size_t capped = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    auto rng = replicate_rng(5, rep);
    auto e = sample_excursion(m, rng, std::nullopt, 50.0);
    if (e.end == ExcursionEnd::capped) {
      ++capped;
      EXPECT_EQ(e.lifetime, 50.0);
    }
  }
  EXPECT_GT(capped, 0u);
}

TEST(Excursion, InfiniteJumpCountsAsCrossing) {
  LifespanMeasure m(1.0, LifetimeDistribution::table({100.0}, {1.0 - 1e-9}));
  auto rng = replicate_rng(6, 0);
  auto e = sample_excursion(m, rng, std::nullopt);
  ASSERT_TRUE(e.crossed());
  EXPECT_TRUE(e.infinite_jump);
  EXPECT_TRUE(std::isinf(e.overshoot));
}

TEST(KilledReflected, GeometricNumberOfExcursions) {
  auto m = reference_measure();
  const int reps = 100000;
  std::vector<double> counts(25, 0.0), probs(25, 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    auto rng = replicate_rng(12, static_cast<std::uint64_t>(rep));
    auto y = build_killed_reflected(m, 0.3, rng);
    if (y.M < counts.size()) counts[y.M] += 1;
    EXPECT_EQ(y.Y.end, 0.0);
    if (y.M > 0) {
      EXPECT_LE(y.I_M, 0.0);
      EXPECT_EQ(y.Y.minimum().value, y.I_M);
    }
  }
  for (std::size_t n = 0; n < probs.size(); ++n) probs[n] = std::pow(0.5, static_cast<double>(n + 1));
  auto chi = stats::chi_square_gof(counts, probs, reps);
  EXPECT_GT(chi.p_value, 0.01) << chi.statistic;
}

TEST(KilledReflected, ExcursionsHaveNoIndexTrend) {
  auto m = reference_measure();
  std::vector<double> V, J, U, O;
  for (std::uint64_t rep = 0; V.size() < 4000; ++rep) {
    auto rng = replicate_rng(13, rep);
    auto y = build_killed_reflected(m, 0.3, rng);
    for (const auto& e : y.excursions) {
      V.push_back(e.lifetime);
      J.push_back(e.infimum);
      U.push_back(e.undershoot);
      O.push_back(e.overshoot);
    }
  }
  for (const auto* s : {&V, &J, &U, &O}) {
    EXPECT_GT(stats::index_trend_test(*s, 1, 999).p_value, 0.01);
  }
}

TEST(Vervaat, HandPath) {
  auto z = sample_path();
  z.check_integrity();
  auto m = z.minimum();
  EXPECT_EQ(m.value, -1.5);
  EXPECT_EQ(m.time, 3.0);
  auto zp = vervaat_transform(z);
  zp.check_integrity();
  EXPECT_EQ(zp.start_from, 0.0);
  EXPECT_EQ(zp.start, 2.5);
  expect_vervaat_definition(z, zp);
}

TEST(Vervaat, MinimumAtTerminalTime) {
  JccpPath z;
  z.events.push_back({1.0, -1.0, -0.5, -0.5});
  z.tail = 2.0;
  z.end = -2.5;
  auto zp = vervaat_transform(z);
  EXPECT_EQ(zp.start, 2.5);
  EXPECT_EQ(zp.events[0].from, 1.5);
  EXPECT_EQ(zp.end, 0.0);
  EXPECT_EQ(zp.lifetime(), z.lifetime());
}

TEST(Vervaat, TiedMinimumIsAmbiguous) {
  JccpPath z;
  z.events.push_back({1.0, -1.0, 0.0, 0.0});
  z.events.push_back({1.0, -1.0, 0.0, 0.0});
  try {
    vervaat_transform(z);
    FAIL() << "expected an ambiguity error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ambiguity);
  }
}

TEST(Vervaat, KilledReflectedPathsBecomeContours) {
  auto m = reference_measure();
  int checked = 0;
  for (std::uint64_t rep = 0; checked < 2000; ++rep) {
    auto rng = replicate_rng(21, rep);
    auto y = build_killed_reflected(m, 0.3, rng);
    if (y.M == 0) continue;
    ++checked;
    auto zp = vervaat_transform(y.Y);
    zp.check_integrity(1e-9);
    // positive before the end, 0 only at the endpoint
    EXPECT_GE(zp.start_from, 0.0);
    for (const auto& e : zp.events) EXPECT_GT(e.from, 0.0);
    if (zp.tail > 0) EXPECT_GT(zp.start, 0.0);
    EXPECT_NEAR(zp.lifetime(), y.Y.lifetime(), 1e-9);
    if (checked <= 50) expect_vervaat_definition(y.Y, zp);

    double t = -y.I_M;
    auto d = decompose_contour(zp, t);
    ASSERT_EQ(d.visits(), y.M);
    std::vector<double> ages, und;
    for (const auto& c : d.crossings) ages.push_back(c.age);
    for (const auto& e : y.excursions) und.push_back(e.undershoot);
    std::sort(ages.begin(), ages.end());
    std::sort(und.begin(), und.end());
    for (std::size_t i = 0; i < ages.size(); ++i) EXPECT_NEAR(ages[i], und[i], 1e-12 * (1 + t));
  }
}

TEST(SplitAtMin, ReassemblesExcursion) {
  auto m = reference_measure();
  for (std::uint64_t rep = 0; rep < 500; ++rep) {
    auto rng = replicate_rng(31, rep);
    auto e = sample_excursion(m, rng, 0.3);
    auto [left, right] = split_at_min(e);
    EXPECT_NEAR(left.lifetime() + right.lifetime(), e.lifetime, 1e-12 * (1 + e.lifetime));
    EXPECT_EQ(left.end, e.infimum);
    EXPECT_EQ(left.events.size() + right.events.size() + (e.argmin_event < e.path.events.size() ? 1u : 0u),
              e.path.events.size());
    if (e.argmin_event < e.path.events.size()) EXPECT_EQ(right.start_from, e.infimum);
  }
}

// P(N_T = n, T <= t0) from trees against (delta / b) E(prod e^{-delta V(eps_k)}; -I_n <= t0)
// from n censored excursions (the censors turn the product into an indicator).
TEST(ExcursionIdentity, NFoldExcursionsMatchTrees) {
  auto m = reference_measure();
  const std::size_t reps = 100000;
  auto trees = run_replicates(TreeModel(m, 0.3), reps, 41, 0);
  for (std::size_t n : {1u, 2u, 3u}) {
    for (double t0 : {1.0, 2.0}) {
      double hits_tree = 0;
      for (const auto& o : trees) hits_tree += (o.detected() && o.N_T() == n && o.T <= t0);
      double hits_exc = 0;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        auto rng = replicate_rng(42 + n, rep);
        bool ok = true;
        double inf_n = 0.0;
        for (std::size_t k = 0; k < n && ok; ++k) {
          auto e = sample_excursion(m, rng, 0.3);
          ok = e.crossed();
          inf_n = std::min(inf_n, e.infimum);
        }
        hits_exc += ok && -inf_n <= t0;
      }
      double c = 0.3 / 0.8;
      double p1 = hits_tree / reps, q = hits_exc / reps, p2 = c * q;
      double se = std::sqrt(p1 * (1 - p1) / reps + c * c * q * (1 - q) / reps);
      EXPECT_LE(std::abs(p1 - p2), 3 * se) << "n=" << n << " t0=" << t0;
    }
  }
}

}  // namespace
}  // namespace splitree
