#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "splitree/error.hpp"
#include "splitree/stats.hpp"
#include "splitree/tree_sim.hpp"

namespace splitree {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

auto reference_model(double delta = 0.3) -> TreeModel {
  return TreeModel(LifespanMeasure(0.8, LifetimeDistribution::exponential(1.0)), delta);
}

auto sorted_pairs(std::vector<Carrier> v) -> std::vector<std::pair<double, double>> {
  std::vector<std::pair<double, double>> out;
  for (const auto& c : v) out.emplace_back(c.age, c.residual);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Contour, ChildlessRoot) {
  SplitTree tree;
  tree.individuals.push_back({no_parent, 0.0, 1.5, inf, 0.0, {}});
  auto path = contour(tree, 4.0);
  EXPECT_EQ(path.start, 1.5);
  EXPECT_TRUE(path.events.empty());
  EXPECT_EQ(path.lifetime(), 1.5);
  EXPECT_EQ(path_value(path, 0.5), 1.0);
  auto d = decompose_contour(path, 4.0);
  EXPECT_EQ(d.visits(), 0u);
  ASSERT_EQ(d.pieces.size(), 1u);
  EXPECT_EQ(d.pieces[0].lifetime(), 1.5);
}

TEST(Contour, HandBuiltTree) {
  // root (0, 5) with daughters born at 1 and 3; the one born at 1 has a daughter at 2
  SplitTree tree;
  tree.individuals = {
      {no_parent, 0.0, 5.0, inf, 0.0, {1, 2}},
      {0, 1.0, 4.0, inf, 0.0, {3}},
      {0, 3.0, 3.5, inf, 0.0, {}},
      {1, 2.0, 2.5, inf, 0.0, {}},
  };
  auto path = contour(tree, 4.0);
  path.check_integrity();
  EXPECT_EQ(path.start, 4.0);
  ASSERT_EQ(path.events.size(), 3u);
  // youngest daughter of the root first
  EXPECT_EQ(path.events[0].from, 3.0);
  EXPECT_EQ(path.events[0].to, 3.5);
  EXPECT_EQ(path.events[1].from, 1.0);
  EXPECT_EQ(path.events[1].to, 4.0);
  EXPECT_EQ(path.events[1].raw, 4.0);
  EXPECT_EQ(path.events[2].from, 2.0);
  EXPECT_EQ(path.lifetime(), 4.0 + 0.5 + 3.0 + 0.5);
  auto d = decompose_contour(path, 4.0);
  EXPECT_EQ(d.visits(), tree.alive_count(4.0));
  EXPECT_EQ(d.visits(), 2u);
  EXPECT_EQ(d.crossings[0].age, 4.0);
  EXPECT_EQ(d.crossings[0].residual, 1.0);
  EXPECT_EQ(d.crossings[1].age, 3.0);
  EXPECT_EQ(d.crossings[1].residual, 0.0);
}

TEST(Contour, BijectionOverRandomTrees) {
  for (double b : {0.8, 1.3}) {
    TreeModel model(LifespanMeasure(b, LifetimeDistribution::exponential(1.0)), 0.0);
    SimCaps caps;
    caps.horizon = 2.0;
    std::size_t mismatches = 0;
    for (std::uint64_t rep = 0; rep < 2000; ++rep) {
      auto rng = replicate_rng(11, rep);
      auto run = simulate_tree(model, rng, caps);
      for (double t : {0.5, 1.0, 2.0}) {
        auto path = contour(run.tree, t);
        path.check_integrity();
        double expected_v = 0.0;
        for (const auto& ind : run.tree.individuals) {
          if (ind.birth < t) expected_v += std::min(ind.death, t) - ind.birth;
        }
        EXPECT_NEAR(path.lifetime(), expected_v, 1e-9 * (1 + expected_v));
        auto d = decompose_contour(path, t);
        ASSERT_EQ(d.pieces.size(), d.visits() + 1);
        double total = 0.0;
        for (const auto& p : d.pieces) total += p.lifetime();
        EXPECT_NEAR(total, path.lifetime(), 1e-9 * (1 + total));
        std::vector<Carrier> found;
        for (const auto& c : d.crossings) found.push_back({c.age, c.residual});
        if (d.visits() != run.tree.alive_count(t) || sorted_pairs(found) != sorted_pairs(alive_at(run.tree, t))) {
          ++mismatches;
        }
      }
    }
    EXPECT_EQ(mismatches, 0u) << "b=" << b;
  }
}

TEST(Decompose, RejectsMalformedPaths) {
  JccpPath p;
  p.start = 1.0;
  p.events.push_back({2.0, -1.0, 0.5, 0.5});
  p.tail = 0.5;
  EXPECT_THROW(decompose_contour(p, 2.0), Error);
  JccpPath q;
  q.start = 3.0;
  q.tail = 3.0;
  EXPECT_THROW(decompose_contour(q, 2.0), Error);
}

TEST(TreeSim, HugeClockRateDetectsRootAlone) {
  auto model = reference_model(1e6);
  auto out = run_replicates(model, 10000, 5, 0);
  std::size_t single = 0;
  for (const auto& o : out) single += (o.detected() && o.N_T() == 1);
  EXPECT_GE(single / 1e4, 0.999);
}

TEST(TreeSim, DetectionFrequencyAndGeometricSize) {
  const std::size_t reps = 100000;
  auto out = run_replicates(reference_model(), reps, 2024, 0);
  double detected = 0;
  std::vector<double> counts(30, 0.0), probs(30, 0.0);
  for (const auto& o : out) {
    if (!o.detected()) {
      EXPECT_TRUE(std::isinf(o.T));
      continue;
    }
    ++detected;
    ASSERT_GE(o.N_T(), 1u);
    for (const auto& c : o.carriers) {
      EXPECT_GE(c.age, 0.0);
      EXPECT_GT(c.residual, 0.0);
    }
    if (o.N_T() <= counts.size()) counts[o.N_T() - 1] += 1;
  }
  EXPECT_LE(stats::binomial_z(detected, reps, 0.375), 3.0);
  for (std::size_t n = 1; n <= probs.size(); ++n) probs[n - 1] = std::pow(0.5, static_cast<double>(n));
  auto chi = stats::chi_square_gof(counts, probs, detected);
  EXPECT_GT(chi.p_value, 0.01) << chi.statistic;
}

TEST(TreeSim, ResultsIndependentOfWorkerCount) {
  auto model = reference_model();
  auto a = run_replicates(model, 500, 99, 1);
  auto b = run_replicates(model, 500, 99, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].status, b[i].status);
    EXPECT_EQ(a[i].T, b[i].T);
    ASSERT_EQ(a[i].N_T(), b[i].N_T());
    for (std::size_t k = 0; k < a[i].N_T(); ++k) EXPECT_EQ(a[i].carriers[k].age, b[i].carriers[k].age);
  }
}

TEST(TreeSim, CapsAbortWithDistinctStatus) {
  TreeModel model(LifespanMeasure(3.0, LifetimeDistribution::exponential(1.0)), 1e-9);
  SimCaps caps;
  caps.max_individuals = 50;
  std::size_t capped = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    auto rng = replicate_rng(3, rep);
    auto run = simulate_tree(model, rng, caps);
    if (run.outcome.status == RunStatus::capped) {
      ++capped;
      EXPECT_LE(run.tree.individuals.size(), 50u);
    }
  }
  EXPECT_GT(capped, 0u);
  EXPECT_STREQ(run_status_name(RunStatus::capped), "capped");
}

TEST(TreeSim, ImmortalIndividualsCostFiniteWork) {
  // a third of lifetimes are infinite; births are generated lazily up to the horizon
  TreeModel model(LifespanMeasure(0.5, LifetimeDistribution::exponential(1.0, 1.0 / 3)), 0.0);
  SimCaps caps;
  caps.horizon = 5.0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    auto rng = replicate_rng(8, rep);
    auto run = simulate_tree(model, rng, caps);
    EXPECT_NE(run.outcome.status, RunStatus::capped);
    auto path = contour(run.tree, 5.0);
    auto d = decompose_contour(path, 5.0);
    EXPECT_EQ(d.visits(), run.tree.alive_count(5.0));
  }
}

TEST(TreeSim, HorizonStopsBeforeDetection) {
  auto model = reference_model();
  SimCaps caps;
  caps.horizon = 1e-6;
  auto rng = replicate_rng(1, 0);
  auto run = simulate_tree(model, rng, caps);
  EXPECT_TRUE(run.outcome.status == RunStatus::horizon || run.outcome.status == RunStatus::extinct);
}

}  // namespace
}  // namespace splitree
