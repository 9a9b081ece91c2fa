#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "splitree/jccp.hpp"
#include "splitree/levy_core.hpp"
#include "splitree/rng.hpp"

namespace splitree {

inline constexpr std::size_t no_parent = static_cast<std::size_t>(-1);

struct Individual {
  std::size_t parent = no_parent;
  double birth = 0.0;
  double death = 0.0;  // may be +inf
  double ring = std::numeric_limits<double>::infinity();
  double mark = std::numeric_limits<double>::quiet_NaN();  // pre-infection stay U in epidemic mode
  std::vector<std::size_t> children;  // in birth order
};

// Individuals are stored in order of birth; index 0 is the progenitor.
struct SplitTree {
  std::vector<Individual> individuals;

  // Number of individuals with birth < t <= death.
  auto alive_count(double t) const -> std::size_t;
};

enum class RunStatus { detected, extinct, horizon, capped };

auto run_status_name(RunStatus s) -> const char*;

struct Carrier {
  double age = 0.0;       // A = T - birth
  double residual = 0.0;  // R = death - T
  double stay = std::numeric_limits<double>::quiet_NaN();  // U, epidemic mode only
};

struct DetectionOutcome {
  RunStatus status = RunStatus::extinct;
  double T = std::numeric_limits<double>::infinity();
  std::vector<Carrier> carriers;  // uniformly shuffled

  auto detected() const -> bool { return status == RunStatus::detected; }
  auto N_T() const -> std::size_t { return carriers.size(); }
};

struct SimCaps {
  std::size_t max_individuals = 10'000'000;
  double max_time = 1e6;
  // Events later than this are not processed (status horizon). Used to grow
  // a tree up to a fixed time t without waiting for extinction.
  double horizon = std::numeric_limits<double>::infinity();
};

// Draws (lifetime, mark). The default draws from the measure's lifetime law
// with a NaN mark; epidemic mode draws (V, U) from the size-biased stay law.
using LifetimeDraw = std::function<std::pair<double, double>(Rng&)>;

struct TreeModel {
  LifespanMeasure measure;
  double delta = 0.0;  // clock rate; 0 disables detection
  LifetimeDraw draw;   // optional

  TreeModel(LifespanMeasure m, double d, LifetimeDraw f = {});
};

struct TreeRun {
  SplitTree tree;
  DetectionOutcome outcome;
};

auto simulate_tree(const TreeModel& model, Rng& rng, const SimCaps& caps = {}) -> TreeRun;

// Truncated jumping chronological contour at level t: starts at root death
// ^ t, each daughter born before t causes a jump from its birth time to its
// death ^ t, daughters of an individual are visited youngest first, and the
// path ends at 0.
auto contour(const SplitTree& tree, double t) -> JccpPath;

// Ages and residual lifetimes at t of the individuals with birth < t <= death, in birth order.
auto alive_at(const SplitTree& tree, double t) -> std::vector<Carrier>;

// Runs `reps` independent trees; replicate i uses replicate_rng(seed, i).
// Outcomes are returned in replicate order whatever the worker count.
auto run_replicates(const TreeModel& model, std::size_t reps, std::uint64_t seed, unsigned workers,
                    const SimCaps& caps = {}) -> std::vector<DetectionOutcome>;

}  // namespace splitree
