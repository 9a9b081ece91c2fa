#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "splitree/jccp.hpp"
#include "splitree/levy_core.hpp"
#include "splitree/rng.hpp"

namespace splitree {

enum class ExcursionEnd {
  crossed,   // jumped into (0, +inf]
  censored,  // the exponential clock rang first
  capped,    // no censor and the path-time cap was reached
};

// Path of X started at 0, slope -1 with jumps of law pi, stopped on entering
// (0, +inf]. A crossed excursion ends with its crossing jump (tail 0, end =
// overshoot); a censored one ends with a descent to the censoring time.
struct Excursion {
  JccpPath path;
  ExcursionEnd end = ExcursionEnd::censored;
  bool infinite_jump = false;  // crossed by a jump of infinite size
  double lifetime = 0.0;
  double infimum = 0.0;
  double argmin_time = 0.0;
  std::size_t argmin_event = 0;  // index into path.events; events.size() for the terminal time
  double undershoot = std::numeric_limits<double>::quiet_NaN();
  double overshoot = std::numeric_limits<double>::quiet_NaN();

  auto crossed() const -> bool { return end == ExcursionEnd::crossed; }
};

// Default path-time cap without a censor, in units of max(finite mean lifetime, 1 / b).
inline constexpr double excursion_cap_lifetimes = 1e4;

// Censored by an exponential(delta) clock when delta is given; otherwise by
// the path-time cap (end = capped).
auto sample_excursion(const LifespanMeasure& measure, Rng& rng, std::optional<double> delta,
                      double cap = -1.0) -> Excursion;

// Same with an explicit censoring time (may be +inf, then `cap` applies).
auto sample_excursion_until(const LifespanMeasure& measure, Rng& rng, double censor_time,
                            double cap = -1.0) -> Excursion;

struct KilledReflectedPath {
  std::vector<Excursion> excursions;  // the M completed excursions
  std::size_t M = 0;
  double I_M = 0.0;   // infimum of Y_M (0 when M = 0)
  double clock = 0.0; // the exponential time e
  JccpPath Y;         // Y_M: concatenation, terminal jumps reflected to 0
};

auto build_killed_reflected(const LifespanMeasure& measure, double delta, Rng& rng) -> KilledReflectedPath;

// Z'(s) = Z(s + H mod V) - I with Z'(V) = 0. Throws Errc::ambiguity when the
// infimum over left limits is attained twice.
auto vervaat_transform(const JccpPath& z) -> JccpPath;

// Pre-minimum piece (ending at the infimum) and post-minimum piece (starting
// with the jump from the infimum). The latter is a one-point path when the
// minimum is the left limit of the crossing jump.
auto split_at_min(const Excursion& e) -> std::pair<JccpPath, JccpPath>;

// Shifts every level of the path by c.
auto shift_levels(const JccpPath& path, double c) -> JccpPath;

}  // namespace splitree
