#pragma once

#include <vector>

namespace splitree {

// One jump of a slope -1 path. Levels are stored explicitly so that visits of
// a level and under/overshoots are read off without re-summing path time.
struct PathEvent {
  double gap = 0.0;   // path time since the previous event (or since time 0)
  double from = 0.0;  // left limit at the jump
  double to = 0.0;    // value just after the jump
  double raw = 0.0;   // value before truncation or reflection (a date of death); equals `to` otherwise
};

// Cadlag piecewise-linear path with slope -1 between positive jumps. Used for
// truncated contour processes, excursions of the Levy process and their
// rearrangements. The path starts with a (possibly trivial) jump at time 0
// from `start_from` to `start`, then runs through `events`, then descends for
// `tail` units of time to the terminal value `end`.
struct JccpPath {
  double start_from = 0.0;
  double start = 0.0;
  double start_raw = 0.0;
  std::vector<PathEvent> events;
  double tail = 0.0;
  double end = 0.0;

  auto lifetime() const -> double;
  // Infimum over left limits and the terminal value, and the (first) time it is attained.
  struct Minimum {
    double value;
    double time;
    // index of the event whose left limit attains the minimum; events.size() for the terminal time
    std::size_t event;
    bool unique;
  };
  auto minimum() const -> Minimum;

  // Throws Errc::integrity if levels and gaps disagree by more than tol or a jump is not upward.
  void check_integrity(double tol = 1e-9) const;
};

// Split of a truncated contour at level t: the pre-first-visit piece w_0 and
// the pieces between consecutive visits of t. Piece i < n ends with the jump
// that crosses t, kept untruncated (its terminal value is a date of death).
struct ContourDecomposition {
  struct Crossing {
    double age;       // t - left limit at the crossing jump
    double residual;  // untruncated value - t
  };
  std::vector<JccpPath> pieces;
  std::vector<Crossing> crossings;  // one per visit of t, in contour order
  auto visits() const -> std::size_t { return crossings.size(); }
};

auto decompose_contour(const JccpPath& path, double t) -> ContourDecomposition;

// Path read as a function: value at time s (right-continuous).
auto path_value(const JccpPath& path, double s) -> double;

}  // namespace splitree
