#include "splitree/jccp.hpp"

#include <cmath>
#include <string>

#include "splitree/error.hpp"

namespace splitree {

auto JccpPath::lifetime() const -> double {
  double v = tail;
  for (const auto& e : events) v += e.gap;
  return v;
}

auto JccpPath::minimum() const -> Minimum {
  Minimum best{start, 0.0, events.size(), true};
  bool have = false;
  double clock = 0.0;
  auto offer = [&](double value, double time, std::size_t idx) {
    if (!have || value < best.value) {
      best = {value, time, idx, true};
      have = true;
    } else if (value == best.value) {
      best.unique = false;
    }
  };
  for (std::size_t i = 0; i < events.size(); ++i) {
    clock += events[i].gap;
    offer(events[i].from, clock, i);
  }
  if (tail > 0 || events.empty()) offer(tail > 0 ? end : start, clock + tail, events.size());
  return best;
}

void JccpPath::check_integrity(double tol) const {
  double level = start;
  auto bad = [](const std::string& what) { fail(Errc::integrity, "malformed path: " + what); };
  if (!(start >= start_from)) bad("initial jump is downward");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!(e.gap >= 0)) bad("negative gap at event " + std::to_string(i));
    if (std::abs(level - e.gap - e.from) > tol * (1 + std::abs(level))) {
      bad("slope mismatch before event " + std::to_string(i));
    }
    if (!(e.to > e.from)) bad("non-positive jump at event " + std::to_string(i));
    level = e.to;
  }
  if (!(tail >= 0)) bad("negative tail");
  if (tail > 0 || !events.empty()) {
    double expect = tail > 0 ? level - tail : level;
    if (std::abs(expect - end) > tol * (1 + std::abs(level))) bad("terminal value mismatch");
  }
}

auto path_value(const JccpPath& path, double s) -> double {
  double clock = 0.0, level = path.start;
  for (const auto& e : path.events) {
    if (s < clock + e.gap) return level - (s - clock);
    clock += e.gap;
    level = e.to;
  }
  if (s >= clock + path.tail) return path.end;
  return level - (s - clock);
}

auto decompose_contour(const JccpPath& path, double t) -> ContourDecomposition {
  require(t > 0, Errc::domain, "decomposition level must be positive");
  ContourDecomposition out;
  auto integrity = [](const std::string& what) { fail(Errc::integrity, "not a truncated contour: " + what); };
  if (path.start > t) integrity("starts above the truncation level");
  if (path.end < 0) integrity("ends below zero");

  JccpPath piece;
  std::size_t i = 0;
  if (path.start == t) {
    // progenitor alive at t: w_0 is the one-point path at its date of death
    piece.start_from = path.start_from;
    piece.start = piece.start_raw = piece.end = path.start_raw;
    out.pieces.push_back(piece);
    out.crossings.push_back({t - path.start_from, path.start_raw - t});
    piece = JccpPath{};
    piece.start_from = t;
    piece.start = piece.start_raw = t;
  } else {
    piece.start_from = path.start_from;
    piece.start = path.start;
    piece.start_raw = path.start_raw;
  }
  for (; i < path.events.size(); ++i) {
    const auto& e = path.events[i];
    if (e.from < 0) integrity("excursion below zero");
    if (e.to > t) integrity("jump above the truncation level");
    if (e.to == t) {
      piece.events.push_back({e.gap, e.from, e.raw, e.raw});
      piece.tail = 0.0;
      piece.end = e.raw;
      out.pieces.push_back(std::move(piece));
      out.crossings.push_back({t - e.from, e.raw - t});
      piece = JccpPath{};
      piece.start_from = t;
      piece.start = piece.start_raw = t;
    } else {
      piece.events.push_back(e);
    }
  }
  piece.tail = path.tail;
  piece.end = path.end;
  out.pieces.push_back(std::move(piece));
  return out;
}

}  // namespace splitree
