#include "splitree/levy_path.hpp"

#include <algorithm>
#include <cmath>

#include "splitree/error.hpp"

namespace splitree {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

auto default_cap(const LifespanMeasure& measure) -> double {
  // a lifetime law with almost all mass at +inf has a tiny finite mean; the mean gap 1/b bounds it below
  double mean = measure.lifetime().finite_mean();
  double b = measure.birth_rate();
  double unit = std::max(mean, b > 0 ? 1.0 / b : 0.0);
  return excursion_cap_lifetimes * (unit > 0 ? unit : 1.0);
}

void record_minimum(Excursion& e) {
  auto m = e.path.minimum();
  e.infimum = m.value;
  e.argmin_time = m.time;
  e.argmin_event = m.event;
}

}  // namespace

auto sample_excursion_until(const LifespanMeasure& measure, Rng& rng, double censor_time, double cap)
    -> Excursion {
  if (cap <= 0) cap = default_cap(measure);
  const double b = measure.birth_rate();
  const double stop = std::min(censor_time, cap);
  Excursion e;
  double clock = 0.0, level = 0.0;
  for (;;) {
    double gap = b > 0 ? draw_exponential(rng, b) : inf;
    if (clock + gap >= stop) {
      e.end = censor_time <= cap ? ExcursionEnd::censored : ExcursionEnd::capped;
      e.path.tail = stop - clock;
      e.path.end = level - e.path.tail;
      e.lifetime = stop;
      break;
    }
    clock += gap;
    double from = level - gap;
    double size = measure.lifetime().sample(rng);
    double to = from + size;
    e.path.events.push_back({gap, from, to, to});
    level = to;
    if (to > 0) {
      e.end = ExcursionEnd::crossed;
      e.infinite_jump = std::isinf(size);
      e.undershoot = -from;
      e.overshoot = to;
      e.path.end = to;
      e.lifetime = clock;
      break;
    }
  }
  record_minimum(e);
  return e;
}

auto sample_excursion(const LifespanMeasure& measure, Rng& rng, std::optional<double> delta, double cap)
    -> Excursion {
  double censor = inf;
  if (delta) {
    require(*delta > 0, Errc::config, "censoring clock rate must be positive");
    censor = draw_exponential(rng, *delta);
  }
  return sample_excursion_until(measure, rng, censor, cap);
}

auto build_killed_reflected(const LifespanMeasure& measure, double delta, Rng& rng) -> KilledReflectedPath {
  require(delta > 0, Errc::config, "clock rate must be positive");
  KilledReflectedPath out;
  out.clock = draw_exponential(rng, delta);
  double used = 0.0;
  for (;;) {
    // e is finite, so the censor always stops the loop; the cap is never the binding constraint
    auto e = sample_excursion_until(measure, rng, out.clock - used, inf);
    if (!e.crossed()) break;
    used += e.lifetime;
    out.I_M = std::min(out.I_M, e.infimum);
    const auto& ev = e.path.events;
    for (std::size_t i = 0; i + 1 < ev.size(); ++i) out.Y.events.push_back(ev[i]);
    const auto& last = ev.back();
    out.Y.events.push_back({last.gap, last.from, 0.0, last.raw});
    out.excursions.push_back(std::move(e));
  }
  out.M = out.excursions.size();
  return out;
}

auto shift_levels(const JccpPath& path, double c) -> JccpPath {
  JccpPath out = path;
  out.start_from += c;
  out.start += c;
  out.start_raw += c;
  out.end += c;
  for (auto& e : out.events) {
    e.from += c;
    e.to += c;
    e.raw += c;
  }
  return out;
}

auto vervaat_transform(const JccpPath& z) -> JccpPath {
  double V = z.lifetime();
  require(std::isfinite(V), Errc::domain, "Vervaat transform needs a finite lifetime");
  auto m = z.minimum();
  if (!m.unique) fail(Errc::ambiguity, "infimum attained at more than one time");
  const double I = m.value;
  if (m.event == z.events.size()) {
    // infimum at the terminal time: Z' = Z - I
    auto out = shift_levels(z, -I);
    out.end = 0.0;
    return out;
  }

  JccpPath out;
  const auto& k = z.events[m.event];
  out.start_from = k.from - I;
  out.start = k.to - I;
  out.start_raw = k.raw - I;
  for (std::size_t i = m.event + 1; i < z.events.size(); ++i) {
    auto e = z.events[i];
    out.events.push_back({e.gap, e.from - I, e.to - I, e.raw - I});
  }
  double carry = z.tail;
  if (z.end != z.start) {
    out.events.push_back({carry, z.end - I, z.start - I, z.start_raw - I});
    carry = 0.0;
  }
  for (std::size_t i = 0; i < m.event; ++i) {
    auto e = z.events[i];
    out.events.push_back({e.gap + carry, e.from - I, e.to - I, e.raw - I});
    carry = 0.0;
  }
  out.tail = k.gap + carry;
  out.end = 0.0;
  return out;
}

auto split_at_min(const Excursion& e) -> std::pair<JccpPath, JccpPath> {
  require(std::isfinite(e.infimum), Errc::domain, "excursion has no finite infimum");
  const auto& p = e.path;
  JccpPath left, right;
  left.start_from = p.start_from;
  left.start = p.start;
  left.start_raw = p.start_raw;
  if (e.argmin_event == p.events.size()) {
    left.events = p.events;
    left.tail = p.tail;
    left.end = p.end;
    right.start_from = right.start = right.start_raw = right.end = p.end;
    return {left, right};
  }
  const auto& k = p.events[e.argmin_event];
  left.events.assign(p.events.begin(), p.events.begin() + static_cast<std::ptrdiff_t>(e.argmin_event));
  left.tail = k.gap;
  left.end = k.from;
  right.start_from = k.from;
  right.start = k.to;
  right.start_raw = k.raw;
  right.events.assign(p.events.begin() + static_cast<std::ptrdiff_t>(e.argmin_event) + 1, p.events.end());
  right.tail = p.tail;
  right.end = p.end;
  return {left, right};
}

}  // namespace splitree
