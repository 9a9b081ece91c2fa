#include "splitree/tree_sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "splitree/error.hpp"
#include "splitree/parallel.hpp"

namespace splitree {

namespace {

struct Event {
  double time;
  std::uint64_t seq;
  std::size_t who;
  bool ring;  // otherwise a birth by `who`
};

struct Later {
  auto operator()(const Event& a, const Event& b) const -> bool {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

}  // namespace

auto SplitTree::alive_count(double t) const -> std::size_t {
  return static_cast<std::size_t>(std::count_if(individuals.begin(), individuals.end(),
                                                 [t](const Individual& i) { return i.birth < t && i.death >= t; }));
}

auto run_status_name(RunStatus s) -> const char* {
  switch (s) {
    case RunStatus::detected: return "detected";
    case RunStatus::extinct: return "extinct";
    case RunStatus::horizon: return "horizon";
    case RunStatus::capped: return "capped";
  }
  return "unknown";
}

TreeModel::TreeModel(LifespanMeasure m, double d, LifetimeDraw f)
    : measure(std::move(m)), delta(d), draw(std::move(f)) {
  require(std::isfinite(delta) && delta >= 0, Errc::config, "clock rate must be >= 0");
}

auto simulate_tree(const TreeModel& model, Rng& rng, const SimCaps& caps) -> TreeRun {
  require(caps.max_individuals > 0 && caps.max_time > 0, Errc::config, "caps must be positive");
  const double b = model.measure.birth_rate();
  const auto& lifetime = model.measure.lifetime();

  TreeRun run;
  auto& people = run.tree.individuals;
  std::priority_queue<Event, std::vector<Event>, Later> queue;
  std::uint64_t seq = 0;

  auto next_birth = [&](std::size_t who, double from) {
    if (b <= 0) return;
    double t = from + draw_exponential(rng, b);
    if (t < people[who].death) queue.push({t, seq++, who, false});
  };
  auto add = [&](std::size_t parent, double birth) {
    Individual ind;
    ind.parent = parent;
    ind.birth = birth;
    if (model.draw) {
      auto [life, mark] = model.draw(rng);
      ind.death = birth + life;
      ind.mark = mark;
    } else {
      ind.death = birth + lifetime.sample(rng);
    }
    if (model.delta > 0) ind.ring = birth + draw_exponential(rng, model.delta);
    std::size_t id = people.size();
    people.push_back(std::move(ind));
    if (parent != no_parent) people[parent].children.push_back(id);
    if (people[id].ring < people[id].death) queue.push({people[id].ring, seq++, id, true});
    next_birth(id, birth);
  };

  add(no_parent, 0.0);
  auto& out = run.outcome;
  out.status = RunStatus::extinct;
  while (!queue.empty()) {
    Event ev = queue.top();
    if (ev.time > caps.horizon) {
      out.status = RunStatus::horizon;
      break;
    }
    if (ev.time > caps.max_time || people.size() >= caps.max_individuals) {
      out.status = RunStatus::capped;
      break;
    }
    queue.pop();
    if (ev.ring) {
      out.status = RunStatus::detected;
      out.T = ev.time;
      break;
    }
    add(ev.who, ev.time);
    next_birth(ev.who, ev.time);
  }

  if (out.detected()) {
    for (const auto& p : people) {
      if (p.birth <= out.T && p.death > out.T) out.carriers.push_back({out.T - p.birth, p.death - out.T, p.mark});
    }
    std::shuffle(out.carriers.begin(), out.carriers.end(), rng);
  }
  return run;
}

auto contour(const SplitTree& tree, double t) -> JccpPath {
  require(t > 0, Errc::domain, "contour level must be positive");
  require(!tree.individuals.empty(), Errc::domain, "empty tree");
  const auto& people = tree.individuals;
  JccpPath path;
  const auto& root = people[0];
  path.start_from = 0.0;
  path.start = std::min(root.death, t);
  path.start_raw = root.death;

  double level = path.start;
  std::vector<std::size_t> stack;
  auto push_children = [&](std::size_t i) {
    // ascending birth order, so the youngest daughter is popped first
    for (std::size_t c : people[i].children) {
      if (people[c].birth < t) stack.push_back(c);
    }
  };
  push_children(0);
  while (!stack.empty()) {
    std::size_t c = stack.back();
    stack.pop_back();
    const auto& ind = people[c];
    double to = std::min(ind.death, t);
    path.events.push_back({level - ind.birth, ind.birth, to, ind.death});
    level = to;
    push_children(c);
  }
  path.tail = level;
  path.end = 0.0;
  return path;
}

auto alive_at(const SplitTree& tree, double t) -> std::vector<Carrier> {
  std::vector<Carrier> out;
  for (const auto& ind : tree.individuals) {
    if (ind.birth < t && ind.death >= t) out.push_back({t - ind.birth, ind.death - t, ind.mark});
  }
  return out;
}

auto run_replicates(const TreeModel& model, std::size_t reps, std::uint64_t seed, unsigned workers,
                    const SimCaps& caps) -> std::vector<DetectionOutcome> {
  std::vector<DetectionOutcome> out(reps);
  parallel_for(reps, workers, [&](std::size_t i) {
    auto rng = replicate_rng(seed, i);
    out[i] = simulate_tree(model, rng, caps).outcome;
  });
  return out;
}

}  // namespace splitree
