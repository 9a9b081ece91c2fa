#include "splitree/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "splitree/error.hpp"
#include "splitree/parallel.hpp"
#include "splitree/quadrature.hpp"

namespace splitree {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double log_g2_lo = -9.210340371976184;  // log 1e-4
constexpr double log_g2_hi = 9.210340371976184;   // log 1e4

// Maximizes f on [lo, hi]: grid scan, Brent (golden section with parabolic
// steps) inside the best bracket, then Newton steps on finite differences.
struct Max1d {
  double x;
  double value;
  bool at_boundary;
};

template <class F>
auto maximize(F&& f, double lo, double hi, int scan = 48, bool newton = false) -> Max1d {
  double best_x = lo, best_v = -inf;
  int best_k = 0;
  for (int k = 0; k <= scan; ++k) {
    double x = lo + (hi - lo) * k / scan;
    double v = f(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
      best_k = k;
    }
  }
  if (!std::isfinite(best_v)) return {best_x, best_v, true};
  double step = (hi - lo) / scan;
  double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
  auto [x, neg] = boost::math::tools::brent_find_minima([&](double t) { return -f(t); }, a, b, 52);
  double v = -neg;
  if (v < best_v) {
    x = best_x;
    v = best_v;
  }
  if (newton) {
    for (int it = 0; it < 8; ++it) {
      double e = 1e-4;
      double fp = f(x + e), fm = f(x - e);
      double d1 = (fp - fm) / (2 * e), d2 = (fp - 2 * v + fm) / (e * e);
      if (!(d2 < 0) || !std::isfinite(d1)) break;
      double nx = std::clamp(x - d1 / d2, lo, hi);
      double nv = f(nx);
      if (!(nv >= v)) break;
      bool done = std::abs(nx - x) < 1e-10;
      x = nx;
      v = nv;
      if (done) break;
    }
  }
  bool edge = (best_k == 0 || best_k == scan) && (std::abs(x - lo) < 1e-6 || std::abs(x - hi) < 1e-6);
  return {x, v, edge};
}

auto log_geometric(std::size_t n, std::size_t s, double g1) -> double {
  if (!(g1 > 0) || g1 > 1) return -inf;
  double v = static_cast<double>(n) * std::log(g1);
  if (s > n) v += static_cast<double>(s - n) * std::log1p(-g1);
  return v;
}

// Likelihood pieces for one dataset and one stay law. Only the g2-dependent
// part of L2 is evaluated during optimization.
class Likelihood {
 public:
  Likelihood(const OutbreakDataset& data, const StayDistribution& K) : K_(K) {
    data.validate();
    n_ = data.n();
    for (const auto& o : data.outbreaks) {
      for (double y : o.y) y_.push_back(y);
    }
    s_ = y_.size();
  }

  auto n() const -> std::size_t { return n_; }
  auto s() const -> std::size_t { return s_; }

  auto normalizer(double g2) const -> double {
    auto it = cache_.find(g2);
    if (it != cache_.end()) return it->second;
    double d = K_.h_normalizer(g2);
    if (cache_.size() > 4096) cache_.clear();
    cache_.emplace(g2, d);
    return d;
  }

  auto part2(double g2) const -> double {
    ++evaluations_;
    double v = 0.0;
    for (double y : y_) v += std::log(-std::expm1(-g2 * y));
    return v - static_cast<double>(s_) * std::log(normalizer(g2));
  }
  auto part1(double g1) const -> double { return log_geometric(n_, s_, g1); }

  // b as a function of (g1, g2)
  auto birth_rate(double g1, double g2) const -> double {
    return K_.mean() * g2 * (1 - g1) / normalizer(g2);
  }
  // g1 giving birth rate b at g2
  auto g1_for_b(double b, double g2) const -> double { return 1 - b * normalizer(g2) / (K_.mean() * g2); }

  // max over log g2 of part1 + part2 subject to delta = g1 g2
  auto profile_delta(double delta) const -> Max1d {
    double lo = std::max(log_g2_lo, std::log(delta));
    if (lo >= log_g2_hi) return {lo, -inf, true};
    return maximize([&](double x) {
      double g2 = std::exp(x);
      return part1(delta / g2) + part2(g2);
    }, lo, log_g2_hi, 40);
  }

  auto profile_b(double b) const -> Max1d {
    return maximize([&](double x) {
      double g2 = std::exp(x);
      double g1 = g1_for_b(b, g2);
      if (!(g1 > 0 && g1 <= 1)) return -inf;
      return part1(g1) + part2(g2);
    }, log_g2_lo, log_g2_hi, 60);
  }

  mutable std::size_t evaluations_ = 0;

 private:
  const StayDistribution& K_;
  std::size_t n_ = 0, s_ = 0;
  std::vector<double> y_;
  mutable std::map<double, double> cache_;
};

// Likelihood-ratio interval around theta_hat for a profile f with maximum f_max.
template <class F>
auto profile_interval(F&& f, double theta_hat, double f_max) -> Interval {
  auto below = [&](double theta) { return f_max - f(theta) - profile_drop; };
  auto solve = [&](double inside, double outside) {
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-9 * std::max(1.0, std::abs(a)); };
    auto g = [&](double u) { return below(std::exp(u)); };
    double u0 = std::log(std::min(inside, outside)), u1 = std::log(std::max(inside, outside));
    auto [a, b] = boost::math::tools::bisect(g, u0, u1, tol);
    return std::exp(0.5 * (a + b));
  };
  Interval out{0.0, inf};
  double t = theta_hat;
  for (int k = 0; k < 60; ++k) {
    double next = t / 1.5;
    if (below(next) > 0) {
      out.lo = solve(t, next);
      break;
    }
    t = next;
  }
  t = theta_hat;
  for (int k = 0; k < 60; ++k) {
    double next = t * 1.5;
    if (below(next) > 0) {
      out.hi = solve(t, next);
      break;
    }
    t = next;
  }
  return out;
}

auto fmt(double v) -> std::string {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

StayDistribution::StayDistribution(LifetimeDistribution K) : K_(std::move(K)), m_(K_.finite_mean()) {
  require(K_.mass_at_infinity() == 0, Errc::config, "length of stay must be finite almost surely");
  require(std::isfinite(m_) && m_ > 0, Errc::config, "length of stay needs a finite positive mean");
}

auto StayDistribution::integrated_tail(double x) const -> double {
  if (x <= 0) return 0.0;
  if (auto nu = K_.exponential_rate()) return -std::expm1(-*nu * x) / *nu;
  if (K_.kind() == LifetimeDistribution::Kind::table) {
    auto xs = K_.jump_points();
    auto ts = K_.jump_tails();
    double acc = 0.0, prev_x = 0.0, prev_t = 1.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (x <= xs[k]) return acc + prev_t * (x - prev_x);
      acc += prev_t * (xs[k] - prev_x);
      prev_x = xs[k];
      prev_t = ts[k];
    }
    return acc + prev_t * (x - prev_x);
  }
  return quad::integrate([this](double y) { return K_.tail(y); }, 0.0, x, 1e-12);
}

auto StayDistribution::h_normalizer(double g) const -> double {
  require(g > 0, Errc::domain, "g2 must be positive");
  if (auto nu = K_.exponential_rate()) return g / (*nu * (*nu + g));
  return m_ - K_.laplace_tail(g);
}

auto StayDistribution::infective_lifetime() const -> LifetimeDistribution {
  if (auto nu = K_.exponential_rate()) return LifetimeDistribution::exponential(*nu);
  LifetimeDistribution::Custom spec;
  auto self = *this;
  spec.tail = [self](double x) { return x <= 0 ? 1.0 : 1.0 - self.integrated_tail(x) / self.m_; };
  spec.density = [self](double x) { return x < 0 ? 0.0 : self.K_.tail(x) / self.m_; };
  spec.sample = [self](Rng& rng) { return sample_infection_pair(self, rng).V; };
  spec.description = "stay-residual(" + K_.description() + ")";
  return LifetimeDistribution::custom(std::move(spec));
}

auto StayDistribution::sample_size_biased(Rng& rng) const -> double {
  if (auto nu = K_.exponential_rate()) {
    return draw_exponential(rng, *nu) + draw_exponential(rng, *nu);
  }
  require(K_.kind() == LifetimeDistribution::Kind::table, Errc::unsupported,
          "size-biased sampling needs an exponential or tabulated stay law");
  auto xs = K_.jump_points();
  auto ts = K_.jump_tails();
  double u = draw_uniform(rng) * m_, acc = 0.0, prev = 1.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    acc += xs[k] * (prev - ts[k]);
    prev = ts[k];
    if (u < acc) return xs[k];
  }
  return xs.back();
}

auto sample_infection_pair(const StayDistribution& K, Rng& rng) -> InfectionPair {
  double z = K.sample_size_biased(rng);
  double u = draw_uniform(rng, 0.0, z);
  return {u, z - u};
}

auto h_density(const StayDistribution& K, double g2, double y) -> double {
  require(g2 > 0, Errc::domain, "g2 must be positive");
  if (y <= 0) return 0.0;
  if (auto nu = K.K().exponential_rate()) {
    return (*nu + g2) * *nu / g2 * -std::expm1(-g2 * y) * std::exp(-*nu * y);
  }
  return K.tail(y) * -std::expm1(-g2 * y) / K.h_normalizer(g2);
}

auto h_cdf(const StayDistribution& K, double g2, double y) -> double {
  require(g2 > 0, Errc::domain, "g2 must be positive");
  if (y <= 0) return 0.0;
  if (auto nu = K.K().exponential_rate()) {
    double a = -std::expm1(-*nu * y) / *nu;
    double c = -std::expm1(-(*nu + g2) * y) / (*nu + g2);
    return (a - c) / K.h_normalizer(g2);
  }
  double damped = quad::integrate([&](double x) { return std::exp(-g2 * x) * K.tail(x); }, 0.0, y,
                                  K.K().jump_points(), 1e-12);
  return (K.integrated_tail(y) - damped) / K.h_normalizer(g2);
}

auto OutbreakDataset::carriers() const -> std::size_t {
  std::size_t s = 0;
  for (const auto& o : outbreaks) s += o.size();
  return s;
}

void OutbreakDataset::validate() const {
  require(!outbreaks.empty(), Errc::empty, "no outbreaks in dataset");
  for (const auto& o : outbreaks) {
    require(!o.y.empty(), Errc::config, "outbreak '" + o.id + "' has no carriers");
    for (double y : o.y) {
      require(std::isfinite(y) && y > 0, Errc::config, "outbreak '" + o.id + "' has a non-positive duration");
    }
  }
}

auto read_outbreaks_csv(const std::string& path) -> OutbreakDataset {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::io, "cannot open outbreak file '" + path + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::config, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto col = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  int c_id = col("outbreak_id"), c_y = col("y"), c_h = col("hospital");
  require(c_id >= 0 && c_y >= 0, Errc::config, path + ": header must contain outbreak_id and y");

  OutbreakDataset data;
  std::map<std::string, std::size_t> index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    auto where = path + ":" + std::to_string(line_no);
    require(static_cast<int>(cells.size()) > std::max({c_id, c_y, c_h}), Errc::config, where + ": missing columns");
    double y = 0.0;
    try {
      std::size_t used = 0;
      y = std::stod(cells[static_cast<std::size_t>(c_y)], &used);
    } catch (const std::exception&) {
      fail(Errc::config, where + ": y is not a number");
    }
    const auto& id = cells[static_cast<std::size_t>(c_id)];
    std::string hospital = c_h >= 0 ? cells[static_cast<std::size_t>(c_h)] : "";
    auto [it, fresh] = index.emplace(id, data.outbreaks.size());
    if (fresh) data.outbreaks.push_back({id, hospital, {}});
    auto& o = data.outbreaks[it->second];
    require(o.hospital == hospital, Errc::config, where + ": outbreak '" + id + "' listed under two hospitals");
    o.y.push_back(y);
  }
  data.validate();
  return data;
}

void write_outbreaks_csv(const OutbreakDataset& data, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), Errc::io, "cannot write '" + path + "'");
  bool with_hospital = std::any_of(data.outbreaks.begin(), data.outbreaks.end(),
                                   [](const Outbreak& o) { return !o.hospital.empty(); });
  out << "outbreak_id,y" << (with_hospital ? ",hospital" : "") << "\n";
  for (const auto& o : data.outbreaks) {
    for (double y : o.y) {
      out << o.id << "," << fmt(y);
      if (with_hospital) out << "," << o.hospital;
      out << "\n";
    }
  }
  require(static_cast<bool>(out), Errc::io, "write to '" + path + "' failed");
}

auto log_likelihood(const OutbreakDataset& data, const StayDistribution& K, double g1, double g2) -> double {
  require(g1 > 0 && g1 <= 1 && g2 > 0, Errc::domain, "log likelihood needs g1 in (0, 1] and g2 > 0");
  Likelihood lik(data, K);
  double v = lik.part1(g1) + lik.part2(g2);
  for (const auto& o : data.outbreaks) {
    for (double y : o.y) v += std::log(K.tail(y));
  }
  return v;
}

auto fit(const OutbreakDataset& data, const StayDistribution& K, bool with_intervals)
    -> EstimationResult {
  Likelihood lik(data, K);
  EstimationResult r;
  r.n = lik.n();
  r.s = lik.s();
  r.g1_hat = static_cast<double>(r.n) / static_cast<double>(r.s);
  r.g1_at_boundary = r.n == r.s;

  auto best = maximize([&](double x) { return lik.part2(std::exp(x)); }, log_g2_lo, log_g2_hi, 80, true);
  if (best.at_boundary || !std::isfinite(best.value)) {
    fail(Errc::not_identifiable,
         "g2 likelihood is maximized at the search boundary (log g2 = " + fmt(best.x) +
             ", s(n) = " + std::to_string(r.s) + "); durations do not identify phi(delta)");
  }
  r.g2_hat = std::exp(best.x);
  {
    double e = 1e-5;
    r.score_g2 = (lik.part2(std::exp(best.x + e)) - lik.part2(std::exp(best.x - e))) / (2 * e);
  }
  r.delta_hat = r.g1_hat * r.g2_hat;
  r.b_hat = lik.birth_rate(r.g1_hat, r.g2_hat);
  r.log_likelihood = log_likelihood(data, K, r.g1_hat, r.g2_hat);

  double l_max = lik.part1(r.g1_hat) + best.value;
  if (!with_intervals) {
    r.evaluations = lik.evaluations_;
    return r;
  }
  r.delta_ci = profile_interval([&](double d) { return lik.profile_delta(d).value; }, r.delta_hat, l_max);
  if (r.b_hat > 0) {
    r.b_ci = profile_interval([&](double b) { return lik.profile_b(b).value; }, r.b_hat, l_max);
  } else {
    r.b_ci = {0.0, 0.0};
  }
  r.evaluations = lik.evaluations_;
  return r;
}

auto split_by_hospital(const OutbreakDataset& data) -> std::vector<std::pair<std::string, OutbreakDataset>> {
  std::vector<std::pair<std::string, OutbreakDataset>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& o : data.outbreaks) {
    auto [it, fresh] = index.emplace(o.hospital, groups.size());
    if (fresh) groups.push_back({o.hospital, {}});
    groups[it->second].second.outbreaks.push_back(o);
  }
  return groups;
}

auto fit_per_hospital(const std::vector<std::pair<std::string, OutbreakDataset>>& groups,
                      const std::vector<StayDistribution>& stays) -> PooledFit {
  require(!groups.empty(), Errc::empty, "no hospitals to fit");
  require(stays.size() == groups.size() || stays.size() == 1, Errc::config,
          "need one stay law per hospital or a single shared one");
  std::vector<Likelihood> liks;
  liks.reserve(groups.size());
  for (std::size_t h = 0; h < groups.size(); ++h) {
    liks.emplace_back(groups[h].second, stays.size() == 1 ? stays[0] : stays[h]);
  }
  auto total = [&](double delta) {
    double v = 0.0;
    for (const auto& l : liks) v += l.profile_delta(delta).value;
    return v;
  };
  auto best = maximize([&](double x) { return total(std::exp(x)); }, log_g2_lo, log_g2_hi, 60);
  require(!best.at_boundary && std::isfinite(best.value), Errc::not_identifiable,
          "pooled delta likelihood is maximized at the search boundary");
  PooledFit out;
  out.delta_hat = std::exp(best.x);
  out.log_likelihood = best.value;
  out.delta_ci = profile_interval(total, out.delta_hat, best.value);
  for (std::size_t h = 0; h < groups.size(); ++h) {
    const auto& K = stays.size() == 1 ? stays[0] : stays[h];
    for (const auto& o : groups[h].second.outbreaks) {
      for (double y : o.y) out.log_likelihood += std::log(K.tail(y));
    }
    auto m = liks[h].profile_delta(out.delta_hat);
    double g2 = std::exp(m.x);
    out.hospitals.push_back({groups[h].first, liks[h].birth_rate(out.delta_hat / g2, g2), g2});
  }
  return out;
}

auto simulate_epidemic_trees(const StayDistribution& K, double b, double delta, std::size_t reps,
                             std::uint64_t seed, unsigned workers) -> std::vector<DetectionOutcome> {
  require(b > 0 && delta > 0, Errc::config, "b and delta must be positive");
  TreeModel model(LifespanMeasure(b, K.infective_lifetime()), delta, [K](Rng& rng) {
    auto pair = sample_infection_pair(K, rng);
    return std::pair{pair.V, pair.U};
  });
  return run_replicates(model, reps, seed, workers);
}

auto simulate_outbreaks(const StayDistribution& K, double b, double delta, std::size_t count,
                        std::uint64_t seed, unsigned workers, std::size_t max_trees) -> OutbreakDataset {
  require(count > 0, Errc::config, "outbreak count must be positive");
  if (max_trees == 0) max_trees = std::max<std::size_t>(1000, 1000 * count);
  TreeModel model(LifespanMeasure(b, K.infective_lifetime()), delta, [K](Rng& rng) {
    auto pair = sample_infection_pair(K, rng);
    return std::pair{pair.V, pair.U};
  });
  OutbreakDataset data;
  std::size_t next = 0;
  std::size_t batch = std::max<std::size_t>(64, 3 * count);
  while (data.n() < count && next < max_trees) {
    std::size_t len = std::min(batch, max_trees - next);
    std::vector<DetectionOutcome> outcomes(len);
    parallel_for(len, workers, [&](std::size_t i) {
      auto rng = replicate_rng(seed, next + i);
      outcomes[i] = simulate_tree(model, rng).outcome;
    });
    for (std::size_t i = 0; i < len && data.n() < count; ++i) {
      if (!outcomes[i].detected()) continue;
      Outbreak o;
      o.id = "o" + std::to_string(next + i);
      for (const auto& c : outcomes[i].carriers) o.y.push_back(c.stay + c.age);
      data.outbreaks.push_back(std::move(o));
    }
    next += len;
  }
  require(data.n() > 0, Errc::empty, "no outbreak was detected within " + std::to_string(max_trees) + " trees");
  return data;
}

}  // namespace splitree
