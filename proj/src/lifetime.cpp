#include "splitree/lifetime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "splitree/error.hpp"
#include "splitree/quadrature.hpp"

namespace splitree {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

auto parse_double(const std::string& text, const std::string& what) -> double {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) fail(Errc::config, "trailing characters in " + what + ": '" + text + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(Errc::config, "not a number in " + what + ": '" + text + "'");
  } catch (const std::out_of_range&) {
    fail(Errc::config, "number out of range in " + what + ": '" + text + "'");
  }
}

}  // namespace

auto LifetimeDistribution::exponential(double rate, double mass_at_infinity) -> LifetimeDistribution {
  require(std::isfinite(rate) && rate > 0, Errc::config, "exponential lifetime rate must be positive");
  require(mass_at_infinity >= 0 && mass_at_infinity < 1, Errc::config,
          "mass at infinity must lie in [0, 1)");
  LifetimeDistribution d;
  d.kind_ = Kind::exponential;
  d.rate_ = rate;
  d.inf_mass_ = mass_at_infinity;
  d.cached_mean_ = (1 - mass_at_infinity) / rate;
  return d;
}

auto LifetimeDistribution::table(std::vector<double> xs, std::vector<double> tails)
    -> LifetimeDistribution {
  require(!xs.empty() && xs.size() == tails.size(), Errc::config,
          "tail table needs matching, nonempty x and tail columns");
  double prev_x = 0.0, prev_t = 1.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    require(std::isfinite(xs[k]) && xs[k] > prev_x, Errc::config,
            "tail table x values must be positive and strictly increasing");
    require(tails[k] >= 0 && tails[k] <= prev_t, Errc::config,
            "tail table values must be nonincreasing within [0, 1]");
    prev_x = xs[k];
    prev_t = tails[k];
  }
  require(tails.back() < 1, Errc::config, "tail table puts all mass at infinity");
  LifetimeDistribution d;
  d.kind_ = Kind::table;
  d.inf_mass_ = tails.back();
  d.xs_ = std::move(xs);
  d.tails_ = std::move(tails);
  double mean = 0, prev = 1;
  for (std::size_t k = 0; k < d.xs_.size(); ++k) {
    mean += d.xs_[k] * (prev - d.tails_[k]);
    prev = d.tails_[k];
  }
  d.cached_mean_ = mean;
  return d;
}

auto LifetimeDistribution::point_mass(double c) -> LifetimeDistribution {
  return table({c}, {0.0});
}

auto LifetimeDistribution::custom(Custom spec) -> LifetimeDistribution {
  require(static_cast<bool>(spec.tail) && static_cast<bool>(spec.sample), Errc::config,
          "custom lifetime needs tail and sampler callbacks");
  require(spec.mass_at_infinity >= 0 && spec.mass_at_infinity < 1, Errc::config,
          "mass at infinity must lie in [0, 1)");
  LifetimeDistribution d;
  d.kind_ = Kind::custom;
  d.inf_mass_ = spec.mass_at_infinity;
  d.custom_ = std::move(spec);
  double kappa = d.inf_mass_;
  auto& tail = d.custom_.tail;
  d.cached_mean_ = quad::integrate([&](double x) { return tail(x) - kappa; }, 0.0, inf, 1e-11);
  require(std::isfinite(d.cached_mean_), Errc::config, "custom lifetime tail is not integrable");
  return d;
}

auto LifetimeDistribution::exponential_rate() const -> std::optional<double> {
  if (kind_ == Kind::exponential) return rate_;
  return std::nullopt;
}

auto LifetimeDistribution::tail(double x) const -> double {
  if (x < 0) return 1.0;
  switch (kind_) {
    case Kind::exponential:
      return inf_mass_ + (1 - inf_mass_) * std::exp(-rate_ * x);
    case Kind::table: {
      auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      if (it == xs_.begin()) return 1.0;
      return tails_[static_cast<std::size_t>(it - xs_.begin()) - 1];
    }
    case Kind::custom:
      return custom_.tail(x);
  }
  return 1.0;
}

auto LifetimeDistribution::has_density() const noexcept -> bool {
  switch (kind_) {
    case Kind::exponential:
      return true;
    case Kind::table:
      return false;
    case Kind::custom:
      return static_cast<bool>(custom_.density);
  }
  return false;
}

auto LifetimeDistribution::density(double x) const -> double {
  require(has_density(), Errc::unsupported, "lifetime law " + description() + " has no density");
  if (x < 0) return 0.0;
  if (kind_ == Kind::exponential) return (1 - inf_mass_) * rate_ * std::exp(-rate_ * x);
  return custom_.density(x);
}

auto LifetimeDistribution::sample(Rng& rng) const -> double {
  switch (kind_) {
    case Kind::exponential:
      if (inf_mass_ > 0 && draw_uniform(rng) < inf_mass_) return inf;
      return draw_exponential(rng, rate_);
    case Kind::table: {
      double u = 1.0 - draw_uniform(rng);  // (0, 1]
      // first k with tails[k] < u
      auto it = std::lower_bound(tails_.begin(), tails_.end(), u,
                                 [](double t, double v) { return t >= v; });
      if (it == tails_.end()) return inf;
      return xs_[static_cast<std::size_t>(it - tails_.begin())];
    }
    case Kind::custom:
      return custom_.sample(rng);
  }
  return inf;
}

auto LifetimeDistribution::jump_points() const -> std::span<const double> {
  if (kind_ == Kind::table) return xs_;
  return {};
}

auto LifetimeDistribution::jump_tails() const -> std::span<const double> {
  if (kind_ == Kind::table) return tails_;
  return {};
}

auto LifetimeDistribution::finite_mean() const -> double { return cached_mean_; }

auto LifetimeDistribution::second_moment() const -> double {
  switch (kind_) {
    case Kind::exponential:
      return 2 * (1 - inf_mass_) / (rate_ * rate_);
    case Kind::table: {
      double s = 0, prev = 1;
      for (std::size_t k = 0; k < xs_.size(); ++k) {
        s += xs_[k] * xs_[k] * (prev - tails_[k]);
        prev = tails_[k];
      }
      return s;
    }
    case Kind::custom: {
      double kappa = inf_mass_;
      auto& tail = custom_.tail;
      return 2 * quad::integrate([&](double x) { return x * (tail(x) - kappa); }, 0.0, inf, 1e-11);
    }
  }
  return 0.0;
}

auto LifetimeDistribution::laplace_tail(double a) const -> double {
  switch (kind_) {
    case Kind::exponential:
      return (1 - inf_mass_) / (a + rate_);
    case Kind::table: {
      if (a == 0) return cached_mean_;
      double s = 0, prev = 1;
      for (std::size_t k = 0; k < xs_.size(); ++k) {
        s += (prev - tails_[k]) * (-std::expm1(-a * xs_[k]));
        prev = tails_[k];
      }
      return s / a;
    }
    case Kind::custom: {
      if (a == 0) return cached_mean_;
      double kappa = inf_mass_;
      auto& tail = custom_.tail;
      return quad::integrate([&](double x) { return std::exp(-a * x) * (tail(x) - kappa); }, 0.0,
                             inf, 1e-12);
    }
  }
  return 0.0;
}

auto LifetimeDistribution::laplace_first_moment(double a) const -> double {
  switch (kind_) {
    case Kind::exponential:
      return (1 - inf_mass_) * rate_ / ((a + rate_) * (a + rate_));
    case Kind::table: {
      double s = 0, prev = 1;
      for (std::size_t k = 0; k < xs_.size(); ++k) {
        s += (prev - tails_[k]) * xs_[k] * std::exp(-a * xs_[k]);
        prev = tails_[k];
      }
      return s;
    }
    case Kind::custom: {
      double kappa = inf_mass_;
      auto& tail = custom_.tail;
      // integration by parts of E[L e^{-aL}] against the tail
      return quad::integrate(
          [&](double x) { return (1 - a * x) * std::exp(-a * x) * (tail(x) - kappa); }, 0.0, inf,
          1e-12);
    }
  }
  return 0.0;
}

auto LifetimeDistribution::description() const -> std::string {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::exponential:
      os << "exp:" << rate_;
      if (inf_mass_ > 0) os << " (mass at infinity " << inf_mass_ << ")";
      break;
    case Kind::table:
      os << "table[" << xs_.size() << " points]";
      break;
    case Kind::custom:
      os << custom_.description;
      break;
  }
  return os.str();
}

auto read_tail_table(const std::string& path) -> LifetimeDistribution {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::io, "cannot open tail table '" + path + "'");
  std::vector<double> xs, tails;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    require(comma != std::string::npos, Errc::config,
            path + ":" + std::to_string(line_no) + ": expected 'x,tail'");
    auto first = line.substr(0, comma);
    if (line_no == 1 && !first.empty() && std::isalpha(static_cast<unsigned char>(first[0]))) continue;
    xs.push_back(parse_double(first, path));
    tails.push_back(parse_double(line.substr(comma + 1), path));
  }
  return LifetimeDistribution::table(std::move(xs), std::move(tails));
}

auto parse_lifetime_spec(const std::string& spec) -> LifetimeDistribution {
  auto colon = spec.find(':');
  require(colon != std::string::npos, Errc::config,
          "lifetime spec must look like exp:<rate> or table:<path>, got '" + spec + "'");
  auto kind = spec.substr(0, colon);
  auto arg = spec.substr(colon + 1);
  if (kind == "exp") return LifetimeDistribution::exponential(parse_double(arg, spec));
  if (kind == "table") return read_tail_table(arg);
  if (kind == "det") return LifetimeDistribution::point_mass(parse_double(arg, spec));
  fail(Errc::config, "unknown lifetime family '" + kind + "'");
}

}  // namespace splitree
