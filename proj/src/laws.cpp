#include "splitree/laws.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "splitree/error.hpp"
#include "splitree/quadrature.hpp"

namespace splitree {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

auto left_tail(const LifetimeDistribution& L, double x) -> double {
  return L.tail(x - 1e-12 * std::max(1.0, x));
}

}  // namespace

DetectionLaw::DetectionLaw(const LaplaceExponent& exponent, double delta, std::optional<double> h,
                           std::optional<double> x_max)
    : b_(exponent.measure().birth_rate()),
      delta_(delta),
      p_(0.0),
      table_(ScaleTable::build(exponent, delta, h.value_or(default_scale_step),
                               x_max.value_or(default_scale_horizon(exponent)))) {
  require(std::isfinite(delta) && delta > 0, Errc::config, "clock rate delta must be positive");
  require(b_ > 0, Errc::config, "detection law needs a positive birth rate");
  p_ = (table_.phi_q() - delta_) / b_;
}

auto DetectionLaw::pmf_NT(std::size_t n, bool conditional) const -> double {
  require(n >= 1, Errc::domain, "N_T >= 1 on detection");
  double g = delta_ / table_.phi_q();
  double v = (delta_ / b_) * std::pow(1.0 - g, static_cast<double>(n));
  return conditional ? v / p_ : v;
}

auto DetectionLaw::cdf_T(double y, bool conditional) const -> double {
  require(y >= 0, Errc::domain, "cdf_T needs y >= 0");
  double v = std::isinf(y) ? p_ : (delta_ / b_) * (1.0 - G(y)) / G(y);
  return conditional ? v / p_ : v;
}

auto DetectionLaw::joint_density(std::size_t n, double t) const -> double {
  require(n >= 1, Errc::domain, "N_T >= 1 on detection");
  require(t > 0, Errc::domain, "joint density needs t > 0");
  double g = G(t);
  return -(static_cast<double>(n) * delta_ / b_) * G_q_derivative(table_, t) *
         std::pow(1.0 - g, static_cast<double>(n) - 1.0);
}

auto DetectionLaw::conditional_pmf_given_T(std::size_t n, double t) const -> double {
  require(n >= 1, Errc::domain, "N_T >= 1 on detection");
  double g = G(t);
  return static_cast<double>(n) * g * g * std::pow(1.0 - g, static_cast<double>(n) - 1.0);
}

auto DetectionLaw::window_norm(double y) const -> double {
  if (std::isinf(y)) return 1.0;
  return table_.W(y) - 1.0 - delta_ * table_.integral(y);
}

auto DetectionLaw::age_residual_density(double y, double a, double r) const -> double {
  require(a > 0 && r > 0, Errc::domain, "age and residual must be positive");
  const auto& m = table_.measure();
  require(m.has_density(), Errc::unsupported,
          "lifetime law has no density; use age_density or age_residual_cell");
  if (std::isinf(y)) {
    double phi = table_.phi_q();
    return phi / (phi - delta_) * std::exp(-phi * a) * m.density(a + r);
  }
  if (a >= y) return 0.0;
  return table_.W(y - a) * m.density(a + r) / window_norm(y);
}

auto DetectionLaw::age_density(double y, double a) const -> double {
  require(a > 0, Errc::domain, "age must be positive");
  const auto& m = table_.measure();
  if (std::isinf(y)) {
    double phi = table_.phi_q();
    return phi / (phi - delta_) * std::exp(-phi * a) * m.tail(a);
  }
  if (a >= y) return 0.0;
  return table_.W(y - a) * m.tail(a) / window_norm(y);
}

auto DetectionLaw::age_residual_cell(double y, double a0, double a1, double r0, double r1) const
    -> double {
  require(a0 >= 0 && a1 >= a0 && r0 >= 0 && r1 >= r0, Errc::domain, "malformed cell");
  const auto& m = table_.measure();
  auto band = [&](double a) {
    double hi = std::isinf(r1) ? 0.0 : m.tail(a + r1);
    return m.tail(a + r0) - hi;
  };
  std::vector<double> breaks;
  for (double x : m.lifetime().jump_points()) {
    breaks.push_back(x - r0);
    if (!std::isinf(r1)) breaks.push_back(x - r1);
  }
  if (std::isinf(y)) {
    double phi = table_.phi_q();
    double c = phi / (phi - delta_);
    double top = std::isinf(a1) ? a0 + 50.0 / phi : a1;
    return c * quad::integrate([&](double a) { return std::exp(-phi * a) * band(a); }, a0, top, breaks,
                               1e-12);
  }
  double top = std::min(a1, y);
  if (top <= a0) return 0.0;
  double v = quad::trapezoid([&](double a) { return table_.W(y - a) * band(a); }, a0, top,
                             table_.step(), breaks);
  return v / window_norm(y);
}

auto FixedTimeLaw::pmf(std::size_t n) const -> double {
  if (n == 0) return extinct;
  return first * std::pow(upcross, static_cast<double>(n) - 1.0) * exit;
}

auto fixed_time_law(const ScaleTable& table, double t) -> FixedTimeLaw {
  require(t > 0, Errc::domain, "fixed-time law needs t > 0");
  const auto& L = table.measure().lifetime();
  FixedTimeLaw out;
  out.upcross = upcross_lt(table, t, t);
  out.exit = exit_bottom_lt(table, t, t);

  // Stieltjes integrals against mu(ds) on (0, t): atoms exactly, the rest by midpoints
  std::vector<double> nodes{0.0};
  for (double x : L.jump_points()) {
    if (x > 0 && x < t) nodes.push_back(x);
  }
  nodes.push_back(t);
  double h = table.step();
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    double lo = nodes[k], hi = nodes[k + 1];
    if (k > 0) {
      double atom = left_tail(L, lo) - L.tail(lo);
      if (atom > 0) {
        out.extinct += atom * exit_bottom_lt(table, lo, t);
        out.first += atom * upcross_lt(table, lo, t);
      }
    }
    auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / h));
    double w = (hi - lo) / static_cast<double>(cells);
    for (std::size_t j = 0; j < cells; ++j) {
      double u = lo + w * static_cast<double>(j), v = u + w;
      double mass = L.tail(u) - left_tail(L, v);
      if (mass <= 0) continue;
      double s = 0.5 * (u + v);
      out.extinct += mass * exit_bottom_lt(table, s, t);
      out.first += mass * upcross_lt(table, s, t);
    }
  }
  // lifetimes >= t: the progenitor itself is the first visit
  out.first += left_tail(L, t);
  return out;
}

}  // namespace splitree
