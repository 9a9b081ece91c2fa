#include "splitree/scale_fn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "splitree/error.hpp"
#include "splitree/quadrature.hpp"

namespace splitree {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// 5-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 5> gl_nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> gl_weights{0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

// Adds \int_a^b pi_bar(y) (right - y)/h dy to alpha and \int (y - left)/h to beta.
void accumulate_moments(const LifespanMeasure& m, double a, double b, double left, double h,
                        double& alpha, double& beta) {
  double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < gl_nodes.size(); ++i) {
    double y = mid + half * gl_nodes[i];
    double w = half * gl_weights[i] * m.tail(y);
    double u = (y - left) / h;
    alpha += w * (1 - u);
    beta += w * u;
  }
}

auto table_tolerance(const ScaleTable& t) -> double { return t.step() * 1e-9; }

void check_in_table(const ScaleTable& table, double x, const char* what) {
  if (x > table.x_max() + table_tolerance(table)) {
    fail(Errc::out_of_table, std::string(what) + " = " + std::to_string(x) +
                                 " lies beyond the table horizon " + std::to_string(table.x_max()));
  }
}

}  // namespace

auto default_scale_horizon(const LaplaceExponent& exponent) -> double {
  double mean = exponent.measure().lifetime().finite_mean();
  double rate = std::max(exponent.eta(), mean > 0 ? 1.0 / mean : 1.0);
  return 20.0 / rate;
}

auto ScaleTable::build(const LaplaceExponent& exponent, double q, double h, double x_max)
    -> ScaleTable {
  require(std::isfinite(q) && q >= 0, Errc::config, "scale table needs q >= 0");
  require(std::isfinite(h) && h > 0, Errc::config, "scale table step must be positive");
  require(std::isfinite(x_max) && x_max >= h, Errc::config,
          "scale table step is coarser than the horizon");
  auto n = static_cast<std::size_t>(std::ceil(x_max / h - 1e-9));
  require(n <= 2'000'000, Errc::config, "scale table would need more than 2e6 grid cells");

  ScaleTable table(exponent.measure());
  table.q_ = q;
  table.h_ = h;
  table.eta_ = exponent.eta();
  table.phi_q_ = exponent.phi(q);
  table.psi_prime0_ = exponent.psi_prime(0.0);

  const auto& measure = exponent.measure();
  auto jumps = measure.lifetime().jump_points();

  // cell moments of the kernel against the two hat functions of each cell
  std::vector<double> alpha(n, 0.5 * q * h), beta(n, 0.5 * q * h);
  if (measure.birth_rate() > 0) {
    auto jump = jumps.begin();
    for (std::size_t j = 0; j < n; ++j) {
      double left = static_cast<double>(j) * h, right = left + h;
      double a = left;
      while (jump != jumps.end() && *jump <= a) ++jump;
      for (; jump != jumps.end() && *jump < right; ++jump) {
        accumulate_moments(measure, a, *jump, left, h, alpha[j], beta[j]);
        a = *jump;
      }
      accumulate_moments(measure, a, right, left, h, alpha[j], beta[j]);
    }
  }

  auto& W = table.values_;
  W.assign(n + 1, 0.0);
  W[0] = 1.0;
  double diag = 1.0 - alpha[0];
  require(diag > 0, Errc::config, "scale table step too coarse for this kernel");
  for (std::size_t k = 1; k <= n; ++k) {
    double s = beta[k - 1] * W[0];
    for (std::size_t j = 1; j < k; ++j) s += (beta[j - 1] + alpha[j]) * W[k - j];
    W[k] = (1.0 + s) / diag;
  }

  auto& C = table.cumulative_;
  C.assign(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) C[k] = C[k - 1] + 0.5 * h * (W[k - 1] + W[k]);
  return table;
}

auto ScaleTable::W(double x) const -> double {
  if (x < 0) return 0.0;
  check_in_table(*this, x, "W argument");
  double pos = x / h_;
  auto k = static_cast<std::size_t>(pos);
  if (k >= values_.size() - 1) return values_.back();
  double frac = pos - static_cast<double>(k);
  return values_[k] + frac * (values_[k + 1] - values_[k]);
}

auto ScaleTable::integral(double x) const -> double {
  if (x <= 0) return 0.0;
  check_in_table(*this, x, "integral upper limit");
  double pos = x / h_;
  auto k = static_cast<std::size_t>(pos);
  if (k >= values_.size() - 1) return cumulative_.back();
  double frac = pos - static_cast<double>(k);
  double w_end = values_[k] + frac * (values_[k + 1] - values_[k]);
  return cumulative_[k] + 0.5 * frac * h_ * (values_[k] + w_end);
}

auto exit_bottom_lt(const ScaleTable& table, double s, double t) -> double {
  require(s >= 0 && s <= t, Errc::domain, "exit_bottom_lt needs 0 <= s <= t");
  check_in_table(table, t, "level t");
  return table.W(t - s) / table.W(t);
}

auto G_q(const ScaleTable& table, double t) -> double {
  require(t >= 0, Errc::domain, "G_q needs t >= 0");
  if (std::isinf(t)) {
    if (table.q() > 0) return table.q() / table.phi_q();
    // q = 0: P(tau_0^+ = inf), positive only in the subcritical regime
    if (table.eta() > 0) return 0.0;
    return std::max(0.0, table.psi_prime_at_zero());
  }
  check_in_table(table, t, "G_q argument");
  return (1.0 + table.q() * table.integral(t)) / table.W(t);
}

auto G_q_derivative(const ScaleTable& table, double t) -> double {
  require(t >= 0, Errc::domain, "G_q' needs t >= 0");
  check_in_table(table, t, "G_q' argument");
  double h = table.step();
  double lo = std::max(0.0, t - h);
  double hi = std::min(table.x_max(), t + h);
  for (double x : table.measure().lifetime().jump_points()) {
    if (x >= lo && x <= hi) {
      fail(Errc::unsupported, "G_q' stencil at t = " + std::to_string(t) +
                                  " straddles an atom of the lifespan measure at " +
                                  std::to_string(x));
    }
  }
  return (G_q(table, hi) - G_q(table, lo)) / (hi - lo);
}

auto resolvent_interval(const ScaleTable& table, double s, double y, double t) -> double {
  require(s > 0 && s <= t && y > 0 && y <= t, Errc::domain, "resolvent_interval needs s, y in (0, t]");
  check_in_table(table, t, "level t");
  double value = table.W(t - s) * table.W(y) / table.W(t);
  if (y > s) value -= table.W(y - s);
  return value;
}

auto resolvent_halfline(const ScaleTable& table, double s, double y) -> double {
  require(s >= 0 && y >= 0, Errc::domain, "resolvent_halfline needs s, y >= 0");
  check_in_table(table, s, "level s");
  double value = std::exp(-table.phi_q() * y) * table.W(s);
  if (s > y) value -= table.W(s - y);
  return value;
}

auto undershoot_overshoot_density(const ScaleTable& table, double s, double t, double y, double z)
    -> double {
  require(y > 0 && y < t, Errc::domain, "undershoot level must lie in (0, t)");
  require(z + y > t, Errc::domain, "jump must carry the process above t (z + y > t)");
  const auto& m = table.measure();
  require(m.has_density(), Errc::unsupported,
          "lifespan measure has no density; use the tail-weighted marginal");
  return resolvent_interval(table, s, y, t) * m.density(z);
}

auto upcross_lt(const ScaleTable& table, double s, double t) -> double {
  require(s > 0 && s <= t, Errc::domain, "upcross_lt needs 0 < s <= t");
  check_in_table(table, t, "level t");
  const auto& m = table.measure();
  std::vector<double> breaks{s};
  for (double x : m.lifetime().jump_points()) breaks.push_back(t - x);
  double head = table.W(t - s) / table.W(t);
  auto integrand = [&](double y) {
    double u = head * table.W(y) - (y > s ? table.W(y - s) : 0.0);
    return u * m.tail(t - y);
  };
  return quad::trapezoid(integrand, 0.0, t, table.step(), breaks);
}

auto numerical_laplace_transform(const ScaleTable& table, double a) -> double {
  require(a > table.phi_q(), Errc::domain, "Laplace transform needs a > phi(q)");
  auto W = table.values();
  double h = table.step();
  double sum = 0.0;
  for (std::size_t k = 0; k < W.size(); ++k) {
    double w = (k == 0 || k + 1 == W.size()) ? 0.5 : 1.0;
    sum += w * std::exp(-a * h * static_cast<double>(k)) * W[k];
  }
  double x_max = table.x_max();
  return sum * h + std::exp(-a * x_max) * W.back() / (a - table.phi_q());
}

}  // namespace splitree
