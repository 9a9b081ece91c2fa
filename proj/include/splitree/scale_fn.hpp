#pragma once

#include <span>
#include <vector>

#include "splitree/levy_core.hpp"

namespace splitree {

inline constexpr double default_scale_step = 1e-3;

// Grid horizon used when the caller does not choose one: 20 / max(eta, 1/mean).
auto default_scale_horizon(const LaplaceExponent& exponent) -> double;

// Tabulated q-scale function W^(q) on the uniform grid {k h : 0 <= k <= n}.
//
// W^(q) is the solution of the renewal equation
//   W(x) = 1 + \int_0^x (q + pi_bar(y)) W(x - y) dy,
// which has Laplace transform 1 / (psi(a) - q). The equation is discretized by
// product trapezoidal integration: W is piecewise linear between grid nodes,
// and the kernel q + pi_bar is integrated exactly (5-point Gauss-Legendre on
// each cell, split at the jumps of pi_bar) against the hat functions. The
// resulting lower-triangular system is solved forward in O(n^2).
class ScaleTable {
 public:
  static auto build(const LaplaceExponent& exponent, double q, double h, double x_max) -> ScaleTable;

  auto q() const noexcept -> double { return q_; }
  auto step() const noexcept -> double { return h_; }
  auto x_max() const noexcept -> double { return h_ * static_cast<double>(values_.size() - 1); }
  auto size() const noexcept -> std::size_t { return values_.size(); }
  auto values() const noexcept -> std::span<const double> { return values_; }
  auto cumulative() const noexcept -> std::span<const double> { return cumulative_; }
  auto measure() const noexcept -> const LifespanMeasure& { return measure_; }
  // phi(q), needed for the half-line quantities
  auto phi_q() const noexcept -> double { return phi_q_; }
  auto eta() const noexcept -> double { return eta_; }
  auto psi_prime_at_zero() const noexcept -> double { return psi_prime0_; }

  // W^(q)(x) by linear interpolation; 0 for x < 0.
  auto W(double x) const -> double;
  // \int_0^x W^(q)(s) ds
  auto integral(double x) const -> double;

 private:
  ScaleTable(LifespanMeasure measure) : measure_(std::move(measure)) {}

  LifespanMeasure measure_;
  double q_ = 0.0;
  double h_ = 0.0;
  double phi_q_ = 0.0;
  double eta_ = 0.0;
  double psi_prime0_ = 1.0;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

// E_s(e^{-q rho_t}, tau_0 < tau_t^+) = W(t - s) / W(t).
auto exit_bottom_lt(const ScaleTable& table, double s, double t) -> double;

// G_q(t) = (1 + q \int_0^t W) / W(t); t = +inf gives q / phi(q).
auto G_q(const ScaleTable& table, double t) -> double;

// dG_q/dt by central differences on the grid (one-sided at the ends). Refuses
// stencils that straddle a jump of pi_bar.
auto G_q_derivative(const ScaleTable& table, double t) -> double;

// q-resolvent of the process killed on exiting (0, t]; s, y in (0, t].
auto resolvent_interval(const ScaleTable& table, double s, double y, double t) -> double;

// q-resolvent of the process killed on exiting (-inf, 0]; s, y >= 0.
auto resolvent_halfline(const ScaleTable& table, double s, double y) -> double;

// Density of (undershoot level y, jump size z) at the first passage above t
// before 0 from s, against dy dz: u_t^q(s, y) * pi'(z). Requires y in (0, t),
// z + y > t and a lifetime law with a density.
auto undershoot_overshoot_density(const ScaleTable& table, double s, double t, double y, double z)
    -> double;

// E_s(e^{-q rho_t}, tau_t^+ < tau_0) = \int_0^t u_t^q(s, y) pi_bar(t - y) dy,
// by composite trapezoid on the table step.
auto upcross_lt(const ScaleTable& table, double s, double t) -> double;

// \int_0^inf e^{-a x} W^(q)(x) dx from the table, with the tail beyond x_max
// closed by the exponential growth rate phi(q). Requires a > phi(q).
auto numerical_laplace_transform(const ScaleTable& table, double a) -> double;

}  // namespace splitree
