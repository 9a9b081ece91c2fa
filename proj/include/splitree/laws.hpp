#pragma once

#include <cstddef>
#include <optional>

#include "splitree/scale_fn.hpp"

namespace splitree {

// Law of (T, N_T) and of the ages / residual lifetimes at T for clock rate
// delta, all evaluated through a single scale table at q = delta.
class DetectionLaw {
 public:
  // h and x_max default to default_scale_step and default_scale_horizon.
  DetectionLaw(const LaplaceExponent& exponent, double delta, std::optional<double> h = {},
               std::optional<double> x_max = {});

  auto delta() const noexcept -> double { return delta_; }
  auto table() const noexcept -> const ScaleTable& { return table_; }
  auto phi_delta() const noexcept -> double { return table_.phi_q(); }
  // P(T < inf) = (phi(delta) - delta) / b
  auto p() const noexcept -> double { return p_; }
  auto G(double t) const -> double { return G_q(table_, t); }

  // P(N_T = n, T < inf); divided by p() when conditional.
  auto pmf_NT(std::size_t n, bool conditional = false) const -> double;
  // P(T < y); y may be +inf.
  auto cdf_T(double y, bool conditional = false) const -> double;
  // P(N_T = n, T in dt) / dt
  auto joint_density(std::size_t n, double t) const -> double;
  // P(N_T = n | T = t)
  auto conditional_pmf_given_T(std::size_t n, double t) const -> double;

  // Joint density of one carrier's (A, R) given N_T (and T < y when y is
  // finite). Needs a lifetime law with a density.
  auto age_residual_density(double y, double a, double r) const -> double;
  // Marginal density of A, which only needs the tail of pi.
  auto age_density(double y, double a) const -> double;
  // P(A in [a0, a1), R in [r0, r1)); r1 may be +inf (then the atom R = inf is included).
  auto age_residual_cell(double y, double a0, double a1, double r0, double r1) const -> double;

 private:
  auto window_norm(double y) const -> double;

  double b_;
  double delta_;
  double p_;
  ScaleTable table_;
};

// Law of N_t for the tree without detection clocks stopped at a fixed time t,
// weighted by survival of the clocks: pmf(n) = P(N_t = n, T > t) where q =
// table.q() is the clock rate (q = 0 gives the plain law of N_t).
struct FixedTimeLaw {
  double extinct = 0.0;   // P(N_t = 0, T > t)
  double first = 0.0;     // P(first visit of t happens and no ring before it), weighted
  double upcross = 0.0;   // E_t(e^{-q rho}, tau_t^+ < tau_0)
  double exit = 0.0;      // E_t(e^{-q rho}, tau_0 < tau_t^+) = 1 / W(t)

  auto pmf(std::size_t n) const -> double;
};

auto fixed_time_law(const ScaleTable& table, double t) -> FixedTimeLaw;

}  // namespace splitree
