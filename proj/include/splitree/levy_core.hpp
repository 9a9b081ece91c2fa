#pragma once

#include "splitree/lifetime.hpp"

namespace splitree {

// Birth rate b together with the lifetime law mu; the lifespan measure is
// pi = b * mu on (0, +inf], with tail pi_bar(x) = b * P(L > x).
class LifespanMeasure {
 public:
  LifespanMeasure(double birth_rate, LifetimeDistribution lifetime);

  auto birth_rate() const noexcept -> double { return b_; }
  auto lifetime() const noexcept -> const LifetimeDistribution& { return lifetime_; }

  auto tail(double x) const -> double { return b_ * lifetime_.tail(x); }
  // pi({+inf}), the killing rate of the associated Levy process
  auto mass_at_infinity() const -> double { return b_ * lifetime_.mass_at_infinity(); }
  auto density(double x) const -> double { return b_ * lifetime_.density(x); }
  auto has_density() const noexcept -> bool { return lifetime_.has_density(); }

 private:
  double b_;
  LifetimeDistribution lifetime_;
};

// Laplace exponent psi(a) = a - \int pi(dx) (1 - e^{-a x}) of the slope -1
// compound Poisson process with jump measure pi, with its largest root eta and
// its inverse phi on [eta, inf). eta is computed once at construction.
class LaplaceExponent {
 public:
  explicit LaplaceExponent(LifespanMeasure measure);

  auto measure() const noexcept -> const LifespanMeasure& { return measure_; }

  // psi(0) is -pi({+inf}) by convention.
  auto psi(double a) const -> double;
  auto psi_prime(double a) const -> double;
  auto eta() const noexcept -> double { return eta_; }
  auto phi(double q) const -> double;

 private:
  auto find_eta() const -> double;

  LifespanMeasure measure_;
  double eta_ = 0.0;
};

}  // namespace splitree
