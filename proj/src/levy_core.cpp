#include "splitree/levy_core.hpp"

#include <cmath>

#include "splitree/error.hpp"

namespace splitree {

namespace {
constexpr double root_tol = 1e-12;
constexpr int max_bisection_steps = 400;
}  // namespace

LifespanMeasure::LifespanMeasure(double birth_rate, LifetimeDistribution lifetime)
    : b_(birth_rate), lifetime_(std::move(lifetime)) {
  // b = 0 is accepted as the degenerate no-birth case (psi is the identity)
  require(std::isfinite(b_) && b_ >= 0, Errc::config, "birth rate must be finite and nonnegative");
}

LaplaceExponent::LaplaceExponent(LifespanMeasure measure) : measure_(std::move(measure)) {
  eta_ = find_eta();
}

auto LaplaceExponent::psi(double a) const -> double {
  require(a >= 0, Errc::domain, "psi is defined for a >= 0 only");
  double b = measure_.birth_rate();
  if (b == 0) return a;
  if (a == 0) return -measure_.mass_at_infinity();
  const auto& life = measure_.lifetime();
  double value = a - b * (a * life.laplace_tail(a) + life.mass_at_infinity());
  require(std::isfinite(value), Errc::config, "psi is not finite for " + life.description());
  return value;
}

auto LaplaceExponent::psi_prime(double a) const -> double {
  require(a >= 0, Errc::domain, "psi' is defined for a >= 0 only");
  double b = measure_.birth_rate();
  if (b == 0) return 1.0;
  return 1.0 - b * measure_.lifetime().laplace_first_moment(a);
}

auto LaplaceExponent::find_eta() const -> double {
  if (measure_.birth_rate() == 0) return 0.0;
  double hi = 1.0;
  while (psi(hi) <= 0) hi *= 2;
  double lo = 0.0;
  if (psi(0.0) == 0.0) {
    if (psi_prime(0.0) >= 0) return 0.0;
    // psi dips below zero: start the root search from the minimum of psi
    double a = 0.0, c = hi;
    for (int i = 0; i < max_bisection_steps && c - a > root_tol; ++i) {
      double m = 0.5 * (a + c);
      (psi_prime(m) < 0 ? a : c) = m;
    }
    lo = c;
    if (psi(lo) >= 0) return 0.0;  // numerically critical
  }
  for (int i = 0; i < max_bisection_steps && hi - lo > root_tol; ++i) {
    double m = 0.5 * (lo + hi);
    (psi(m) < 0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

auto LaplaceExponent::phi(double q) const -> double {
  require(q >= 0, Errc::domain, "phi is defined for q >= 0 only");
  if (q == 0) return eta_;
  if (measure_.birth_rate() == 0) return q;
  double lo = eta_;
  double hi = std::max(1.0, 2 * eta_) + q;
  while (psi(hi) <= q) hi *= 2;
  for (int i = 0; i < max_bisection_steps && hi - lo > root_tol * std::max(1.0, hi); ++i) {
    double m = 0.5 * (lo + hi);
    (psi(m) < q ? lo : hi) = m;
  }
  double a = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    double slope = psi_prime(a);
    if (!(slope > 0)) break;
    double next = a - (psi(a) - q) / slope;
    if (!(next >= lo && next <= hi)) break;
    a = next;
  }
  return a;
}

}  // namespace splitree
