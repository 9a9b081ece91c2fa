#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "splitree/error.hpp"
#include "splitree/levy_core.hpp"
#include "splitree/quadrature.hpp"

namespace splitree {
namespace {

auto exp_exponent(double b, double d) -> LaplaceExponent {
  return LaplaceExponent(LifespanMeasure(b, LifetimeDistribution::exponential(d)));
}

// Same law as exp:d but handed over as an opaque tail callback, so psi goes
// through adaptive quadrature instead of the closed form.
auto opaque_exponential(double d) -> LifetimeDistribution {
  LifetimeDistribution::Custom spec;
  spec.tail = [d](double x) { return std::exp(-d * x); };
  spec.sample = [d](Rng& rng) { return draw_exponential(rng, d); };
  spec.description = "opaque-exp";
  return LifetimeDistribution::custom(spec);
}

TEST(LaplaceExponent, PsiClosedFormValue) {
  auto ex = exp_exponent(0.8, 1.0);
  // a (a + d - b) / (a + d) at a = 1
  EXPECT_NEAR(ex.psi(1.0), 0.6, 1e-15);
  EXPECT_EQ(ex.psi(0.0), 0.0);
}

TEST(LaplaceExponent, NoBirthsIsIdentity) {
  auto ex = exp_exponent(0.0, 1.0);
  EXPECT_EQ(ex.psi(2.0), 2.0);
  EXPECT_EQ(ex.eta(), 0.0);
  EXPECT_EQ(ex.phi(5.0), 5.0);
}

TEST(LaplaceExponent, Eta) {
  EXPECT_NEAR(exp_exponent(1.5, 1.0).eta(), 0.5, 1e-12);
  EXPECT_EQ(exp_exponent(0.8, 1.0).eta(), 0.0);
  // critical: psi(a) = a^2 / (a + 1), only root 0
  EXPECT_NEAR(exp_exponent(1.0, 1.0).eta(), 0.0, 1e-9);
}

TEST(LaplaceExponent, Phi) {
  auto ex = exp_exponent(0.8, 1.0);
  EXPECT_NEAR(ex.phi(0.3), 0.6, 1e-12);
  EXPECT_EQ(ex.phi(0.0), ex.eta());
  auto super = exp_exponent(1.5, 1.0);
  EXPECT_NEAR(super.phi(0.0), 0.5, 1e-12);
}

TEST(LaplaceExponent, PhiInvertsPsiOnLogGrid) {
  for (double b : {0.5, 0.8, 1.0, 1.5, 3.0}) {
    auto ex = exp_exponent(b, 1.0);
    for (double lq = -4; lq <= 4; lq += 0.25) {
      double q = std::pow(10.0, lq);
      double a = ex.phi(q);
      EXPECT_NEAR(ex.psi(a), q, 1e-10 * q) << "b=" << b << " q=" << q;
      EXPECT_GE(a, q);
      EXPECT_GE(a, ex.eta());
    }
  }
}

TEST(LaplaceExponent, MonotoneAboveEta) {
  auto ex = exp_exponent(1.5, 1.0);
  double prev = ex.psi(ex.eta());
  for (double a = ex.eta() + 0.01; a < 50; a *= 1.3) {
    double cur = ex.psi(a);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(LaplaceExponent, QuadratureAgreesWithClosedForm) {
  for (double b : {0.8, 1.5}) {
    auto closed = exp_exponent(b, 1.0);
    LaplaceExponent quad(LifespanMeasure(b, opaque_exponential(1.0)));
    for (double a = 0.01; a <= 100; a *= 1.7) {
      EXPECT_NEAR(quad.psi(a), closed.psi(a), 1e-9 * std::abs(closed.psi(a)) + 1e-12) << a;
    }
    EXPECT_NEAR(quad.eta(), closed.eta(), 1e-10);
    EXPECT_NEAR(quad.phi(0.3), closed.phi(0.3), 1e-10);
  }
}

TEST(LaplaceExponent, KillingConvention) {
  // a quarter of lifetimes are infinite: pi({inf}) = b / 4
  LifespanMeasure m(0.8, LifetimeDistribution::exponential(1.0, 0.25));
  LaplaceExponent ex(m);
  EXPECT_DOUBLE_EQ(ex.psi(0.0), -0.2);
  EXPECT_GT(ex.eta(), 0.0);
  EXPECT_NEAR(ex.psi(ex.eta()), 0.0, 1e-11);
  // closed form a - 0.6 a/(a+1) - 0.2 at a = 2
  EXPECT_NEAR(ex.psi(2.0), 2.0 - 0.6 * 2.0 / 3.0 - 0.2, 1e-14);
}

TEST(LaplaceExponent, TableLifetimes) {
  // atoms at 1 and 2 with mass 1/2 each
  LifespanMeasure m(0.9, LifetimeDistribution::table({1.0, 2.0}, {0.5, 0.0}));
  LaplaceExponent ex(m);
  for (double a : {0.1, 1.0, 4.0}) {
    double expected = a - 0.9 * (1 - 0.5 * std::exp(-a) - 0.5 * std::exp(-2 * a));
    EXPECT_NEAR(ex.psi(a), expected, 1e-14);
  }
  EXPECT_NEAR(ex.psi(ex.phi(0.7)), 0.7, 1e-10);
}

TEST(LaplaceExponent, RejectsNegativeArguments) {
  auto ex = exp_exponent(0.8, 1.0);
  EXPECT_THROW(ex.psi(-1.0), Error);
  EXPECT_THROW(ex.phi(-1.0), Error);
}

TEST(LifetimeSpec, ParsesKnownFamilies) {
  auto e = parse_lifetime_spec("exp:2.5");
  ASSERT_TRUE(e.exponential_rate().has_value());
  EXPECT_EQ(*e.exponential_rate(), 2.5);
  auto d = parse_lifetime_spec("det:3");
  EXPECT_EQ(d.tail(2.999), 1.0);
  EXPECT_EQ(d.tail(3.0), 0.0);
  EXPECT_THROW(parse_lifetime_spec("weibull:2"), Error);
  EXPECT_THROW(parse_lifetime_spec("exp:-1"), Error);
  EXPECT_THROW(parse_lifetime_spec("exp:abc"), Error);
  EXPECT_THROW(parse_lifetime_spec("table:/nonexistent/file.csv"), Error);
}

TEST(LifetimeDistribution, TableSamplingMatchesTail) {
  auto d = LifetimeDistribution::table({1.0, 2.0, 5.0}, {0.7, 0.2, 0.1});
  Rng rng(7);
  int n = 200000, c1 = 0, c2 = 0, c5 = 0, cinf = 0;
  for (int i = 0; i < n; ++i) {
    double x = d.sample(rng);
    if (x == 1.0) ++c1;
    else if (x == 2.0) ++c2;
    else if (x == 5.0) ++c5;
    else if (std::isinf(x)) ++cinf;
  }
  EXPECT_EQ(c1 + c2 + c5 + cinf, n);
  EXPECT_NEAR(c1 / double(n), 0.3, 0.005);
  EXPECT_NEAR(c2 / double(n), 0.5, 0.005);
  EXPECT_NEAR(c5 / double(n), 0.1, 0.005);
  EXPECT_NEAR(cinf / double(n), 0.1, 0.005);
  EXPECT_NEAR(d.finite_mean(), 0.3 + 1.0 + 0.5, 1e-14);
}

}  // namespace
}  // namespace splitree
