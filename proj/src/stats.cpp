#include "splitree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "splitree/error.hpp"
#include "splitree/rng.hpp"

namespace splitree::stats {

auto kolmogorov_q(double lambda) -> double {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// Stephens' small-sample correction to the asymptotic distribution
auto ks_p(double d, double n_eff) -> double {
  double s = std::sqrt(n_eff);
  return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

}  // namespace

auto ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) -> TestResult {
  require(!sample.empty(), Errc::empty, "KS test on an empty sample");
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size()), d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_p(d, n), 0.0};
}

auto ks_two_sample(std::vector<double> a, std::vector<double> b) -> TestResult {
  require(!a.empty() && !b.empty(), Errc::empty, "KS test on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p(d, na * nb / (na + nb)), 0.0};
}

auto chi_square_sf(double x, double df) -> double {
  require(df > 0, Errc::domain, "chi-square test needs at least two bins after merging");
  if (x <= 0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

auto chi_square_gof(std::span<const double> counts, std::span<const double> probs, double total,
                    double min_expected) -> TestResult {
  require(counts.size() == probs.size() && !counts.empty(), Errc::domain, "counts and probabilities differ in length");
  std::vector<double> obs(counts.begin(), counts.end()), exp;
  for (double p : probs) exp.push_back(p * total);
  double rest_p = 1.0 - std::accumulate(probs.begin(), probs.end(), 0.0);
  double rest_obs = total - std::accumulate(counts.begin(), counts.end(), 0.0);
  if (rest_p * total > 1e-9 || rest_obs > 0) {
    obs.push_back(rest_obs);
    exp.push_back(std::max(rest_p, 0.0) * total);
  }
  std::vector<double> mo, me;
  double ao = 0, ae = 0;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    ao += obs[k];
    ae += exp[k];
    if (ae >= min_expected) {
      mo.push_back(ao);
      me.push_back(ae);
      ao = ae = 0;
    }
  }
  if (ae > 0 || ao > 0) {
    if (me.empty()) {
      mo.push_back(ao);
      me.push_back(ae);
    } else {
      mo.back() += ao;
      me.back() += ae;
    }
  }
  double x2 = 0.0;
  for (std::size_t k = 0; k < mo.size(); ++k) {
    if (me[k] > 0) x2 += (mo[k] - me[k]) * (mo[k] - me[k]) / me[k];
    else if (mo[k] > 0) x2 = std::numeric_limits<double>::infinity();
  }
  double df = static_cast<double>(mo.size()) - 1.0;
  return {x2, chi_square_sf(x2, df), df};
}

auto chi_square_two_sample(std::span<const double> a, std::span<const double> b, double min_expected)
    -> TestResult {
  require(a.size() == b.size() && !a.empty(), Errc::domain, "count vectors differ in length");
  double na = std::accumulate(a.begin(), a.end(), 0.0), nb = std::accumulate(b.begin(), b.end(), 0.0);
  require(na > 0 && nb > 0, Errc::empty, "two-sample chi-square on an empty sample");
  double n = na + nb;
  std::vector<double> ma, mb;
  double sa = 0, sb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sa += a[k];
    sb += b[k];
    double col = sa + sb;
    if (std::min(col * na / n, col * nb / n) >= min_expected) {
      ma.push_back(sa);
      mb.push_back(sb);
      sa = sb = 0;
    }
  }
  if (sa + sb > 0) {
    if (ma.empty()) {
      ma.push_back(sa);
      mb.push_back(sb);
    } else {
      ma.back() += sa;
      mb.back() += sb;
    }
  }
  double x2 = 0.0;
  for (std::size_t k = 0; k < ma.size(); ++k) {
    double col = ma[k] + mb[k];
    double ea = col * na / n, eb = col * nb / n;
    x2 += (ma[k] - ea) * (ma[k] - ea) / ea + (mb[k] - eb) * (mb[k] - eb) / eb;
  }
  double df = static_cast<double>(ma.size()) - 1.0;
  return {x2, chi_square_sf(x2, df), df};
}

auto pearson(std::span<const double> x, std::span<const double> y) -> double {
  require(x.size() == y.size() && x.size() > 1, Errc::domain, "correlation needs paired samples");
  auto sx = summarize(x), sy = summarize(y);
  if (sx.sd == 0 || sy.sd == 0) return 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] - sx.mean) * (y[i] - sy.mean);
  return c / (static_cast<double>(x.size() - 1) * sx.sd * sy.sd);
}

auto index_trend_test(std::span<const double> values, std::uint64_t seed, int rounds) -> TestResult {
  require(values.size() > 2, Errc::domain, "trend test needs at least three values");
  std::vector<double> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0.0);
  double observed = std::abs(pearson(values, idx));
  std::vector<double> perm(values.begin(), values.end());
  Rng rng(seed);
  int exceed = 0;
  for (int r = 0; r < rounds; ++r) {
    std::shuffle(perm.begin(), perm.end(), rng);
    if (std::abs(pearson(perm, idx)) >= observed) ++exceed;
  }
  return {observed, (exceed + 1.0) / (rounds + 1.0), 0.0};
}

auto summarize(std::span<const double> x) -> Summary {
  require(!x.empty(), Errc::empty, "summary of an empty sample");
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  double sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
  return {mean, sd};
}

auto binomial_z(double successes, double n, double p) -> double {
  double se = std::sqrt(p * (1 - p) / n);
  if (se == 0) return successes / n == p ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(successes / n - p) / se;
}

}  // namespace splitree::stats
