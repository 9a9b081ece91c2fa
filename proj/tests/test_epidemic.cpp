#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "splitree/epidemic.hpp"
#include "splitree/error.hpp"
#include "splitree/quadrature.hpp"
#include "splitree/stats.hpp"

namespace splitree {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

auto exp_stay(double nu) -> StayDistribution { return StayDistribution(LifetimeDistribution::exponential(nu)); }

auto dataset(const std::vector<std::vector<double>>& groups) -> OutbreakDataset {
  OutbreakDataset d;
  for (std::size_t i = 0; i < groups.size(); ++i) d.outbreaks.push_back({"o" + std::to_string(i), "", groups[i]});
  return d;
}

auto median(std::vector<double> v) -> double {
  std::sort(v.begin(), v.end());
  std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

TEST(Stay, RejectsInfiniteMass) {
  EXPECT_THROW(StayDistribution(LifetimeDistribution::exponential(1.0, 0.1)), Error);
}

TEST(Stay, PointMassGivesUniformU) {
  StayDistribution K(LifetimeDistribution::point_mass(2.0));
  std::vector<double> u;
  for (std::uint64_t rep = 0; rep < 5000; ++rep) {
    auto rng = replicate_rng(1, rep);
    auto p = sample_infection_pair(K, rng);
    EXPECT_NEAR(p.U + p.V, 2.0, 1e-12);
    u.push_back(p.U);
  }
  EXPECT_GT(stats::ks_one_sample(u, [](double x) { return std::clamp(x / 2, 0.0, 1.0); }).p_value, 0.01);
}

TEST(Stay, ExponentialStayGivesExponentialV) {
  auto K = exp_stay(1.5);
  std::vector<double> v;
  for (std::uint64_t rep = 0; rep < 5000; ++rep) {
    auto rng = replicate_rng(2, rep);
    v.push_back(sample_infection_pair(K, rng).V);
  }
  EXPECT_GT(stats::ks_one_sample(v, [](double x) { return 1 - std::exp(-1.5 * x); }).p_value, 0.01);
  auto mu = K.infective_lifetime();
  EXPECT_EQ(mu.exponential_rate().value_or(0.0), 1.5);
}

TEST(Stay, SizeBiasedMean) {
  // E(K^2) / m for the table K in {1, 3} with weights 1/2
  StayDistribution K(LifetimeDistribution::table({1.0, 3.0}, {0.5, 0.0}));
  EXPECT_NEAR(K.mean(), 2.0, 1e-12);
  const int reps = 50000;
  std::vector<double> z;
  for (int rep = 0; rep < reps; ++rep) {
    auto rng = replicate_rng(3, static_cast<std::uint64_t>(rep));
    z.push_back(K.sample_size_biased(rng));
  }
  auto s = stats::summarize(z);
  EXPECT_LE(std::abs(s.mean - 2.5) / (s.sd / std::sqrt(reps)), 3.0);
  auto E = exp_stay(1.0);
  z.clear();
  for (int rep = 0; rep < reps; ++rep) {
    auto rng = replicate_rng(4, static_cast<std::uint64_t>(rep));
    z.push_back(E.sample_size_biased(rng));
  }
  s = stats::summarize(z);
  EXPECT_LE(std::abs(s.mean - 2.0) / (s.sd / std::sqrt(reps)), 3.0);
}

TEST(Stay, TableInfectiveLifetime) {
  StayDistribution K(LifetimeDistribution::table({1.0, 3.0}, {0.5, 0.0}));
  auto mu = K.infective_lifetime();
  // P(V > x) = 1 - (1/m) \int_0^x P(K > y) dy
  EXPECT_NEAR(mu.tail(0.5), 1 - 0.5 / 2, 1e-12);
  EXPECT_NEAR(mu.tail(2.0), 1 - (1.0 + 0.5) / 2, 1e-12);
  EXPECT_NEAR(mu.tail(3.0), 0.0, 1e-12);
  EXPECT_NEAR(K.integrated_tail(10.0), 2.0, 1e-12);
}

TEST(HDensity, ExponentialClosedFormIsNormalized) {
  for (double nu : {0.5, 1.0, 3.0}) {
    auto K = exp_stay(nu);
    for (double g2 : {0.1, 0.6, 5.0}) {
      double total = quad::integrate([&](double y) { return h_density(K, g2, y); }, 0.0, inf, 1e-12);
      EXPECT_NEAR(total, 1.0, 1e-8);
      double y = 0.7;
      double generic = K.tail(y) * -std::expm1(-g2 * y) /
                       quad::integrate([&](double x) { return K.tail(x) * -std::expm1(-g2 * x); }, 0.0, inf, 1e-13);
      EXPECT_NEAR(h_density(K, g2, y), generic, 1e-9);
      EXPECT_NEAR(h_cdf(K, g2, y), quad::integrate([&](double x) { return h_density(K, g2, x); }, 0.0, y, 1e-13),
                  1e-9);
    }
  }
}

TEST(HDensity, TableStayIsNormalized) {
  StayDistribution K(LifetimeDistribution::table({1.0, 2.5, 4.0}, {0.6, 0.2, 0.0}));
  double total = quad::integrate([&](double y) { return h_density(K, 0.6, y); }, 0.0, 4.0,
                                 K.K().jump_points(), 1e-12);
  EXPECT_NEAR(total, 1.0, 1e-8);
  EXPECT_NEAR(h_cdf(K, 0.6, 4.0), 1.0, 1e-8);
  EXPECT_NEAR(h_cdf(K, 0.6, 2.0), quad::integrate([&](double y) { return h_density(K, 0.6, y); }, 0.0, 2.0,
                                                  K.K().jump_points(), 1e-12),
              1e-8);
}

TEST(HDensity, Limits) {
  auto K = exp_stay(1.0);
  EXPECT_EQ(h_density(K, 0.6, 0.0), 0.0);
  EXPECT_LT(h_density(K, 0.6, 1e-9), 1e-8);
  for (double y : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(h_density(K, 1e6, y), K.tail(y) / K.mean(), 1e-4);
  }
}

TEST(Likelihood, MatchesProductOfDensities) {
  auto K = exp_stay(1.2);
  auto d = dataset({{0.5, 1.3}, {2.0}, {0.1, 0.4, 3.3}});
  for (double g1 : {0.2, 0.5, 0.9}) {
    for (double g2 : {0.05, 0.6, 4.0}) {
      double brute = 3 * std::log(g1) + 3 * std::log(1 - g1);
      for (const auto& o : d.outbreaks) {
        for (double y : o.y) brute += std::log(h_density(K, g2, y));
      }
      EXPECT_NEAR(log_likelihood(d, K, g1, g2), brute, 1e-10);
    }
  }
}

TEST(Likelihood, SeparatesInG1AndG2) {
  auto K = exp_stay(1.0);
  auto d = dataset({{0.5, 1.3}, {2.0}, {0.1, 0.4, 3.3}});
  Rng rng(9);
  for (int k = 0; k < 50; ++k) {
    double g1 = draw_uniform(rng, 0.01, 0.99), g1p = draw_uniform(rng, 0.01, 0.99);
    double g2 = std::exp(draw_uniform(rng, -3, 3)), g2p = std::exp(draw_uniform(rng, -3, 3));
    double a = log_likelihood(d, K, g1, g2) - log_likelihood(d, K, g1p, g2);
    double b = log_likelihood(d, K, g1, g2p) - log_likelihood(d, K, g1p, g2p);
    EXPECT_NEAR(a, b, 1e-12 * (1 + std::abs(a)));
  }
}

TEST(Likelihood, ScoreInG1VanishesAtRatio) {
  auto K = exp_stay(1.0);
  auto d = dataset({{0.5, 1.3}, {2.0}, {0.1, 0.4, 3.3}});
  double g = 0.5, e = 1e-6;
  double score = (log_likelihood(d, K, g + e, 1.0) - log_likelihood(d, K, g - e, 1.0)) / (2 * e);
  EXPECT_NEAR(score, 0.0, 1e-5);
  EXPECT_THROW(log_likelihood(d, K, 0.0, 1.0), Error);
}

TEST(Fit, G1IsSizeRatio) {
  auto K = exp_stay(1.0);
  auto d = dataset({{0.4}, {0.9, 1.7}, {0.2, 2.2}, {0.6, 1.1, 0.3}});
  auto r = fit(d, K, false);
  EXPECT_EQ(r.g1_hat, 0.5);
  EXPECT_EQ(r.n, 4u);
  EXPECT_EQ(r.s, 8u);
  EXPECT_FALSE(r.g1_at_boundary);
  EXPECT_NEAR(r.delta_hat, r.g1_hat * r.g2_hat, 1e-15);
  EXPECT_NEAR(r.b_hat, K.mean() * r.g2_hat * 0.5 / K.h_normalizer(r.g2_hat), 1e-12);
  EXPECT_LT(std::abs(r.score_g2), 1e-4);
  // moving the durations does not move g1
  auto moved = d;
  for (auto& o : moved.outbreaks)
    for (auto& y : o.y) y *= 1.7;
  EXPECT_EQ(fit(moved, K, false).g1_hat, 0.5);
}

TEST(Fit, AllSingletonsSitOnG1Boundary) {
  auto K = exp_stay(1.0);
  auto d = dataset({{0.4}, {0.9}, {2.2}, {0.6}, {0.1}});
  auto r = fit(d, K, false);
  EXPECT_EQ(r.g1_hat, 1.0);
  EXPECT_TRUE(r.g1_at_boundary);
  EXPECT_EQ(r.b_hat, 0.0);
}

TEST(Fit, ScalingInvariance) {
  auto d = simulate_outbreaks(exp_stay(1.0), 0.8, 0.3, 200, 17);
  auto base = fit(d, exp_stay(1.0), false);
  for (double c : {0.25, 4.0}) {
    auto scaled = d;
    for (auto& o : scaled.outbreaks)
      for (auto& y : o.y) y *= c;
    auto r = fit(scaled, exp_stay(1.0 / c), false);
    EXPECT_EQ(r.g1_hat, base.g1_hat);
    EXPECT_NEAR(std::log(r.g2_hat), std::log(base.g2_hat / c), 1e-6) << c;
    EXPECT_NEAR(r.b_hat, base.b_hat / c, 1e-5 * base.b_hat / c);
  }
}

TEST(Fit, BoundaryMaximumIsNotIdentifiable) {
  auto K = exp_stay(1.0);
  auto d = dataset({{1e6, 2e6}, {3e6}});
  try {
    fit(d, K);
    FAIL() << "expected a non-identifiable error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_identifiable);
  }
  EXPECT_THROW(fit(OutbreakDataset{}, K), Error);
}

TEST(Fit, ProfileIntervalsBracketEstimate) {
  auto d = simulate_outbreaks(exp_stay(1.0), 0.8, 0.3, 500, 23);
  auto r = fit(d, exp_stay(1.0));
  EXPECT_LT(r.delta_ci.lo, r.delta_hat);
  EXPECT_GT(r.delta_ci.hi, r.delta_hat);
  EXPECT_LT(r.b_ci.lo, r.b_hat);
  EXPECT_GT(r.b_ci.hi, r.b_hat);
  // the drop at each end equals the chi-square cutoff
  double at_lo = 0, at_hi = 0;
  {
    // profile at the endpoints reconstructed by maximizing over g2 with g1 = delta / g2
    auto prof = [&](double delta) {
      double best = -inf;
      for (double x = -9.2; x <= 9.2; x += 0.002) {
        double g2 = std::exp(x), g1 = delta / g2;
        if (g1 <= 0 || g1 >= 1) continue;
        best = std::max(best, log_likelihood(d, exp_stay(1.0), g1, g2));
      }
      return best;
    };
    at_lo = r.log_likelihood - prof(r.delta_ci.lo);
    at_hi = r.log_likelihood - prof(r.delta_ci.hi);
  }
  EXPECT_NEAR(at_lo, profile_drop, 2e-3);
  EXPECT_NEAR(at_hi, profile_drop, 2e-3);
}

TEST(Fit, CorollaryDensityIsNormalized) {
  double b = 0.8, delta = 0.3, phi = 0.6, nu = 1.0, m = 1.0 / nu;
  // (b/m)(phi/(phi-delta)) \int\int e^{-phi a} P(K >= u + a) du da
  double inner = quad::integrate(
      [&](double a) {
        return std::exp(-phi * a) * quad::integrate([&](double u) { return std::exp(-nu * (u + a)); }, 0.0, inf, 1e-13);
      },
      0.0, inf, 1e-12);
  EXPECT_NEAR(b / m * phi / (phi - delta) * inner, 1.0, 1e-6);
}

TEST(Fit, RecoveryImprovesWithData) {
  auto K = exp_stay(1.0);
  std::vector<double> medians;
  for (std::size_t count : {125u, 250u, 500u, 1000u}) {
    std::vector<double> err;
    for (std::uint64_t rep = 0; rep < 40; ++rep) {
      auto d = simulate_outbreaks(K, 0.8, 0.3, count, 1000 * count + rep);
      err.push_back(std::abs(fit(d, K, false).delta_hat - 0.3));
    }
    medians.push_back(median(err));
  }
  for (std::size_t k = 1; k < medians.size(); ++k) {
    EXPECT_LT(medians[k], medians[k - 1]) << k;
  }
}

TEST(Simulate, SizesAndDurations) {
  auto K = exp_stay(1.0);
  auto d = simulate_outbreaks(K, 0.8, 0.3, 4000, 31);
  ASSERT_EQ(d.n(), 4000u);
  std::vector<double> counts(20, 0.0), probs(20, 0.0), ys;
  for (const auto& o : d.outbreaks) {
    if (o.size() <= counts.size()) counts[o.size() - 1] += 1;
    for (double y : o.y) ys.push_back(y);
  }
  for (std::size_t n = 1; n <= probs.size(); ++n) probs[n - 1] = std::pow(0.5, static_cast<double>(n));
  EXPECT_GT(stats::chi_square_gof(counts, probs, 4000).p_value, 0.01);
  EXPECT_GT(stats::ks_one_sample(ys, [&](double y) { return h_cdf(K, 0.6, y); }).p_value, 0.01);
}

TEST(Simulate, DeterministicAndWorkerIndependent) {
  auto K = exp_stay(1.0);
  auto a = simulate_outbreaks(K, 0.8, 0.3, 300, 5, 1);
  auto b = simulate_outbreaks(K, 0.8, 0.3, 300, 5, 3);
  ASSERT_EQ(a.n(), b.n());
  for (std::size_t i = 0; i < a.n(); ++i) {
    EXPECT_EQ(a.outbreaks[i].id, b.outbreaks[i].id);
    EXPECT_EQ(a.outbreaks[i].y, b.outbreaks[i].y);
  }
}

TEST(Simulate, EmptyBudget) {
  // clocks so slow that nothing is detected in a handful of trees
  EXPECT_THROW(simulate_outbreaks(exp_stay(1.0), 0.1, 1e-9, 5, 1, 1, 10), Error);
}

TEST(Csv, RoundTrip) {
  auto d = simulate_outbreaks(exp_stay(1.0), 0.8, 0.3, 50, 8);
  for (std::size_t i = 0; i < d.n(); ++i) d.outbreaks[i].hospital = i % 2 ? "north" : "south";
  auto path = (std::filesystem::temp_directory_path() / "splitree_roundtrip.csv").string();
  write_outbreaks_csv(d, path);
  auto back = read_outbreaks_csv(path);
  std::remove(path.c_str());
  ASSERT_EQ(back.n(), d.n());
  for (std::size_t i = 0; i < d.n(); ++i) {
    EXPECT_EQ(back.outbreaks[i].id, d.outbreaks[i].id);
    EXPECT_EQ(back.outbreaks[i].hospital, d.outbreaks[i].hospital);
    EXPECT_EQ(back.outbreaks[i].y, d.outbreaks[i].y);
  }
  auto groups = split_by_hospital(back);
  EXPECT_EQ(groups.size(), 2u);
}

TEST(Csv, RejectsBadInput) {
  auto path = (std::filesystem::temp_directory_path() / "splitree_bad.csv").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("outbreak_id,y\na,1.0\na,-2\n", f);
    std::fclose(f);
  }
  EXPECT_THROW(read_outbreaks_csv(path), Error);
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("id,duration\na,1.0\n", f);
    std::fclose(f);
  }
  EXPECT_THROW(read_outbreaks_csv(path), Error);
  std::remove(path.c_str());
  EXPECT_THROW(read_outbreaks_csv("/nonexistent/x.csv"), Error);
}

TEST(PerHospital, CommonDeltaAcrossHospitals) {
  auto K = exp_stay(1.0);
  auto north = simulate_outbreaks(K, 0.8, 0.3, 600, 51);
  auto south = simulate_outbreaks(K, 0.5, 0.3, 600, 52);
  std::vector<std::pair<std::string, OutbreakDataset>> groups{{"north", north}, {"south", south}};
  auto pooled = fit_per_hospital(groups, {K});
  EXPECT_LT(std::abs(pooled.delta_hat - 0.3) / 0.3, 0.3);
  EXPECT_LT(pooled.delta_ci.lo, pooled.delta_hat);
  EXPECT_GT(pooled.delta_ci.hi, pooled.delta_hat);
  ASSERT_EQ(pooled.hospitals.size(), 2u);
  EXPECT_GT(pooled.hospitals[0].b_hat, pooled.hospitals[1].b_hat);
  EXPECT_THROW(fit_per_hospital(groups, {K, K, K}), Error);
}

}  // namespace
}  // namespace splitree
