#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splitree/lifetime.hpp"
#include "splitree/tree_sim.hpp"

namespace splitree {

// Length of stay K in the hospital. Same specification formats as lifetimes;
// must have finite mean and no mass at +inf.
class StayDistribution {
 public:
  explicit StayDistribution(LifetimeDistribution K);

  auto K() const noexcept -> const LifetimeDistribution& { return K_; }
  auto mean() const noexcept -> double { return m_; }
  auto tail(double x) const -> double { return K_.tail(x); }
  // \int_0^x P(K > y) dy
  auto integrated_tail(double x) const -> double;
  // \int_0^inf P(K > x) (1 - e^{-g x}) dx
  auto h_normalizer(double g) const -> double;

  // Law of the infective lifetime V: mu(dx) = P(K > x) / m dx.
  auto infective_lifetime() const -> LifetimeDistribution;

  // Z from the size-biased law z P(K in dz) / m.
  auto sample_size_biased(Rng& rng) const -> double;

 private:
  LifetimeDistribution K_;
  double m_;
};

struct InfectionPair {
  double U;  // stay before infection
  double V;  // infective lifetime
};

auto sample_infection_pair(const StayDistribution& K, Rng& rng) -> InfectionPair;

// Density of H = U + A at y when g2 = phi(delta).
auto h_density(const StayDistribution& K, double g2, double y) -> double;
auto h_cdf(const StayDistribution& K, double g2, double y) -> double;

struct Outbreak {
  std::string id;
  std::string hospital;  // empty when not given
  std::vector<double> y;  // one duration per carrier
  auto size() const -> std::size_t { return y.size(); }
};

struct OutbreakDataset {
  std::vector<Outbreak> outbreaks;

  auto n() const -> std::size_t { return outbreaks.size(); }
  auto carriers() const -> std::size_t;  // s(n)
  void validate() const;
};

// CSV with header outbreak_id,y[,hospital]; one row per carrier.
auto read_outbreaks_csv(const std::string& path) -> OutbreakDataset;
void write_outbreaks_csv(const OutbreakDataset& data, const std::string& path);

auto log_likelihood(const OutbreakDataset& data, const StayDistribution& K, double g1, double g2) -> double;

struct Interval {
  double lo;
  double hi;
};

struct EstimationResult {
  double g1_hat = 0.0;
  double g2_hat = 0.0;
  double b_hat = 0.0;
  double delta_hat = 0.0;
  double log_likelihood = 0.0;
  Interval delta_ci{0.0, 0.0};
  Interval b_ci{0.0, 0.0};
  bool g1_at_boundary = false;
  std::size_t n = 0;
  std::size_t s = 0;
  std::size_t evaluations = 0;
  double score_g2 = 0.0;  // derivative of the g2 part in log g2 at the optimum
};

// Profile-likelihood intervals use a drop of chi2_1(0.95) / 2.
inline constexpr double profile_drop = 1.920729410347062;

// Profile intervals are skipped (left at {0, 0}) when with_intervals is false.
auto fit(const OutbreakDataset& data, const StayDistribution& K, bool with_intervals = true)
    -> EstimationResult;

// Common delta across hospitals, hospital-specific b (and K). Experimental.
struct HospitalFit {
  std::string hospital;
  double b_hat;
  double g2_hat;
};
struct PooledFit {
  double delta_hat = 0.0;
  Interval delta_ci{0.0, 0.0};
  double log_likelihood = 0.0;
  std::vector<HospitalFit> hospitals;
};
auto fit_per_hospital(const std::vector<std::pair<std::string, OutbreakDataset>>& groups,
                      const std::vector<StayDistribution>& stays) -> PooledFit;
auto split_by_hospital(const OutbreakDataset& data) -> std::vector<std::pair<std::string, OutbreakDataset>>;

// Detected outbreaks from trees with lifetime law mu and stays U attached,
// H = U + A per carrier. Trees are drawn until `count` detections or until
// `max_trees` trees (then Errc::empty if none was detected).
auto simulate_outbreaks(const StayDistribution& K, double b, double delta, std::size_t count,
                        std::uint64_t seed, unsigned workers = 0, std::size_t max_trees = 0)
    -> OutbreakDataset;

// Raw outcomes (ages, residuals and stays) behind simulate_outbreaks.
auto simulate_epidemic_trees(const StayDistribution& K, double b, double delta, std::size_t reps,
                             std::uint64_t seed, unsigned workers = 0) -> std::vector<DetectionOutcome>;

}  // namespace splitree
