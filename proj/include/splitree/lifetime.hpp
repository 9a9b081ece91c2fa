#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitree/rng.hpp"

namespace splitree {

// Probability law on (0, +inf], possibly with an atom at +inf.
//
// Three representations are supported: exponential (closed forms available),
// a piecewise-constant empirical tail read from a table, and a generic tail
// callback evaluated by quadrature. The tail P(L > x) is right-continuous and
// decreases from 1 to mass_at_infinity().
class LifetimeDistribution {
 public:
  enum class Kind { exponential, table, custom };

  struct Custom {
    std::function<double(double)> tail;  // P(L > x), including the atom at +inf
    std::function<double(double)> density;  // optional; density of the finite part
    std::function<double(Rng&)> sample;
    double mass_at_infinity = 0.0;
    std::string description = "custom";
  };

  static auto exponential(double rate, double mass_at_infinity = 0.0) -> LifetimeDistribution;
  // Tail equals tails[k] on [xs[k], xs[k+1]) and 1 before xs[0]; the lifetime
  // has atoms at the xs, and tails.back() is the mass at +inf.
  static auto table(std::vector<double> xs, std::vector<double> tails) -> LifetimeDistribution;
  static auto point_mass(double c) -> LifetimeDistribution;
  static auto custom(Custom spec) -> LifetimeDistribution;

  auto kind() const noexcept -> Kind { return kind_; }
  auto exponential_rate() const -> std::optional<double>;
  auto mass_at_infinity() const noexcept -> double { return inf_mass_; }

  auto tail(double x) const -> double;
  auto has_density() const noexcept -> bool;
  auto density(double x) const -> double;
  auto sample(Rng& rng) const -> double;

  // Jump locations of the tail inside (0, inf).
  auto jump_points() const -> std::span<const double>;
  // Tail values right of each jump point (table kind only; empty otherwise).
  auto jump_tails() const -> std::span<const double>;

  // E[L; L < inf]
  auto finite_mean() const -> double;
  // E[L^2; L < inf]
  auto second_moment() const -> double;
  // \int_0^inf e^{-a x} (P(L > x) - P(L = inf)) dx, a >= 0.
  auto laplace_tail(double a) const -> double;
  // E[L e^{-a L}; L < inf], a >= 0.
  auto laplace_first_moment(double a) const -> double;

  auto description() const -> std::string;

 private:
  LifetimeDistribution() = default;

  Kind kind_ = Kind::exponential;
  double rate_ = 1.0;
  double inf_mass_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> tails_;
  Custom custom_;
  double cached_mean_ = 0.0;
};

// "exp:<rate>", "table:<path>" (CSV x,tail) or "det:<value>".
auto parse_lifetime_spec(const std::string& spec) -> LifetimeDistribution;

auto read_tail_table(const std::string& path) -> LifetimeDistribution;

}  // namespace splitree
