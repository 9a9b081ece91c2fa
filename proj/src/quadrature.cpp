#include "splitree/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace splitree::quad {

namespace {

auto cut_points(double lo, double hi, std::span<const double> breakpoints) -> std::vector<double> {
  std::vector<double> pts{lo};
  for (double b : breakpoints) {
    if (b > lo && b < hi) pts.push_back(b);
  }
  std::sort(pts.begin() + 1, pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.push_back(hi);
  return pts;
}

}  // namespace

auto integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol)
    -> double {
  using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (!(hi > lo)) return 0.0;
  // Boost's tolerance is relative to the L1 norm and its error estimate has an
  // absolute roundoff floor, so a single pass gives the norm first
  double err = 0.0, l1 = 0.0;
  double v = gk::integrate(f, lo, hi, 0, 1.0, &err, &l1);
  if (err <= abs_tol || l1 == 0.0) return v;
  double rel = std::max(abs_tol / l1, 1e-14);
  return gk::integrate(f, lo, hi, 15, rel, &err);
}

auto integrate(const std::function<double(double)>& f, double lo, double hi,
               std::span<const double> breakpoints, double abs_tol) -> double {
  auto pts = cut_points(lo, hi, breakpoints);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += integrate(f, pts[i], pts[i + 1], abs_tol);
  return total;
}

auto trapezoid(const std::function<double(double)>& f, double lo, double hi, double step,
               std::span<const double> breakpoints) -> double {
  if (!(hi > lo)) return 0.0;
  auto pts = cut_points(lo, hi, breakpoints);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i], b = pts[i + 1];
    auto n = std::max<long>(1, static_cast<long>(std::ceil((b - a) / step - 1e-9)));
    double h = (b - a) / static_cast<double>(n);
    // one-sided limits at every panel end keep jumps at breakpoints (and at lo, hi) out of the sum;
    // the offset is far above rounding in arguments like a + r built by the caller
    double eps = std::min(1e-12 * std::max(1.0, std::abs(b)), 1e-3 * (b - a));
    double s = 0.5 * (f(a + eps) + f(b - eps));
    for (long k = 1; k < n; ++k) s += f(a + static_cast<double>(k) * h);
    total += s * h;
  }
  return total;
}

}  // namespace splitree::quad
