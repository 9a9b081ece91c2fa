#pragma once

#include <functional>
#include <span>

namespace splitree::quad {

// Adaptive Gauss-Kronrod (31-point) on [lo, hi]; hi may be +infinity.
auto integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol = 1e-10)
    -> double;

// Same, but splits [lo, hi] at every breakpoint strictly inside it, so that
// jump discontinuities of the integrand never sit inside a panel.
auto integrate(const std::function<double(double)>& f, double lo, double hi,
               std::span<const double> breakpoints, double abs_tol = 1e-10) -> double;

// Composite trapezoid with panels no wider than `step`, honoring breakpoints.
auto trapezoid(const std::function<double(double)>& f, double lo, double hi, double step,
               std::span<const double> breakpoints = {}) -> double;

}  // namespace splitree::quad
