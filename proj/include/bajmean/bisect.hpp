#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace bajmean {

/// Stopping rule shared by all bisection-based solvers.
struct SolverConfig {
  /// Bisection stops once the bracket is narrower than
  /// x_tolerance * max(|lo|, |hi|, 1e-6).
  double x_tolerance = 1e-12;
  int max_iterations = 200;
};

/// Settings used where downstream finite differences need every last bit.
inline constexpr SolverConfig kFineSolver{1e-17, 400};

/// Largest u in [lo, hi] with f(u) <= y, for f nondecreasing on [lo, hi].
/// Maintains f(lo) <= y < f(hi); no continuity of f is required.
template <typename Fn>
double sup_not_above(const Fn& f, double y, double lo, double hi,
                     const SolverConfig& cfg = {}) {
  if (f(lo) > y) return lo;
  if (f(hi) <= y) return hi;
  auto small = [&](double width) {
    return width <= cfg.x_tolerance * std::max({std::fabs(lo), std::fabs(hi), 1e-6});
  };
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const double width = hi - lo;
    const double mid = lo + 0.5 * width;
    if (small(width) || !(lo < mid && mid < hi)) {
      return lo + 0.5 * (hi - lo);
    }
    if (f(mid) <= y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (small(hi - lo)) return lo + 0.5 * (hi - lo);
  throw ConvergenceError("bisection did not converge");
}

/// Zero of a nondecreasing function with phi(lo) <= 0 <= phi(hi).
template <typename Fn>
double bisect_root(const Fn& phi, double lo, double hi, const SolverConfig& cfg = {}) {
  return sup_not_above(phi, 0.0, lo, hi, cfg);
}

}  // namespace bajmean
