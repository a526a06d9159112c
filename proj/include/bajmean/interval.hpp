#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"

namespace bajmean {

/// Infinite endpoints are replaced by this value for any grid-based work.
inline constexpr double kClamp = 1e8;

/// Open endpoints are approached to within this fraction of the width.
inline constexpr double kEdgeFraction = 1e-9;

/// A nonempty open interval (lo, hi); endpoints may be infinite.
class Interval {
 public:
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
      throw SpecError("interval requires lo < hi");
    }
  }

  static Interval real_line() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  bool contains(double x) const noexcept { return lo_ < x && x < hi_; }

  /// Finite evaluation window: infinite ends replaced by the ±kClamp values.
  double clamped_lo() const noexcept { return std::isinf(lo_) ? -kClamp : lo_; }
  double clamped_hi() const noexcept { return std::isinf(hi_) ? kClamp : hi_; }

  /// Closest evaluation point to the lower end that still lies inside.
  double approach_lo() const noexcept {
    return std::isinf(lo_) ? clamped_lo() : lo_ + edge_margin();
  }
  double approach_hi() const noexcept {
    return std::isinf(hi_) ? clamped_hi() : hi_ - edge_margin();
  }

  double edge_margin() const noexcept {
    return kEdgeFraction * std::min(1.0, clamped_hi() - clamped_lo());
  }

  /// `count` points evenly spaced from approach_lo() to approach_hi().
  std::vector<double> grid(std::size_t count) const {
    if (count < 2) throw SpecError("grid needs at least two points");
    const double a = approach_lo();
    const double b = approach_hi();
    std::vector<double> pts(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(count - 1);
      pts[k] = a + (b - a) * t;
    }
    pts.back() = b;
    return pts;
  }

  /// Interior grid avoiding the ends: point k sits at quantile (k+0.5)/count.
  std::vector<double> midpoint_grid(std::size_t count) const {
    if (count < 1) throw SpecError("grid needs at least one point");
    std::vector<double> pts(count);
    for (std::size_t k = 0; k < count; ++k) {
      pts[k] = quantile((static_cast<double>(k) + 0.5) / static_cast<double>(count));
    }
    return pts;
  }

  /// Point at relative position t in (0, 1). Finite intervals are linear;
  /// an infinite end is reached through s/(1-s), so that (0, inf) has its
  /// median at 1 and the real line at 0.
  double quantile(double t) const noexcept {
    const bool inf_lo = std::isinf(lo_);
    const bool inf_hi = std::isinf(hi_);
    if (!inf_lo && !inf_hi) return lo_ + (hi_ - lo_) * t;
    if (inf_lo && inf_hi) return (t - 0.5) / (t * (1.0 - t));
    if (inf_hi) return lo_ + t / (1.0 - t);
    return hi_ - (1.0 - t) / t;
  }

  friend bool operator==(const Interval& a, const Interval& b) noexcept {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  double lo_;
  double hi_;
};

}  // namespace bajmean
