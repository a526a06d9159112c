#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "bisect.hpp"
#include "errors.hpp"
#include "interval.hpp"
#include "monotone.hpp"

namespace bajmean {

namespace detail {

/// f evaluated as close to one end of the domain as evaluation allows,
/// backing off inward by decades when evaluation fails.
inline double edge_value(const MonotoneFn& f, bool upper) {
  const Interval& dom = f.domain();
  const double end = upper ? dom.hi() : dom.lo();
  const double inward = upper ? -1.0 : 1.0;
  double margin = std::isinf(end) ? 0.0 : dom.edge_margin();
  const double base = upper ? dom.clamped_hi() : dom.clamped_lo();
  const double width = dom.clamped_hi() - dom.clamped_lo();
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double x = base + inward * margin;
    if (dom.contains(x)) {
      try {
        return f(x);
      } catch (const DomainError&) {
      }
    }
    margin = margin == 0.0 ? 1e-9 * std::min(1.0, width) : margin * 10.0;
  }
  throw DomainError("generator cannot be evaluated near the domain end");
}

}  // namespace detail

/// Estimate of conv(f(I)) = (inf f(I), sup f(I)) for strictly monotone f,
/// from evaluation at the clamped/approached domain ends. The grid size is
/// the certification grid used to double check that no interior sample
/// escapes the estimate.
inline Interval hull_range(const MonotoneFn& f, std::size_t grid_size = 64) {
  const double a = detail::edge_value(f, false);
  const double b = detail::edge_value(f, true);
  double lo = std::min(a, b);
  double hi = std::max(a, b);
  for (double x : f.domain().grid(std::max<std::size_t>(grid_size, 2))) {
    const double y = f(x);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  if (!(lo < hi)) throw DomainError("generator range collapsed to a point");
  return {lo, hi};
}

/// The generalized left inverse f^(-1) : conv(f(I)) -> I of a strictly
/// monotone, possibly discontinuous f. For increasing f,
/// f^(-1)(y) = sup{u in I : f(u) <= y}; decreasing f is reflected to -f.
class LeftInverse {
 public:
  explicit LeftInverse(MonotoneFn source, SolverConfig config = {})
      : source_(std::move(source)), range_hull_(hull_range(source_)), config_(config) {}

  const MonotoneFn& source() const noexcept { return source_; }
  const Interval& range_hull() const noexcept { return range_hull_; }
  const SolverConfig& config() const noexcept { return config_; }

  double operator()(double y) const { return eval(y); }

  /// f^(-1)(y). y may sit on the closure of the hull up to a small tolerance.
  double eval(double y) const {
    const double width = range_hull_.hi() - range_hull_.lo();
    const double slack = 1e-9 * (1.0 + width);
    if (!(y > range_hull_.lo() - slack && y < range_hull_.hi() + slack)) {
      throw DomainError("left inverse: value " + format_number(y) + " outside conv(f(I))");
    }
    const Interval& dom = source_.domain();
    return eval_bracketed(y, dom.approach_lo(), dom.approach_hi(), config_);
  }

  /// f^(-1)(y) computed on [lo, hi], valid when y lies between f(lo) and
  /// f(hi); then the sup over [lo, hi] coincides with the sup over I.
  double eval_bracketed(double y, double lo, double hi, const SolverConfig& cfg) const {
    if (source_.increasing()) {
      return sup_not_above([this](double u) { return source_(u); }, y, lo, hi, cfg);
    }
    return sup_not_above([this](double u) { return -source_(u); }, -y, lo, hi, cfg);
  }

 private:
  MonotoneFn source_;
  Interval range_hull_;
  SolverConfig config_;
};

inline double left_inverse_eval(const LeftInverse& g, double y) { return g.eval(y); }

/// Residuals of the three left-inverse identities on sample grids.
///  - smf1: max |g(f(x)) - x| / (1 + |x|) over a grid in I
///  - smf2: max |f(g(y)) - y| over hull grid values lying in f(I)
///  - smf3: max violation of liminf f <= y <= limsup f at g(y), all hull
///    grid values; gap_points counts values inside a jump gap
struct SmfReport {
  bool smf1_pass = false;
  double smf1_residual = 0.0;
  bool smf2_pass = false;
  double smf2_residual = 0.0;
  std::size_t smf2_checked = 0;
  bool smf3_pass = false;
  double smf3_residual = 0.0;
  std::size_t gap_points = 0;

  bool all_pass() const noexcept { return smf1_pass && smf2_pass && smf3_pass; }
};

/// Gap detection uses one-sided samples at distance 1e-10 of the domain
/// width; a difference above 1e-6 of the hull width counts as a jump.
inline SmfReport verify_smf(const MonotoneFn& f, const LeftInverse& g, std::size_t grid_size,
                            double tolerance = 1e-10) {
  SmfReport rep;
  const Interval& dom = f.domain();
  for (double x : dom.grid(grid_size)) {
    rep.smf1_residual = std::max(rep.smf1_residual, std::fabs(g(f(x)) - x) / (1.0 + std::fabs(x)));
  }

  const Interval& hull = g.range_hull();
  const double hull_width = hull.hi() - hull.lo();
  const double h = 1e-10 * std::min(1.0, dom.clamped_hi() - dom.clamped_lo());
  const double jump_threshold = 1e-6 * hull_width;
  const double y_tol = tolerance * (1.0 + hull_width);

  for (double y : hull.grid(grid_size)) {
    const double x = g(y);
    const double left = dom.contains(x - h) ? f(x - h) : f(x);
    const double right = dom.contains(x + h) ? f(x + h) : f(x);
    const double fx = f(x);
    const double lower = std::min(left, right);
    const double upper = std::max(left, right);
    const bool jump = upper - lower > jump_threshold;
    const bool in_range = !jump || std::fabs(fx - y) <= y_tol;
    if (in_range) {
      rep.smf2_residual = std::max(rep.smf2_residual, std::fabs(fx - y));
      ++rep.smf2_checked;
    } else {
      ++rep.gap_points;
    }
    // For continuous f the one-sided samples bracket f(x) only up to the
    // slope times h; widen by that amount.
    const double slack = jump ? 0.0 : std::max(std::fabs(fx - left), std::fabs(right - fx));
    const double violation =
        std::max({0.0, lower - slack - y, y - (upper + slack)});
    rep.smf3_residual = std::max(rep.smf3_residual, violation);
  }

  rep.smf1_pass = rep.smf1_residual <= tolerance;
  rep.smf2_pass = rep.smf2_residual <= y_tol;
  rep.smf3_pass = rep.smf3_residual <= y_tol;
  return rep;
}

}  // namespace bajmean
