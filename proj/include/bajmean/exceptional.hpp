#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "geninv.hpp"
#include "interval.hpp"
#include "mean.hpp"
#include "monotone.hpp"

namespace bajmean {

/// c0 + c1 t + c2 t^2.
struct QuadPoly {
  double c0 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;

  double operator()(double t) const noexcept { return c0 + t * (c1 + t * c2); }
  int degree() const noexcept { return c2 != 0.0 ? 2 : c1 != 0.0 ? 1 : 0; }
  double discriminant() const noexcept { return c1 * c1 - 4.0 * c0 * c2; }
};

/// P ∘ inner as an expression.
inline Expr poly_expr(const QuadPoly& p, const Expr& inner) {
  return p.c0 + p.c1 * inner + p.c2 * pow(inner, 2.0);
}

namespace detail {

/// x - a written as x + |a| when a is negative.
inline Expr shifted(const Expr& x, double a) { return a < 0.0 ? x + (-a) : x - a; }

/// Real roots r1 < r2 of a degree-2 polynomial with positive discriminant,
/// computed without cancellation.
inline std::pair<double, double> real_roots(const QuadPoly& p) {
  const double sq = std::sqrt(p.discriminant());
  const double t = -0.5 * (p.c1 + std::copysign(sq, p.c1));
  double r1 = t / p.c2;
  double r2 = p.c0 / t;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

inline void require_positive(const QuadPoly& p, const Interval& where, const char* name) {
  for (double t : where.grid(1024)) {
    if (!(p(t) > 0.0)) {
      throw SpecError(std::string(name) + " is not positive at t=" + format_number(t));
    }
  }
}

}  // namespace detail

/// Closed-form F with F' = 1/P on `where`, chosen by degree and discriminant:
/// linear, logarithmic, arctangent, rational, or log of a root ratio.
inline Expr primitive_of_reciprocal(const QuadPoly& p, const Interval& where) {
  detail::require_positive(p, where, "P");
  const Expr x = build::var();
  switch (p.degree()) {
    case 0:
      return x / p.c0;
    case 1:
      return ln(p.c1 * x + p.c0) / p.c1;
    default:
      break;
  }
  const double disc = p.discriminant();
  const double h = p.c1 / (2.0 * p.c2);
  if (disc < 0.0) {
    // P = c2 ((x + h)^2 + s^2)
    const double s = std::sqrt(-disc) / (2.0 * std::fabs(p.c2));
    return atan((x + h) / s) / (p.c2 * s);
  }
  if (disc == 0.0) return -1.0 / (p.c2 * (x + h));

  const auto [r1, r2] = detail::real_roots(p);
  const double mid = where.quantile(0.5);
  if (where.contains(r1) || where.contains(r2)) throw SpecError("P has a root in the interval");
  // 1/(c2 (x-r1)(x-r2)) integrates to ln|(x-r2)/(x-r1)| / (c2 (r2-r1)); the
  // orientation of the numerator keeps the logarithm's argument positive.
  const Expr num = (mid - r2) / (mid - r1) > 0.0 ? detail::shifted(x, r2)
                                                 : r2 - x;
  return ln(num / detail::shifted(x, r1)) / (p.c2 * (r2 - r1));
}

namespace detail {

/// Maximal open intervals where P > 0, infinite ends clamped later by the
/// caller. Ordered left to right.
inline std::vector<Interval> positive_components(const QuadPoly& p) {
  const double inf = std::numeric_limits<double>::infinity();
  if (p.degree() == 0) {
    if (p.c0 > 0.0) return {Interval(-inf, inf)};
    return {};
  }
  if (p.degree() == 1) {
    const double r = -p.c0 / p.c1;
    return {p.c1 > 0.0 ? Interval(r, inf) : Interval(-inf, r)};
  }
  const double disc = p.discriminant();
  if (disc < 0.0) {
    if (p.c2 > 0.0) return {Interval(-inf, inf)};
    return {};
  }
  if (disc == 0.0) {
    if (p.c2 < 0.0) return {};
    const double r = -p.c1 / (2.0 * p.c2);
    return {Interval(-inf, r), Interval(r, inf)};
  }
  const auto [r1, r2] = real_roots(p);
  if (p.c2 > 0.0) return {Interval(-inf, r1), Interval(r2, inf)};
  return {Interval(r1, r2)};
}

}  // namespace detail

/// The symmetric two-variable pair ((f, (p, p)), (g, (q, q))) with
///   F' = 1/P, G' = 1/Q, g = G^(-1) ∘ (α F∘f + β), p = P^(-1/2)∘f, q = Q^(-1/2)∘g,
/// together with the largest |A_{f,p} - A_{g,q}| seen on a check grid of I².
struct ExceptionalPair {
  MeanSpec first;
  MeanSpec second;
  Expr F;
  Expr G;
  double discrepancy = 0.0;
  bool verified = false;
};

inline ExceptionalPair exceptional_construct(const MonotoneFn& f, const QuadPoly& P,
                                             const QuadPoly& Q, double alpha, double beta,
                                             std::size_t check_grid = 20,
                                             double tolerance = 1e-8) {
  if (alpha == 0.0 || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw SpecError("alpha must be finite and nonzero");
  }
  const Interval& dom = f.domain();
  const Interval f_range = hull_range(f);
  const Expr F = primitive_of_reciprocal(P, f_range);
  const Expr inner = alpha * compose(F, f.expr()) + beta;

  // Range of αF∘f + β over I; monotone, so the ends bound it.
  const MonotoneFn h(inner, dom, alpha > 0.0 ? f.direction() : reversed(f.direction()));
  const Interval h_range = hull_range(h);

  // G lives on the component of {Q > 0} whose image under G covers h(I).
  std::optional<Expr> G;
  Expr g_expr = inner;
  for (const Interval& comp : detail::positive_components(Q)) {
    const Interval window(comp.approach_lo(), comp.approach_hi());
    const Expr candidate = primitive_of_reciprocal(Q, window);
    const double g_lo = eval(candidate, window.lo());
    const double g_hi = eval(candidate, window.hi());
    const double slack = 1e-9 * (1.0 + (g_hi - g_lo));
    if (!(h_range.lo() >= g_lo - slack && h_range.hi() <= g_hi + slack)) continue;
    G = candidate;
    if (Q.degree() == 0) {
      g_expr = Q.c0 * inner;
    } else if (Q.degree() == 1) {
      g_expr = (exp(Q.c1 * inner) - Q.c0) / Q.c1;
    } else {
      g_expr = build::inverse(candidate, window.lo(), window.hi(), inner);
    }
    break;
  }
  if (!G) throw SpecError("alpha F(f(I)) + beta escapes the range of G");

  MonotoneFn g(g_expr, dom, h.direction());
  const Expr p = pow(poly_expr(P, f.expr()), -0.5);
  const Expr q = pow(poly_expr(Q, g.expr()), -0.5);
  MeanSpec first(f, WeightSystem({p, p}, dom));
  MeanSpec second(std::move(g), WeightSystem({q, q}, dom));

  double worst = 0.0;
  const auto pts = dom.midpoint_grid(check_grid);
  for (double x : pts) {
    for (double y : pts) {
      const double xy[2] = {x, y};
      worst = std::max(worst, std::fabs(mean_eval(first, xy) - mean_eval(second, xy)));
    }
  }
  return {std::move(first), std::move(second), F, *G, worst, worst <= tolerance};
}

}  // namespace bajmean
