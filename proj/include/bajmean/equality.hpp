#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "geninv.hpp"
#include "jets.hpp"
#include "mean.hpp"
#include "monotone.hpp"

namespace bajmean {

/// Coefficients of t -> (a t + b) / (c t + d), ad - bc != 0.
struct MobiusParams {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;

  double det() const noexcept { return a * d - b * c; }

  double max_abs() const noexcept {
    return std::max({std::fabs(a), std::fabs(b), std::fabs(c), std::fabs(d)});
  }

  bool degenerate() const noexcept {
    const double m = max_abs();
    return !(std::fabs(det()) > 1e-12 * m * m);
  }

  MobiusParams scaled(double s) const noexcept { return {s * a, s * b, s * c, s * d}; }

  double apply(double t) const { return (a * t + b) / (c * t + d); }
  double denominator(double t) const noexcept { return c * t + d; }
};

/// (a f + b) / (c f + d) as an expression.
inline Expr mobius_expr(const MobiusParams& m, const Expr& f) {
  return (m.a * f + m.b) / (m.c * f + m.d);
}

/// c f + d as an expression.
inline Expr mobius_factor(const MobiusParams& m, const Expr& f) { return m.c * f + m.d; }

struct TransformedPair {
  MonotoneFn generator;
  WeightSystem weights;
};

inline constexpr std::size_t kDefaultVerifyGrid = 1024;

/// g = (a f + b)/(c f + d), q_i = (c f + d) p_i. Requires c f + d > 0 on a
/// verification grid of the domain.
inline TransformedPair mobius_transform(const MonotoneFn& f, const WeightSystem& p,
                                        const MobiusParams& m,
                                        std::size_t verify_grid = kDefaultVerifyGrid) {
  if (m.degenerate()) throw SpecError("Möbius parameters have ad - bc = 0");
  for (double x : f.domain().grid(verify_grid)) {
    if (!(m.denominator(f(x)) > 0.0)) {
      throw SpecError("c f + d is not positive at x=" + format_number(x));
    }
  }
  const Expr factor = mobius_factor(m, f.expr());
  std::vector<Expr> q;
  q.reserve(p.size());
  for (const Expr& pi : p.weights()) q.push_back(factor * pi);
  const Direction dir = m.det() > 0.0 ? f.direction() : reversed(f.direction());
  return {MonotoneFn(mobius_expr(m, f.expr()), f.domain(), dir, verify_grid),
          WeightSystem(std::move(q), p.domain())};
}

inline MeanSpec mobius_transform(const MeanSpec& spec, const MobiusParams& m) {
  auto [g, q] = mobius_transform(spec.generator(), spec.weights(), m);
  return MeanSpec(std::move(g), std::move(q), spec.inverse().config());
}

// ---------------------------------------------------------------------------
// Grid checks with hysteresis

enum class Band { Pass, Ambiguous, Fail };

inline const char* to_string(Band b) noexcept {
  return b == Band::Pass ? "pass" : b == Band::Fail ? "fail" : "ambiguous";
}

/// Residuals at or below `pass` pass, at or above `fail` fail, and anything
/// between is ambiguous.
struct Tolerances {
  double pass = 1e-7;
  double fail = 1e-4;

  Band classify(double residual) const noexcept {
    if (!(residual == residual)) return Band::Fail;
    if (residual <= pass) return Band::Pass;
    if (residual >= fail) return Band::Fail;
    return Band::Ambiguous;
  }
};

/// Outcome of one grid check: the worst residual and where it occurred.
struct CheckResult {
  Band band = Band::Pass;
  double residual = 0.0;
  double at = 0.0;          // grid point of the worst residual
  std::size_t index = 0;    // weight index of the worst residual, if any
  double value = 0.0;       // check-specific estimate (γ for the gamma check)

  bool passed() const noexcept { return band == Band::Pass; }
};

namespace detail {

inline void require_compatible(const MeanSpec& a, const MeanSpec& b) {
  if (a.arity() != b.arity()) throw SpecError("specs differ in arity");
  if (!(a.domain() == b.domain())) throw SpecError("specs differ in domain");
}

inline double first_derivative(const Expr& e, double x) {
  const double d = jet_eval(e, x).d1;
  if (!(std::fabs(d) > kVanishingDerivative)) {
    throw VanishingDerivativeError("vanishing first derivative at x=" + format_number(x));
  }
  return d;
}

}  // namespace detail

/// max over grid and i of |q_i/q_0 - p_i/p_0|.
inline CheckResult check_ratio_condition(const MeanSpec& a, const MeanSpec& b,
                                         const std::vector<double>& grid,
                                         const Tolerances& tol = {}) {
  detail::require_compatible(a, b);
  CheckResult out;
  for (double x : grid) {
    const double p0 = a.weights().total(x);
    const double q0 = b.weights().total(x);
    for (std::size_t i = 0; i < a.arity(); ++i) {
      const double r = std::fabs(b.weights().value(i, x) / q0 - a.weights().value(i, x) / p0);
      if (r > out.residual) out = {Band::Pass, r, x, i, 0.0};
    }
  }
  out.band = tol.classify(out.residual);
  return out;
}

/// γ(x) = q_i(x)^2 g'(x) / (p_i(x)^2 f'(x)).
inline double gamma_at(const MeanSpec& a, const MeanSpec& b, std::size_t i, double x) {
  const double p = a.weights().value(i, x);
  const double q = b.weights().value(i, x);
  return q * q * detail::first_derivative(b.generator().expr(), x) /
         (p * p * detail::first_derivative(a.generator().expr(), x));
}

/// Checks that γ(x) is constant; `value` carries the median estimate and
/// the residual is max |γ(x) - median| / (1 + |median|).
inline CheckResult check_gamma_condition(const MeanSpec& a, const MeanSpec& b,
                                         const std::vector<double>& grid,
                                         const Tolerances& tol = {}) {
  detail::require_compatible(a, b);
  struct Sample {
    double gamma;
    double x;
    std::size_t i;
  };
  std::vector<Sample> samples;
  for (double x : grid) {
    for (std::size_t i = 0; i < a.arity(); ++i) samples.push_back({gamma_at(a, b, i, x), x, i});
  }
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.gamma);
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double median = *mid;

  CheckResult out;
  out.value = median;
  for (const auto& s : samples) {
    const double r = std::fabs(s.gamma - median) / (1.0 + std::fabs(median));
    if (r > out.residual) {
      out.residual = r;
      out.at = s.x;
      out.index = s.i;
    }
  }
  out.band = tol.classify(out.residual);
  return out;
}

/// max |S(f) - S(g)| / (1 + max |S(f)|) over the grid.
inline CheckResult schwarzian_equal(const Expr& f, const Expr& g, const std::vector<double>& grid,
                                    const Tolerances& tol = {}) {
  double scale = 0.0;
  std::vector<double> diffs;
  diffs.reserve(grid.size());
  for (double x : grid) {
    const double sf = schwarzian(f, x);
    const double sg = schwarzian(g, x);
    scale = std::max(scale, std::fabs(sf));
    diffs.push_back(std::fabs(sf - sg));
  }
  CheckResult out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = diffs[k] / (1.0 + scale);
    if (r > out.residual) {
      out.residual = r;
      out.at = grid[k];
    }
  }
  out.band = tol.classify(out.residual);
  return out;
}

// ---------------------------------------------------------------------------
// Möbius recovery

class RankDeficientError : public Error {
 public:
  using Error::Error;
};

/// Möbius parameters fitted through three sample points, with the worst
/// validation residual max |g - (a f + b)/(c f + d)| / (1 + |g|).
struct MobiusFit {
  MobiusParams params;
  double residual = 0.0;
  double at = 0.0;
  bool valid = false;
};

namespace detail {

/// Validation residual of `m` on the grid; infinity when c f + d changes
/// sign or vanishes.
inline std::pair<double, double> mobius_residual(const Expr& f, const Expr& g,
                                                 const MobiusParams& m,
                                                 const std::vector<double>& grid) {
  double worst = 0.0;
  double at = grid.empty() ? 0.0 : grid.front();
  for (double x : grid) {
    const double fx = eval(f, x);
    const double gx = eval(g, x);
    const double den = m.denominator(fx);
    if (!(den > 0.0)) return {std::numeric_limits<double>::infinity(), x};
    const double r = std::fabs(gx - m.apply(fx)) / (1.0 + std::fabs(gx));
    if (r > worst) {
      worst = r;
      at = x;
    }
  }
  return {worst, at};
}

}  // namespace detail

/// Solves g(x_t)(c f(x_t) + d) = a f(x_t) + b for t = 1, 2, 3. The null
/// vector of the 3x4 system is the vector of signed 3x3 minors; it is
/// scaled so the largest entry has magnitude 1 and c f + d > 0 on the grid.
inline MobiusFit recover_mobius(const Expr& f, const Expr& g, const std::array<double, 3>& points,
                                const std::vector<double>& validation_grid,
                                double tolerance = 1e-7) {
  std::array<std::array<double, 4>, 3> rows{};
  double row_scale = 1.0;
  for (std::size_t t = 0; t < 3; ++t) {
    const double fx = eval(f, points[t]);
    const double gx = eval(g, points[t]);
    rows[t] = {fx, 1.0, -gx * fx, -gx};
    double norm = 0.0;
    for (double v : rows[t]) norm += v * v;
    row_scale *= std::sqrt(norm);
  }
  auto minor = [&](std::size_t skip) {
    std::array<std::array<double, 3>, 3> m{};
    for (std::size_t r = 0; r < 3; ++r) {
      std::size_t col = 0;
      for (std::size_t cidx = 0; cidx < 4; ++cidx) {
        if (cidx != skip) m[r][col++] = rows[r][cidx];
      }
    }
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  std::array<double, 4> v{minor(0), -minor(1), minor(2), -minor(3)};
  double big = 0.0;
  for (double e : v) big = std::max(big, std::fabs(e));
  if (!(big > 1e-12 * row_scale)) {
    throw RankDeficientError("Möbius sample points give dependent equations");
  }
  for (double& e : v) e /= big;
  MobiusParams m{v[0], v[1], v[2], v[3]};

  // Orientation: c f + d > 0 at the samples, then on the grid.
  if (!(m.denominator(eval(f, points[1])) > 0.0)) m = m.scaled(-1.0);
  MobiusFit fit;
  fit.params = m;
  if (m.degenerate()) {
    fit.residual = std::numeric_limits<double>::infinity();
    return fit;
  }
  const auto [res, at] = detail::mobius_residual(f, g, m, validation_grid);
  fit.residual = res;
  fit.at = at;
  fit.valid = res <= tolerance;
  return fit;
}

/// recover_mobius at the 25/50/75% quantiles of the domain, resampling
/// with shifted quantiles up to five times on rank deficiency.
inline MobiusFit recover_mobius(const Expr& f, const Expr& g, const Interval& domain,
                                const std::vector<double>& validation_grid,
                                double tolerance = 1e-7) {
  std::array<double, 3> q{0.25, 0.5, 0.75};
  for (int attempt = 0; attempt <= 5; ++attempt) {
    const double shift = 0.03 * attempt;
    const std::array<double, 3> pts{domain.quantile(q[0] - shift), domain.quantile(q[1] + shift / 2),
                                    domain.quantile(q[2] + shift)};
    try {
      return recover_mobius(f, g, pts, validation_grid, tolerance);
    } catch (const RankDeficientError&) {
      if (attempt == 5) throw;
    }
  }
  throw RankDeficientError("Möbius recovery failed");
}

// ---------------------------------------------------------------------------
// Weight recovery from mean equality

/// Reconstructs q_i(y) from (f, p), g and the anchor data at x0 via
///   q_i(y) = s (h(r) - g(x0)) / (g(y) - h(r)),   h = g ∘ f^(-1),
///   r = ((p_0(x0) - p_i(x0)) f(x0) + p_i(y) f(y)) / (p_0(x0) - p_i(x0) + p_i(y)),
/// where s = q_0(x0) - q_i(x0). Valid wherever A_{f,p} = A_{g,q} near the
/// diagonal. Throws when the denominator falls below `min_denominator`.
inline std::vector<double> recover_weight(const MonotoneFn& f, const MonotoneFn& g,
                                          const WeightSystem& p, std::size_t i, double x0,
                                          double complement_at_anchor,
                                          const std::vector<double>& ys,
                                          double min_denominator = 1e-14) {
  if (i >= p.size()) throw SpecError("weight index out of range");
  const LeftInverse f_inv(f, kFineSolver);
  const double fx0 = f(x0);
  const double gx0 = g(x0);
  const double rest = p.total(x0) - p.value(i, x0);
  std::vector<double> out;
  out.reserve(ys.size());
  for (double y : ys) {
    const double piy = p.value(i, y);
    const double fy = f(y);
    const double r = (rest * fx0 + piy * fy) / (rest + piy);
    const double u = f_inv.eval_bracketed(r, std::min(x0, y), std::max(x0, y), kFineSolver);
    const double h = g(u);
    const double den = g(y) - h;
    if (!(std::fabs(den) > min_denominator)) {
      throw DomainError("weight recovery denominator vanishes at y=" + format_number(y));
    }
    out.push_back(complement_at_anchor * (h - gx0) / den);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decision procedure

enum class VerdictStatus { Equal, NotEqual, Inconclusive };

inline const char* to_string(VerdictStatus s) noexcept {
  return s == VerdictStatus::Equal ? "equal"
         : s == VerdictStatus::NotEqual ? "not_equal"
                                        : "inconclusive";
}

struct EqualityVerdict {
  VerdictStatus status = VerdictStatus::Inconclusive;
  std::optional<MobiusParams> witness;  // Equal only
  std::string failed_check;             // NotEqual, or the stage that was ambiguous
  std::vector<double> counterexample;   // point where failed_check is violated
  std::map<std::string, double> residuals;
  std::string reason;
  double gamma = 0.0;
};

struct DecisionConfig {
  std::size_t grid = 64;
  Tolerances tol{};
  std::size_t random_inputs = 32;
  std::uint64_t seed = 42;
};

/// Sign-preserving relative difference |u - v| / (1 + |u|).
inline double relative_gap(double u, double v) { return std::fabs(u - v) / (1.0 + std::fabs(u)); }

/// Direct comparison of both means on random points of I^n.
struct MeanComparison {
  double residual = 0.0;
  std::vector<double> worst;
};

inline MeanComparison compare_means(const MeanSpec& a, const MeanSpec& b, std::size_t count,
                                    std::uint64_t seed, const std::vector<double>& grid) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(grid.front(), grid.back());
  MeanComparison out;
  std::vector<double> x(a.arity());
  for (std::size_t s = 0; s < count; ++s) {
    for (double& xi : x) xi = coord(rng);
    const double ma = mean_eval(a, x, kFineSolver);
    const double mb = mean_eval(b, x, kFineSolver);
    const double r = relative_gap(ma, mb);
    if (r > out.residual || out.worst.empty()) {
      out.residual = std::max(out.residual, r);
      out.worst = x;
    }
  }
  return out;
}

namespace detail {

inline bool symmetric_pair(const MeanSpec& a, const MeanSpec& b) {
  return a.arity() == 2 && a.weights()[0] == a.weights()[1] && b.weights()[0] == b.weights()[1];
}

}  // namespace detail

/// Decides A_{f,p} = A_{g,q} through the chain: ratio condition, constant
/// γ, equal Schwarzians, Möbius recovery, rescaled witness check, and a
/// direct comparison of mean values. A failing stage gives NotEqual unless
/// the direct comparison agrees to the pass tolerance, which is reported as
/// Inconclusive (the symmetric two-variable case has such non-Möbius pairs).
inline EqualityVerdict decide_equality(const MeanSpec& a, const MeanSpec& b,
                                       const DecisionConfig& cfg = {}) {
  EqualityVerdict v;
  if (a.arity() != b.arity() || !(a.domain() == b.domain())) {
    v.reason = "specs differ in arity or domain";
    return v;
  }
  if (!breakpoints_of(a.generator().expr()).empty() ||
      !breakpoints_of(b.generator().expr()).empty()) {
    v.reason = "generators must be free of piecewise breakpoints";
    return v;
  }
  const std::vector<double> grid = a.domain().midpoint_grid(cfg.grid);
  const Tolerances& tol = cfg.tol;

  std::optional<MeanComparison> direct;
  auto direct_comparison = [&]() -> const MeanComparison& {
    if (!direct) {
      direct = compare_means(a, b, cfg.random_inputs, cfg.seed, grid);
      v.residuals["mean_comparison"] = direct->residual;
    }
    return *direct;
  };

  // Stage outcome handling; returns true when the pipeline must stop.
  auto settle = [&](const char* name, Band band, std::vector<double> where) {
    if (band == Band::Pass) return false;
    v.failed_check = name;
    v.counterexample = std::move(where);
    if (band == Band::Ambiguous) {
      v.status = VerdictStatus::Inconclusive;
      v.reason = std::string(name) + " residual lies between the pass and fail bands";
      return true;
    }
    const MeanComparison& dc = direct_comparison();
    if (tol.classify(dc.residual) == Band::Pass) {
      v.status = VerdictStatus::Inconclusive;
      v.reason = std::string(name) + " fails but the means agree on sampled inputs";
      if (detail::symmetric_pair(a, b)) {
        v.reason += " (symmetric two-variable pair outside the Möbius class)";
      }
      return true;
    }
    v.status = VerdictStatus::NotEqual;
    return true;
  };

  try {
    const CheckResult ratio = check_ratio_condition(a, b, grid, tol);
    v.residuals["ratio"] = ratio.residual;
    if (settle("ratio", ratio.band, {ratio.at})) return v;

    const CheckResult gamma = check_gamma_condition(a, b, grid, tol);
    v.residuals["gamma"] = gamma.residual;
    v.gamma = gamma.value;
    if (settle("gamma", gamma.band, {gamma.at})) return v;

    const Expr& f = a.generator().expr();
    const Expr& g = b.generator().expr();
    const CheckResult schw = schwarzian_equal(f, g, grid, tol);
    v.residuals["schwarzian"] = schw.residual;
    if (settle("schwarzian", schw.band, {schw.at})) return v;

    MobiusFit fit;
    try {
      fit = recover_mobius(f, g, a.domain(), grid, tol.pass);
    } catch (const RankDeficientError& e) {
      v.failed_check = "mobius_fit";
      v.reason = e.what();
      return v;
    }
    v.residuals["mobius_fit"] = fit.residual;
    if (settle("mobius_fit", tol.classify(fit.residual), {fit.at})) return v;

    const double ratio_scale = gamma.value / fit.params.det();
    if (!(ratio_scale > 0.0)) {
      v.failed_check = "witness_scale";
      v.reason = "γ/(ad-bc) is not positive; inconsistent intermediate results";
      return v;
    }
    const MobiusParams witness = fit.params.scaled(std::sqrt(ratio_scale));

    double res_g = 0.0;
    double res_q = 0.0;
    double at_g = grid.front();
    double at_q = grid.front();
    for (double x : grid) {
      const double fx = a.generator()(x);
      const double rg = relative_gap(b.generator()(x), witness.apply(fx));
      if (rg > res_g) {
        res_g = rg;
        at_g = x;
      }
      for (std::size_t l = 0; l < a.arity(); ++l) {
        const double q = b.weights().value(l, x);
        const double rq = relative_gap(q, witness.denominator(fx) * a.weights().value(l, x));
        if (rq > res_q) {
          res_q = rq;
          at_q = x;
        }
      }
    }
    v.residuals["witness_g"] = res_g;
    v.residuals["witness_q"] = res_q;
    if (settle("witness_g", tol.classify(res_g), {at_g})) return v;
    if (settle("witness_q", tol.classify(res_q), {at_q})) return v;

    const MeanComparison& dc = direct_comparison();
    const Band band = tol.classify(dc.residual);
    if (band != Band::Pass) {
      v.failed_check = "mean_comparison";
      v.counterexample = dc.worst;
      v.status = band == Band::Fail ? VerdictStatus::NotEqual : VerdictStatus::Inconclusive;
      v.reason = "Möbius witness found but sampled means differ";
      return v;
    }
    v.status = VerdictStatus::Equal;
    v.witness = witness;
    return v;
  } catch (const DomainError& e) {
    v.status = VerdictStatus::Inconclusive;
    v.reason = e.what();
    return v;
  }
}

}  // namespace bajmean
