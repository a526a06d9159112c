#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bisect.hpp"
#include "errors.hpp"
#include "expr.hpp"
#include "geninv.hpp"
#include "interval.hpp"
#include "monotone.hpp"

namespace bajmean {

inline constexpr std::size_t kDefaultPositivityGrid = 1024;

/// Weight functions p_1..p_n on a common domain, positive on a sampling grid.
class WeightSystem {
 public:
  WeightSystem(std::vector<Expr> weights, Interval domain,
               std::size_t positivity_grid = kDefaultPositivityGrid)
      : weights_(std::move(weights)), domain_(domain) {
    if (weights_.empty()) throw SpecError("weight system needs at least one weight");
    const auto xs = domain_.grid(positivity_grid);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      for (double x : xs) {
        double v = 0.0;
        try {
          v = eval(weights_[i], x);
        } catch (const DomainError& e) {
          throw SpecError("weight " + std::to_string(i + 1) + " fails at x=" + format_number(x) +
                          ": " + e.what());
        }
        if (!(v > 0.0)) {
          throw SpecError("weight " + std::to_string(i + 1) + " = " + to_string(weights_[i]) +
                          " is not positive at x=" + format_number(x));
        }
      }
    }
  }

  std::size_t size() const noexcept { return weights_.size(); }
  const Interval& domain() const noexcept { return domain_; }
  const std::vector<Expr>& weights() const noexcept { return weights_; }
  const Expr& operator[](std::size_t i) const { return weights_.at(i); }

  /// p_i(x), rejecting a nonpositive value.
  double value(std::size_t i, double x) const {
    const double v = eval(weights_.at(i), x);
    if (!(v > 0.0)) {
      throw DomainError("weight " + std::to_string(i + 1) + " is not positive at x=" +
                        format_number(x));
    }
    return v;
  }

  /// p_0(x) = p_1(x) + ... + p_n(x).
  double total(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += value(i, x);
    return s;
  }

 private:
  std::vector<Expr> weights_;
  Interval domain_;
};

/// One side of a generalized Bajraktarević mean: generator f and weights
/// p_1..p_n, together with f's left inverse.
class MeanSpec {
 public:
  MeanSpec(MonotoneFn generator, WeightSystem weights, SolverConfig solver = {})
      : inverse_(std::move(generator), solver), weights_(std::move(weights)) {
    if (weights_.size() < 2) throw SpecError("a mean needs arity n >= 2");
    if (!(weights_.domain() == inverse_.source().domain())) {
      throw SpecError("generator and weights must share a domain");
    }
  }

  std::size_t arity() const noexcept { return weights_.size(); }
  const MonotoneFn& generator() const noexcept { return inverse_.source(); }
  const WeightSystem& weights() const noexcept { return weights_; }
  const LeftInverse& inverse() const noexcept { return inverse_; }
  const Interval& domain() const noexcept { return weights_.domain(); }

 private:
  LeftInverse inverse_;
  WeightSystem weights_;
};

namespace detail {

inline void check_input(const MeanSpec& spec, std::span<const double> x) {
  if (x.size() != spec.arity()) {
    throw SpecError("expected " + std::to_string(spec.arity()) + " coordinates, got " +
                    std::to_string(x.size()));
  }
  for (double xi : x) {
    if (!spec.domain().contains(xi)) {
      throw DomainError("coordinate " + format_number(xi) + " outside the domain");
    }
  }
}

}  // namespace detail

/// R(x) = sum p_i(x_i) f(x_i) / sum p_i(x_i).
inline double weighted_ratio(const MeanSpec& spec, std::span<const double> x) {
  detail::check_input(spec, x);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = spec.weights().value(i, x[i]);
    num += w * spec.generator()(x[i]);
    den += w;
  }
  return num / den;
}

/// A(x) = f^(-1)(R(x)). The left inverse is searched on [min x, max x],
/// which contains the answer because R lies between f(min x) and f(max x).
inline double mean_eval(const MeanSpec& spec, std::span<const double> x,
                        const SolverConfig& solver) {
  const double r = weighted_ratio(spec, x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return *lo;
  return spec.inverse().eval_bracketed(r, *lo, *hi, solver);
}

inline double mean_eval(const MeanSpec& spec, std::span<const double> x) {
  return mean_eval(spec, x, spec.inverse().config());
}

/// sum p_i(x_i) (f(z) - f(x_i)).
inline double sign_function(const MeanSpec& spec, std::span<const double> x, double z) {
  const double fz = spec.generator()(z);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += spec.weights().value(i, x[i]) * (fz - spec.generator()(x[i]));
  }
  return s;
}

/// Checks that y is where z -> sum p_i(x_i)(f(z) - f(x_i)) changes sign:
/// negative for z < y and positive for z > y when f increases (reversed
/// when f decreases). Probes sit at geometrically shrinking distances from
/// y, from the domain end down to 1e-9 of the domain width.
inline bool sign_change_certify(const MeanSpec& spec, std::span<const double> x, double y,
                                std::size_t probe_count = 32) {
  detail::check_input(spec, x);
  const Interval& dom = spec.domain();
  const double sign = spec.generator().increasing() ? 1.0 : -1.0;
  const double floor = 1e-9 * std::min(1.0, dom.clamped_hi() - dom.clamped_lo());
  auto probe_side = [&](double reach, double dir) {
    if (reach <= floor) return true;
    const double ratio =
        probe_count > 1 ? std::pow(floor / reach, 1.0 / static_cast<double>(probe_count - 1)) : 1.0;
    double dist = reach;
    for (std::size_t k = 0; k < probe_count; ++k, dist *= ratio) {
      const double z = y + dir * dist;
      if (!dom.contains(z)) continue;
      const double phi = sign * sign_function(spec, x, z);
      if (dir < 0 ? !(phi < 0.0) : !(phi > 0.0)) return false;
    }
    return true;
  };
  return probe_side(y - dom.approach_lo(), -1.0) && probe_side(dom.approach_hi() - y, 1.0);
}

/// Independent route for continuous generators: the unique zero of
/// y -> sum p_i(x_i)(f(y) - f(x_i)) on [min x, max x], by bisection.
inline double root_solve(const MeanSpec& spec, std::span<const double> x,
                         const SolverConfig& solver = {}) {
  detail::check_input(spec, x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return *lo;
  if (has_breakpoint_within(spec.generator().expr(), *lo, *hi)) {
    throw DomainError("generator has a breakpoint inside the bracket");
  }
  const double sign = spec.generator().increasing() ? 1.0 : -1.0;
  return bisect_root([&](double z) { return sign * sign_function(spec, x, z); }, *lo, *hi,
                     solver);
}

}  // namespace bajmean
