#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bisect.hpp"
#include "errors.hpp"
#include "jets.hpp"
#include "mean.hpp"

namespace bajmean {

/// Coordinates (0-based) to differentiate along, with repetition:
/// {0} is ∂_1, {0,0,1} is ∂_1²∂_2.
using MultiIndex = std::vector<std::size_t>;

/// Everything the closed-form diagonal formulas need at one point x.
struct DiagonalData {
  std::vector<Jet3> weights;  // jets of p_1..p_n at x
  double p0 = 0.0;            // p_1(x) + ... + p_n(x)
  double ratio2 = 0.0;        // f''/f'
  double ratio3 = 0.0;        // f'''/f'
};

inline DiagonalData diagonal_data(const MeanSpec& spec, double x) {
  const Jet3 f = jet_eval(spec.generator().expr(), x);
  if (!(std::fabs(f.d1) > kVanishingDerivative)) {
    throw VanishingDerivativeError("generator has a vanishing first derivative at x=" +
                                   format_number(x));
  }
  DiagonalData d;
  d.ratio2 = f.d2 / f.d1;
  d.ratio3 = f.d3 / f.d1;
  d.weights.reserve(spec.arity());
  for (std::size_t i = 0; i < spec.arity(); ++i) {
    d.weights.push_back(jet_eval(spec.weights()[i], x));
    d.p0 += d.weights.back().v;
  }
  return d;
}

namespace detail {

inline void check_index(const MeanSpec& spec, std::size_t i) {
  if (i >= spec.arity()) throw SpecError("coordinate index out of range");
}

}  // namespace detail

/// ∂_i A at the diagonal point (x,...,x): p_i / p_0.
inline double d1(const MeanSpec& spec, std::size_t i, double x) {
  detail::check_index(spec, i);
  const DiagonalData d = diagonal_data(spec, x);
  return d.weights[i].v / d.p0;
}

/// ∂_i∂_j A on the diagonal, i != j.
inline double d2_mixed(const MeanSpec& spec, std::size_t i, std::size_t j, double x) {
  detail::check_index(spec, i);
  detail::check_index(spec, j);
  if (i == j) throw SpecError("d2_mixed needs distinct indices");
  const DiagonalData d = diagonal_data(spec, x);
  const Jet3& pi = d.weights[i];
  const Jet3& pj = d.weights[j];
  const double p02 = d.p0 * d.p0;
  const double prod_d = pi.d1 * pj.v + pi.v * pj.d1;
  return -prod_d / p02 - pi.v * pj.v / p02 * d.ratio2;
}

/// ∂_i² A on the diagonal.
inline double d2_pure(const MeanSpec& spec, std::size_t i, double x) {
  detail::check_index(spec, i);
  const DiagonalData d = diagonal_data(spec, x);
  const Jet3& pi = d.weights[i];
  const double p02 = d.p0 * d.p0;
  const double rest = d.p0 - pi.v;
  return 2.0 * pi.d1 * rest / p02 + pi.v * rest / p02 * d.ratio2;
}

/// ∂_i∂_j∂_k A on the diagonal, i, j, k pairwise distinct (needs n >= 3).
inline double d3_mixed(const MeanSpec& spec, std::size_t i, std::size_t j, std::size_t k,
                       double x) {
  if (spec.arity() < 3) throw SpecError("d3_mixed needs arity n >= 3");
  detail::check_index(spec, i);
  detail::check_index(spec, j);
  detail::check_index(spec, k);
  if (i == j || j == k || i == k) throw SpecError("d3_mixed needs pairwise distinct indices");
  const DiagonalData d = diagonal_data(spec, x);
  const Jet3& a = d.weights[i];
  const Jet3& b = d.weights[j];
  const Jet3& c = d.weights[k];
  const double p03 = d.p0 * d.p0 * d.p0;
  const double two_primes = a.v * b.d1 * c.d1 + a.d1 * b.v * c.d1 + a.d1 * b.d1 * c.v;
  const double prod_d = a.v * b.v * c.d1 + a.v * b.d1 * c.v + a.d1 * b.v * c.v;
  const double prod = a.v * b.v * c.v;
  const double r = d.ratio2;
  return 2.0 * two_primes / p03 + 2.0 * prod_d / p03 * r + prod / p03 * (3.0 * r * r - d.ratio3);
}

/// ∂_i²∂_j A on the diagonal, i != j.
inline double d3_semi(const MeanSpec& spec, std::size_t i, std::size_t j, double x) {
  detail::check_index(spec, i);
  detail::check_index(spec, j);
  if (i == j) throw SpecError("d3_semi needs distinct indices");
  const DiagonalData d = diagonal_data(spec, x);
  const Jet3& pi = d.weights[i];
  const Jet3& pj = d.weights[j];
  const double p0 = d.p0;
  const double p03 = p0 * p0 * p0;
  const double r = d.ratio2;
  const double t1 = 2.0 * pi.d1 * pj.d1 * (2.0 * pi.v - p0) +
                    pj.v * (2.0 * pi.d1 * pi.d1 - pi.d2 * p0);
  const double t2 = (2.0 * pi.d1 * pj.v + pi.v * pj.d1) * (2.0 * pi.v - p0);
  const double t3 = pi.v * pj.v * ((3.0 * pi.v - p0) * r * r - pi.v * d.ratio3);
  return t1 / p03 + t2 / p03 * r + t3 / p03;
}

/// ∂_i³ A on the diagonal.
inline double d3_pure(const MeanSpec& spec, std::size_t i, double x) {
  detail::check_index(spec, i);
  const DiagonalData d = diagonal_data(spec, x);
  const Jet3& pi = d.weights[i];
  const double p0 = d.p0;
  const double p03 = p0 * p0 * p0;
  const double rest = p0 - pi.v;
  const double r = d.ratio2;
  const double t1 = 3.0 * rest * (p0 * pi.d2 - 2.0 * pi.d1 * pi.d1);
  const double t2 = 3.0 * pi.d1 * (p0 - 2.0 * pi.v) * rest;
  const double t3 = pi.v * rest * (3.0 * pi.v * r * r - (p0 + pi.v) * d.ratio3);
  return t1 / p03 + t2 / p03 * r - t3 / p03;
}

/// Dispatches a multi-index of order 1..3 to the matching closed form.
inline double diag_partial(const MeanSpec& spec, const MultiIndex& index, double x) {
  MultiIndex idx = index;
  std::sort(idx.begin(), idx.end());
  switch (idx.size()) {
    case 1:
      return d1(spec, idx[0], x);
    case 2:
      return idx[0] == idx[1] ? d2_pure(spec, idx[0], x) : d2_mixed(spec, idx[0], idx[1], x);
    case 3:
      if (idx[0] == idx[2]) return d3_pure(spec, idx[0], x);
      if (idx[0] == idx[1]) return d3_semi(spec, idx[0], idx[2], x);
      if (idx[1] == idx[2]) return d3_semi(spec, idx[1], idx[0], x);
      return d3_mixed(spec, idx[0], idx[1], idx[2], x);
    default:
      throw SpecError("diagonal derivatives are implemented up to order 3");
  }
}

/// Step sizes of the central finite-difference stencils, by total order.
struct FdSteps {
  double order1 = 1e-5;
  double order2 = 1e-4;
  double order3 = 7e-4;

  double for_order(std::size_t k) const {
    return k == 1 ? order1 : k == 2 ? order2 : order3;
  }
};

namespace detail {

struct StencilTap {
  double offset;  // in units of the step
  double weight;  // divided by step^k afterwards
};

inline std::vector<StencilTap> central_stencil(int order) {
  switch (order) {
    case 0:
      return {{0.0, 1.0}};
    case 1:
      return {{-1.0, -0.5}, {1.0, 0.5}};
    case 2:
      return {{-1.0, 1.0}, {0.0, -2.0}, {1.0, 1.0}};
    case 3:
      return {{-2.0, -0.5}, {-1.0, 1.0}, {1.0, -1.0}, {2.0, 0.5}};
    default:
      throw SpecError("finite differences implemented up to order 3 per axis");
  }
}

}  // namespace detail

/// Central finite-difference approximation of the partial derivative
/// `index` of mean_eval at (x,...,x): tensor product of per-axis central
/// stencils, one step size chosen by the total order.
inline double fd_partial(const MeanSpec& spec, const MultiIndex& index, double x,
                         const FdSteps& steps = {}) {
  const std::size_t n = spec.arity();
  const std::size_t order = index.size();
  if (order < 1 || order > 3) throw SpecError("fd_partial supports orders 1 to 3");
  std::vector<int> per_axis(n, 0);
  for (std::size_t i : index) {
    detail::check_index(spec, i);
    ++per_axis[i];
  }
  const double h = steps.for_order(order);
  int reach = 0;
  for (int k : per_axis) reach = std::max(reach, k == 3 ? 2 : (k > 0 ? 1 : 0));
  const double guard = (reach + 10) * h;
  if (has_breakpoint_within(spec.generator().expr(), x - guard, x + guard)) {
    throw DomainError("fd_partial: breakpoint too close to the stencil");
  }
  for (const auto& w : spec.weights().weights()) {
    if (has_breakpoint_within(w, x - guard, x + guard)) {
      throw DomainError("fd_partial: weight breakpoint too close to the stencil");
    }
  }

  std::vector<std::vector<detail::StencilTap>> stencils(n);
  for (std::size_t a = 0; a < n; ++a) stencils[a] = detail::central_stencil(per_axis[a]);

  // Odometer over the tensor product of the per-axis stencils.
  std::vector<std::size_t> pos(n, 0);
  std::vector<double> point(n, x);
  double sum = 0.0;
  for (;;) {
    double weight = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
      const auto& tap = stencils[a][pos[a]];
      point[a] = x + tap.offset * h;
      weight *= tap.weight;
    }
    sum += weight * mean_eval(spec, point, kFineSolver);
    std::size_t a = 0;
    while (a < n && ++pos[a] == stencils[a].size()) {
      pos[a] = 0;
      ++a;
    }
    if (a == n) break;
  }
  return sum / std::pow(h, static_cast<double>(order));
}

/// Human-readable multi-index, 1-based: "1,1,2" for ∂_1²∂_2.
inline std::string format_index(const MultiIndex& index) {
  std::string out;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(index[k] + 1);
  }
  return out;
}

/// Every implemented diagonal partial up to `max_order`, one representative
/// multi-index per formula instance (sorted indices).
inline std::vector<MultiIndex> diagonal_indices(std::size_t n, std::size_t max_order) {
  std::vector<MultiIndex> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({i});
  if (max_order >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({i, i});
      for (std::size_t j = i + 1; j < n; ++j) out.push_back({i, j});
    }
  }
  if (max_order >= 3) {
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({i, i, i});
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) out.push_back({i, i, j});
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) out.push_back({i, j, k});
      }
    }
  }
  return out;
}

}  // namespace bajmean
