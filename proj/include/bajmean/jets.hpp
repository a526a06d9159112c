#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"
#include "expr.hpp"

namespace bajmean {

/// Value and first three derivatives of a function at one point.
struct Jet3 {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;

  static Jet3 constant(double c) { return {c, 0.0, 0.0, 0.0}; }
  static Jet3 variable(double x) { return {x, 1.0, 0.0, 0.0}; }

  friend bool operator==(const Jet3&, const Jet3&) = default;
};

/// Below this magnitude a first derivative counts as vanishing.
inline constexpr double kVanishingDerivative = 1e-12;

// Jet arithmetic. Composition uses the order-3 Faà di Bruno formula:
//   (φ∘u)'   = φ' u1
//   (φ∘u)''  = φ'' u1² + φ' u2
//   (φ∘u)''' = φ''' u1³ + 3 φ'' u1 u2 + φ' u3

inline Jet3 operator+(const Jet3& a, const Jet3& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
}

inline Jet3 operator-(const Jet3& a, const Jet3& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
}

inline Jet3 operator-(const Jet3& a) { return {-a.v, -a.d1, -a.d2, -a.d3}; }

inline Jet3 operator*(const Jet3& a, const Jet3& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
          a.d3 * b.v + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.v * b.d3};
}

inline Jet3 operator*(double s, const Jet3& a) { return {s * a.v, s * a.d1, s * a.d2, s * a.d3}; }

/// φ∘u given φ and its first three derivatives at u.v.
inline Jet3 chain(const Jet3& u, double phi0, double phi1, double phi2, double phi3) {
  const double u1 = u.d1;
  return {phi0, phi1 * u1, phi2 * u1 * u1 + phi1 * u.d2,
          phi3 * u1 * u1 * u1 + 3.0 * phi2 * u1 * u.d2 + phi1 * u.d3};
}

inline Jet3 reciprocal(const Jet3& u) {
  if (u.v == 0.0) throw DomainError("division by zero");
  const double r = 1.0 / u.v;
  return chain(u, r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r);
}

inline Jet3 operator/(const Jet3& a, const Jet3& b) {
  Jet3 q = a * reciprocal(b);
  q.v = a.v / b.v;  // keep the value bitwise equal to eval
  return q;
}

/// Derivative triple of f^(-1) at f(x) from the jet of f at x:
/// 1/f', -f''/f'^3, (3f''^2 - f'f''')/f'^5. The value slot carries `at`,
/// the point x where f was expanded.
inline Jet3 inverse_jets(const Jet3& j, double at = 0.0) {
  if (!(std::fabs(j.d1) > kVanishingDerivative)) {
    throw VanishingDerivativeError("inverse derivatives need a nonvanishing first derivative");
  }
  const double d1 = j.d1;
  const double d1_3 = d1 * d1 * d1;
  return {at, 1.0 / d1, -j.d2 / d1_3, (3.0 * j.d2 * j.d2 - d1 * j.d3) / (d1_3 * d1 * d1)};
}

namespace detail {

inline Jet3 jet_pow(const Jet3& u, double r) {
  const double b = u.v;
  const bool integral = std::floor(r) == r;
  if (b < 0.0 && !integral) {
    throw DomainError("pow with non-integer exponent requires a positive base");
  }
  if (b == 0.0) {
    // t^r at t = 0 has finite derivatives only for nonnegative integer r;
    // the k-th derivative there is r! when k == r and zero otherwise.
    if (!integral || r < 0.0) throw DomainError("pow: derivatives undefined at zero base");
    return chain(u, r == 0.0 ? 1.0 : 0.0, r == 1.0 ? 1.0 : 0.0, r == 2.0 ? 2.0 : 0.0,
                 r == 3.0 ? 6.0 : 0.0);
  }
  const double p0 = std::pow(b, r);
  const double p1 = r * std::pow(b, r - 1.0);
  const double p2 = r * (r - 1.0) * std::pow(b, r - 2.0);
  const double p3 = r * (r - 1.0) * (r - 2.0) * std::pow(b, r - 3.0);
  return chain(u, p0, p1, p2, p3);
}

inline Jet3 jet_node(const Expr& e, const Jet3& x);

inline Jet3 jet_inverse(const Expr& e, const Jet3& arg) {
  const double root = eval_inverse(e, arg.v);
  const Jet3 g = jet_node(e.arg(0), Jet3::variable(root));
  const Jet3 inv = inverse_jets(g, root);
  return chain(arg, root, inv.d1, inv.d2, inv.d3);
}

inline Jet3 jet_node(const Expr& e, const Jet3& x) {
  switch (e.op()) {
    case Op::Const:
      return Jet3::constant(e.number());
    case Op::Var:
      return x;
    case Op::Neg:
      return -jet_node(e.arg(), x);
    case Op::Exp: {
      const Jet3 u = jet_node(e.arg(), x);
      const double ev = checked(std::exp(u.v), "exp");
      return chain(u, ev, ev, ev, ev);
    }
    case Op::Ln: {
      const Jet3 u = jet_node(e.arg(), x);
      if (!(u.v > 0.0)) throw DomainError("ln of a nonpositive value");
      const double r = 1.0 / u.v;
      return chain(u, std::log(u.v), r, -r * r, 2.0 * r * r * r);
    }
    case Op::Sqrt: {
      const Jet3 u = jet_node(e.arg(), x);
      if (!(u.v > 0.0)) throw DomainError("sqrt derivatives need a positive argument");
      const double s = std::sqrt(u.v);
      const double r = 1.0 / u.v;
      return chain(u, s, 0.5 / s, -0.25 * r / s, 0.375 * r * r / s);
    }
    case Op::Abs: {
      const Jet3 u = jet_node(e.arg(), x);
      if (u.v == 0.0) throw DomainError("abs is not differentiable at zero");
      return u.v > 0.0 ? u : -u;
    }
    case Op::Atan: {
      const Jet3 u = jet_node(e.arg(), x);
      const double t = u.v;
      const double w = 1.0 / (1.0 + t * t);
      return chain(u, std::atan(t), w, -2.0 * t * w * w, (6.0 * t * t - 2.0) * w * w * w);
    }
    case Op::Add:
      return jet_node(e.arg(0), x) + jet_node(e.arg(1), x);
    case Op::Sub:
      return jet_node(e.arg(0), x) - jet_node(e.arg(1), x);
    case Op::Mul:
      return jet_node(e.arg(0), x) * jet_node(e.arg(1), x);
    case Op::Div:
      return jet_node(e.arg(0), x) / jet_node(e.arg(1), x);
    case Op::Pow:
      return jet_pow(jet_node(e.arg(), x), e.number());
    case Op::Piecewise: {
      for (const auto& b : e.breaks()) {
        if (b.at == x.v) {
          throw BreakpointError("jets are undefined at the piecewise breakpoint " +
                                format_number(b.at));
        }
      }
      return jet_node(e.args()[piece_index(e.breaks(), x.v)], x);
    }
    case Op::Inverse:
      return jet_inverse(e, jet_node(e.arg(1), x));
  }
  throw DomainError("unknown expression node");
}

}  // namespace detail

/// Exact order-3 forward propagation of derivatives through `e` at `x`.
inline Jet3 jet_eval(const Expr& e, double x) {
  const Jet3 out = detail::jet_node(e, Jet3::variable(x));
  if (!std::isfinite(out.v) || !std::isfinite(out.d1) || !std::isfinite(out.d2) ||
      !std::isfinite(out.d3)) {
    throw DomainError("non-finite derivative of " + to_string(e));
  }
  return out;
}

/// Schwarzian derivative f'''/f' - (3/2)(f''/f')^2 from a jet.
inline double schwarzian(const Jet3& j) {
  if (!(std::fabs(j.d1) > kVanishingDerivative)) {
    throw VanishingDerivativeError("Schwarzian needs a nonvanishing first derivative");
  }
  const double a = j.d2 / j.d1;
  return j.d3 / j.d1 - 1.5 * a * a;
}

inline double schwarzian(const Expr& e, double x) { return schwarzian(jet_eval(e, x)); }

}  // namespace bajmean
