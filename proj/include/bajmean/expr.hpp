#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bisect.hpp"
#include "errors.hpp"

namespace bajmean {

enum class Op {
  Const,
  Var,
  Neg,
  Exp,
  Ln,
  Sqrt,
  Abs,
  Atan,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Piecewise,
  Inverse,
};

/// A piecewise breakpoint. `left_closed` means the breakpoint itself belongs
/// to the piece on its left (guard `x<=c`); otherwise to the piece on its
/// right (guard `x<c` on the left piece).
struct Breakpoint {
  double at;
  bool left_closed;

  friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

class Expr;

namespace detail {

struct Node {
  Op op;
  double number = 0.0;  // constant value, or exponent for Pow
  double lo = 0.0;      // Inverse: search window
  double hi = 0.0;
  std::vector<Expr> args;
  std::vector<Breakpoint> breaks;
};

}  // namespace detail

/// Immutable single-variable real expression. Copies share structure.
///
/// Node layout by operation:
///  - Const: number()
///  - Var: nothing
///  - Neg..Atan: args()[0]
///  - Add..Div: args()[0], args()[1]
///  - Pow: args()[0] raised to the constant number()
///  - Piecewise: breaks() has m sorted breakpoints, args() has m+1 pieces
///  - Inverse: args()[0] is a strictly monotone G (in its own variable) on
///    [window_lo(), window_hi()], args()[1] the argument; evaluates G^(-1)(arg)
class Expr {
 public:
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

  Op op() const noexcept { return node_->op; }
  double number() const noexcept { return node_->number; }
  double window_lo() const noexcept { return node_->lo; }
  double window_hi() const noexcept { return node_->hi; }
  const std::vector<Expr>& args() const noexcept { return node_->args; }
  const std::vector<Breakpoint>& breaks() const noexcept { return node_->breaks; }

  const Expr& arg(std::size_t k = 0) const { return node_->args.at(k); }

  bool is_constant() const noexcept { return op() == Op::Const; }
  bool is_constant(double c) const noexcept { return op() == Op::Const && number() == c; }
  bool is_variable() const noexcept { return op() == Op::Var; }

  double operator()(double x) const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  std::shared_ptr<const detail::Node> node_;
};

namespace build {

inline Expr make(detail::Node node) {
  return Expr(std::make_shared<const detail::Node>(std::move(node)));
}

inline Expr constant(double c) { return make({Op::Const, c, 0.0, 0.0, {}, {}}); }
inline Expr var() { return make({Op::Var, 0.0, 0.0, 0.0, {}, {}}); }

/// Unary node without folding; used by the parser to keep the tree verbatim.
inline Expr unary_raw(Op op, Expr e) { return make({op, 0.0, 0.0, 0.0, {std::move(e)}, {}}); }
inline Expr binary_raw(Op op, Expr a, Expr b) {
  return make({op, 0.0, 0.0, 0.0, {std::move(a), std::move(b)}, {}});
}
inline Expr pow_raw(Expr base, double exponent) {
  return make({Op::Pow, exponent, 0.0, 0.0, {std::move(base)}, {}});
}

inline Expr piecewise(std::vector<Breakpoint> breaks, std::vector<Expr> pieces) {
  if (breaks.empty() || pieces.size() != breaks.size() + 1) {
    throw SpecError("piecewise needs m >= 1 breakpoints and m+1 pieces");
  }
  for (std::size_t k = 1; k < breaks.size(); ++k) {
    if (!(breaks[k - 1].at < breaks[k].at)) {
      throw SpecError("piecewise breakpoints must strictly increase");
    }
  }
  return make({Op::Piecewise, 0.0, 0.0, 0.0, std::move(pieces), std::move(breaks)});
}

inline Expr inverse(Expr g, double lo, double hi, Expr argument) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw SpecError("inverse window must be a finite nonempty interval");
  }
  return make({Op::Inverse, 0.0, lo, hi, {std::move(g), std::move(argument)}, {}});
}

}  // namespace build

// Folding constructors. They simplify only trivial constant cases so that
// composed expressions stay readable when printed.

inline Expr neg(const Expr& e) {
  if (e.is_constant()) return build::constant(-e.number());
  return build::unary_raw(Op::Neg, e);
}

inline Expr unary(Op op, const Expr& e) {
  if (op == Op::Neg) return neg(e);
  Expr out = build::unary_raw(op, e);
  if (e.is_constant()) {
    try {
      const double v = out(0.0);
      return build::constant(v);
    } catch (const DomainError&) {
    }
  }
  return out;
}

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return build::constant(a.number() + b.number());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return build::binary_raw(Op::Add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return build::constant(a.number() - b.number());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(b);
  return build::binary_raw(Op::Sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return build::constant(a.number() * b.number());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return build::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return neg(b);
  if (b.is_constant(-1.0)) return neg(a);
  return build::binary_raw(Op::Mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.number() != 0.0) {
    return build::constant(a.number() / b.number());
  }
  if (b.is_constant(1.0)) return a;
  return build::binary_raw(Op::Div, a, b);
}

inline Expr operator+(const Expr& a, double b) { return a + build::constant(b); }
inline Expr operator+(double a, const Expr& b) { return build::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - build::constant(b); }
inline Expr operator-(double a, const Expr& b) { return build::constant(a) - b; }
inline Expr operator*(double a, const Expr& b) { return build::constant(a) * b; }
inline Expr operator*(const Expr& a, double b) { return a * build::constant(b); }
inline Expr operator/(double a, const Expr& b) { return build::constant(a) / b; }
inline Expr operator/(const Expr& a, double b) { return a / build::constant(b); }

inline Expr pow(const Expr& base, double exponent) {
  if (exponent == 1.0) return base;
  if (exponent == 0.0) return build::constant(1.0);
  Expr out = build::pow_raw(base, exponent);
  if (base.is_constant()) {
    try {
      return build::constant(out(0.0));
    } catch (const DomainError&) {
    }
  }
  return out;
}

inline Expr exp(const Expr& e) { return unary(Op::Exp, e); }
inline Expr ln(const Expr& e) { return unary(Op::Ln, e); }
inline Expr sqrt(const Expr& e) { return unary(Op::Sqrt, e); }
inline Expr abs(const Expr& e) { return unary(Op::Abs, e); }
inline Expr atan(const Expr& e) { return unary(Op::Atan, e); }

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " produced a non-finite value");
  return v;
}

inline double pow_checked(double base, double exponent) {
  const bool integral = std::floor(exponent) == exponent;
  if (base < 0.0 && !integral) {
    throw DomainError("pow with non-integer exponent requires a positive base");
  }
  if (base == 0.0 && exponent < 0.0) throw DomainError("pow: zero to a negative power");
  return checked(std::pow(base, exponent), "pow");
}

/// Index of the piece of a piecewise node containing x.
inline std::size_t piece_index(const std::vector<Breakpoint>& breaks, double x) {
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    if (x < breaks[k].at || (x == breaks[k].at && breaks[k].left_closed)) return k;
  }
  return breaks.size();
}

double eval_node(const Expr& e, double x);

/// G^(-1)(y) for the Inverse node `e`, via the generalized left inverse of G
/// restricted to the node's window.
inline double eval_inverse(const Expr& e, double y) {
  const Expr& g = e.arg(0);
  const double lo = e.window_lo();
  const double hi = e.window_hi();
  const double g_lo = eval_node(g, lo);
  const double g_hi = eval_node(g, hi);
  const bool increasing = g_lo < g_hi;
  const double ymin = increasing ? g_lo : g_hi;
  const double ymax = increasing ? g_hi : g_lo;
  const double slack = 1e-9 * (1.0 + (ymax - ymin));
  if (y < ymin - slack || y > ymax + slack) {
    throw DomainError("inverse: argument outside the range of the inverted function");
  }
  if (increasing) {
    return sup_not_above([&](double u) { return eval_node(g, u); }, y, lo, hi, kFineSolver);
  }
  return sup_not_above([&](double u) { return -eval_node(g, u); }, -y, lo, hi, kFineSolver);
}

inline double eval_node(const Expr& e, double x) {
  switch (e.op()) {
    case Op::Const:
      return e.number();
    case Op::Var:
      return x;
    case Op::Neg:
      return -eval_node(e.arg(), x);
    case Op::Exp:
      return checked(std::exp(eval_node(e.arg(), x)), "exp");
    case Op::Ln: {
      const double u = eval_node(e.arg(), x);
      if (!(u > 0.0)) throw DomainError("ln of a nonpositive value");
      return std::log(u);
    }
    case Op::Sqrt: {
      const double u = eval_node(e.arg(), x);
      if (u < 0.0) throw DomainError("sqrt of a negative value");
      return std::sqrt(u);
    }
    case Op::Abs:
      return std::fabs(eval_node(e.arg(), x));
    case Op::Atan:
      return std::atan(eval_node(e.arg(), x));
    case Op::Add:
      return checked(eval_node(e.arg(0), x) + eval_node(e.arg(1), x), "+");
    case Op::Sub:
      return checked(eval_node(e.arg(0), x) - eval_node(e.arg(1), x), "-");
    case Op::Mul:
      return checked(eval_node(e.arg(0), x) * eval_node(e.arg(1), x), "*");
    case Op::Div: {
      const double num = eval_node(e.arg(0), x);
      const double den = eval_node(e.arg(1), x);
      if (den == 0.0) throw DomainError("division by zero");
      return checked(num / den, "/");
    }
    case Op::Pow:
      return pow_checked(eval_node(e.arg(), x), e.number());
    case Op::Piecewise:
      return eval_node(e.args()[piece_index(e.breaks(), x)], x);
    case Op::Inverse:
      return eval_inverse(e, eval_node(e.arg(1), x));
  }
  throw DomainError("unknown expression node");
}

}  // namespace detail

/// Evaluates `e` at `x`. Throws DomainError on invalid input.
inline double eval(const Expr& e, double x) { return detail::eval_node(e, x); }

inline double Expr::operator()(double x) const { return eval(*this, x); }

inline bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op() || a.number() != b.number() || a.window_lo() != b.window_lo() ||
      a.window_hi() != b.window_hi() || a.breaks() != b.breaks() ||
      a.args().size() != b.args().size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.args().size(); ++k) {
    if (!(a.args()[k] == b.args()[k])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Structure queries

/// Breakpoints (in the expression's own variable) of every piecewise node,
/// sorted. Breakpoints of functions inverted by an Inverse node live in a
/// different variable and are not reported.
inline std::vector<double> breakpoints_of(const Expr& e) {
  std::vector<double> out;
  auto walk = [&](const auto& self, const Expr& node) -> void {
    if (node.op() == Op::Piecewise) {
      for (const auto& b : node.breaks()) out.push_back(b.at);
    }
    if (node.op() == Op::Inverse) {
      self(self, node.arg(1));
      return;
    }
    for (const auto& child : node.args()) self(self, child);
  };
  walk(walk, e);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline bool has_breakpoint_within(const Expr& e, double lo, double hi) {
  for (double b : breakpoints_of(e)) {
    if (lo <= b && b <= hi) return true;
  }
  return false;
}

/// outer ∘ inner: every occurrence of the variable in `outer` replaced by `inner`.
inline Expr compose(const Expr& outer, const Expr& inner) {
  switch (outer.op()) {
    case Op::Const:
      return outer;
    case Op::Var:
      return inner;
    case Op::Piecewise:
      throw SpecError("cannot compose into a piecewise expression");
    case Op::Inverse:
      return build::inverse(outer.arg(0), outer.window_lo(), outer.window_hi(),
                            compose(outer.arg(1), inner));
    case Op::Pow:
      return pow(compose(outer.arg(), inner), outer.number());
    case Op::Add:
      return compose(outer.arg(0), inner) + compose(outer.arg(1), inner);
    case Op::Sub:
      return compose(outer.arg(0), inner) - compose(outer.arg(1), inner);
    case Op::Mul:
      return compose(outer.arg(0), inner) * compose(outer.arg(1), inner);
    case Op::Div:
      return compose(outer.arg(0), inner) / compose(outer.arg(1), inner);
    default:
      return unary(outer.op(), compose(outer.arg(), inner));
  }
}

// ---------------------------------------------------------------------------
// Canonical printer

/// Shortest decimal text that reads back to exactly `v`.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

inline const char* function_name(Op op) {
  switch (op) {
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    case Op::Atan: return "atan";
    default: return "?";
  }
}

inline void print(const Expr& e, std::string& out);

inline void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

inline void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Const:
      if (std::signbit(e.number())) {
        out += '(';
        out += format_number(e.number());
        out += ')';
      } else {
        out += format_number(e.number());
      }
      return;
    case Op::Var:
      out += 'x';
      return;
    case Op::Neg:
      out += '-';
      print_wrapped(e.arg(), precedence(e.arg()) < 3, out);
      return;
    case Op::Exp:
    case Op::Ln:
    case Op::Sqrt:
    case Op::Abs:
    case Op::Atan:
      out += function_name(e.op());
      out += '(';
      print(e.arg(), out);
      out += ')';
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      print_wrapped(e.arg(0), precedence(e.arg(0)) < p, out);
      out += e.op() == Op::Add ? '+' : e.op() == Op::Sub ? '-' : e.op() == Op::Mul ? '*' : '/';
      print_wrapped(e.arg(1), precedence(e.arg(1)) <= p, out);
      return;
    }
    case Op::Pow:
      print_wrapped(e.arg(), precedence(e.arg()) < 5, out);
      out += '^';
      if (std::signbit(e.number())) {
        out += '(';
        out += format_number(e.number());
        out += ')';
      } else {
        out += format_number(e.number());
      }
      return;
    case Op::Piecewise: {
      out += "piecewise(";
      const auto& br = e.breaks();
      for (std::size_t k = 0; k < br.size(); ++k) {
        out += br[k].left_closed ? "x<=" : "x<";
        out += format_number(br[k].at);
        out += ": ";
        print(e.args()[k], out);
        out += "; ";
      }
      out += br.back().left_closed ? "x>" : "x>=";
      out += format_number(br.back().at);
      out += ": ";
      print(e.args().back(), out);
      out += ')';
      return;
    }
    case Op::Inverse:
      out += "inverse(";
      print(e.arg(0), out);
      out += ", ";
      out += format_number(e.window_lo());
      out += ", ";
      out += format_number(e.window_hi());
      out += ", ";
      print(e.arg(1), out);
      out += ')';
      return;
  }
}

}  // namespace detail

/// Canonical text form; parse(to_string(e)) reproduces e node for node.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print(e, out);
  return out;
}

}  // namespace bajmean
