#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"

namespace bajmean {

namespace detail {

// Recursive-descent parser for
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | base ('^' signed_number | '^' '(' signed_number ')')?
//   base   := number | 'x' | ident '(' expr ')' | '(' expr ')'
//           | 'piecewise(' guard ':' expr (';' guard ':' expr)* ')'
//           | 'inverse(' expr ',' signed_number ',' signed_number ',' expr ')'
//   guard  := 'x' ('<'|'<='|'>'|'>=') signed_number
//
// A unary minus applied directly to a constant folds into a negative constant.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = build::binary_raw(Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = build::binary_raw(Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = build::binary_raw(Op::Mul, lhs, parse_factor());
      } else if (accept('/')) {
        lhs = build::binary_raw(Op::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_factor() {
    if (accept('-')) {
      Expr inner = parse_factor();
      if (inner.is_constant()) return build::constant(-inner.number());
      return build::unary_raw(Op::Neg, inner);
    }
    Expr base = parse_base();
    if (accept('^')) {
      double exponent = 0.0;
      if (accept('(')) {
        exponent = parse_signed_number();
        expect(')');
      } else {
        exponent = parse_signed_number();
      }
      return build::pow_raw(base, exponent);
    }
    return base;
  }

  double parse_number() {
    skip_ws();
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (pos_ >= text_.size() ||
        !(std::isdigit(static_cast<unsigned char>(*first)) || *first == '.')) {
      fail("expected a number");
    }
    double value = 0.0;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(res.ptr - first);
    return value;
  }

  double parse_signed_number() {
    const bool negative = accept('-');
    const double v = parse_number();
    return negative ? -v : v;
  }

  std::string parse_ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Expr parse_base() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return build::constant(parse_number());
    }
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t ident_pos = pos_;
      const std::string name = parse_ident();
      if (name == "x") return build::var();
      if (name == "piecewise") return parse_piecewise();
      if (name == "inverse") return parse_inverse();
      Op op{};
      if (name == "exp") {
        op = Op::Exp;
      } else if (name == "ln") {
        op = Op::Ln;
      } else if (name == "sqrt") {
        op = Op::Sqrt;
      } else if (name == "abs") {
        op = Op::Abs;
      } else if (name == "atan") {
        op = Op::Atan;
      } else {
        pos_ = ident_pos;
        fail("unknown identifier '" + name + "'");
      }
      expect('(');
      Expr inner = parse_expr();
      expect(')');
      return build::unary_raw(op, inner);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  struct Guard {
    bool upper;   // x<c or x<=c
    bool closed;  // <= or >=
    double at;
  };

  Guard parse_guard() {
    const std::size_t at = pos_;
    if (parse_ident() != "x") {
      pos_ = at;
      fail("piecewise guard must start with 'x'");
    }
    Guard g{};
    if (accept('<')) {
      g.upper = true;
    } else if (accept('>')) {
      g.upper = false;
    } else {
      fail("expected '<' or '>' in guard");
    }
    g.closed = pos_ < text_.size() && text_[pos_] == '=';
    if (g.closed) ++pos_;
    g.at = parse_signed_number();
    return g;
  }

  // Every piece but the last carries an upper guard that defines the next
  // breakpoint; the last carries the lower guard complementary to the
  // previous one.
  Expr parse_piecewise() {
    expect('(');
    std::vector<Breakpoint> breaks;
    std::vector<Expr> pieces;
    for (;;) {
      const std::size_t guard_pos = pos_;
      const Guard g = parse_guard();
      expect(':');
      Expr body = parse_expr();
      pieces.push_back(body);
      if (accept(';')) {
        if (!g.upper) {
          pos_ = guard_pos;
          fail("only the last piecewise guard may be a lower bound");
        }
        if (!breaks.empty() && !(breaks.back().at < g.at)) {
          pos_ = guard_pos;
          fail("piecewise breakpoints must strictly increase");
        }
        breaks.push_back({g.at, g.closed});
        continue;
      }
      expect(')');
      if (breaks.empty()) {
        pos_ = guard_pos;
        fail("piecewise needs at least two pieces");
      }
      const Breakpoint& last = breaks.back();
      if (g.upper || g.at != last.at || g.closed == last.left_closed) {
        pos_ = guard_pos;
        fail("last piecewise guard must complement the previous breakpoint");
      }
      return build::piecewise(std::move(breaks), std::move(pieces));
    }
  }

  Expr parse_inverse() {
    expect('(');
    Expr g = parse_expr();
    expect(',');
    const double lo = parse_signed_number();
    expect(',');
    const double hi = parse_signed_number();
    expect(',');
    Expr argument = parse_expr();
    expect(')');
    if (!(lo < hi)) fail("inverse window must satisfy lo < hi");
    return build::inverse(g, lo, hi, argument);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses expression text in the variable `x`. Throws ParseError.
inline Expr parse(std::string_view text) { return detail::Parser(text).parse_all(); }

}  // namespace bajmean
