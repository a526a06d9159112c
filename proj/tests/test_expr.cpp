#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <bajmean/expr.hpp>
#include <bajmean/monotone.hpp>
#include <bajmean/parser.hpp>

using namespace bajmean;

namespace {

struct Sample {
  std::string text;
  std::function<double(double)> ref;  // same operations, written in plain C++
  double lo;
  double hi;
};

// Reference functions mirror each tree operation for operation, so the
// comparison with eval is exact.
const std::vector<Sample>& samples() {
  static const std::vector<Sample> s{
      {"x", [](double x) { return x; }, -3, 3},
      {"3", [](double) { return 3.0; }, -3, 3},
      {"-x", [](double x) { return -x; }, -3, 3},
      {"x+1", [](double x) { return x + 1.0; }, -3, 3},
      {"x-1", [](double x) { return x - 1.0; }, -3, 3},
      {"2*x", [](double x) { return 2.0 * x; }, -3, 3},
      {"x/3", [](double x) { return x / 3.0; }, -3, 3},
      {"x^2", [](double x) { return std::pow(x, 2.0); }, -3, 3},
      {"x^3+x", [](double x) { return std::pow(x, 3.0) + x; }, -3, 3},
      {"(x^2+1)/x", [](double x) { return (std::pow(x, 2.0) + 1.0) / x; }, 0.1, 3},
      {"ln(x)", [](double x) { return std::log(x); }, 0.1, 5},
      {"exp(x)", [](double x) { return std::exp(x); }, -3, 3},
      {"sqrt(x)", [](double x) { return std::sqrt(x); }, 0.0, 9},
      {"abs(x)", [](double x) { return std::fabs(x); }, -3, 3},
      {"atan(x)", [](double x) { return std::atan(x); }, -3, 3},
      {"exp(-x)", [](double x) { return std::exp(-x); }, -3, 3},
      {"1/x", [](double x) { return 1.0 / x; }, 0.1, 3},
      {"x^(-0.5)", [](double x) { return std::pow(x, -0.5); }, 0.1, 3},
      {"x^0.5", [](double x) { return std::pow(x, 0.5); }, 0.1, 3},
      {"(2*x+1)/(x+1)", [](double x) { return (2.0 * x + 1.0) / (x + 1.0); }, 0, 3},
      {"x/(x+1)", [](double x) { return x / (x + 1.0); }, 0, 3},
      {"ln(x)/(ln(x)+2)", [](double x) { return std::log(x) / (std::log(x) + 2.0); }, 1, 2.7},
      {"1+x^2", [](double x) { return 1.0 + std::pow(x, 2.0); }, -3, 3},
      {"(1+x^2)^(-0.5)", [](double x) { return std::pow(1.0 + std::pow(x, 2.0), -0.5); }, -3, 3},
      {"exp(x)*x", [](double x) { return std::exp(x) * x; }, -3, 3},
      {"x*x*x", [](double x) { return x * x * x; }, -3, 3},
      {"x-x/2", [](double x) { return x - x / 2.0; }, -3, 3},
      {"x-(x-1)", [](double x) { return x - (x - 1.0); }, -3, 3},
      {"x/(x/2)", [](double x) { return x / (x / 2.0); }, 0.5, 3},
      {"-x^2", [](double x) { return -std::pow(x, 2.0); }, -3, 3},
      {"(-x)^2", [](double x) { return std::pow(-x, 2.0); }, -3, 3},
      {"-2*x", [](double x) { return -2.0 * x; }, -3, 3},
      {"x*-2", [](double x) { return x * -2.0; }, -3, 3},
      {"x-(-2)", [](double x) { return x - -2.0; }, -3, 3},
      {"--x", [](double x) { return -(-x); }, -3, 3},
      {"exp(ln(x))", [](double x) { return std::exp(std::log(x)); }, 0.1, 3},
      {"ln(exp(x))", [](double x) { return std::log(std::exp(x)); }, -3, 3},
      {"sqrt(1+x^2)", [](double x) { return std::sqrt(1.0 + std::pow(x, 2.0)); }, -3, 3},
      {"atan(x/2)*2", [](double x) { return std::atan(x / 2.0) * 2.0; }, -3, 3},
      {"abs(x-1)+x", [](double x) { return std::fabs(x - 1.0) + x; }, -3, 3},
      {"x^3", [](double x) { return std::pow(x, 3.0); }, -3, 3},
      {"(x+1)^3", [](double x) { return std::pow(x + 1.0, 3.0); }, -3, 3},
      {"0.5*x+0.25", [](double x) { return 0.5 * x + 0.25; }, -3, 3},
      {"1e-3*x", [](double x) { return 1e-3 * x; }, -3, 3},
      {"x/2/3", [](double x) { return x / 2.0 / 3.0; }, -3, 3},
      {"x/(2/3)", [](double x) { return x / (2.0 / 3.0); }, -3, 3},
      {"x-1-2", [](double x) { return x - 1.0 - 2.0; }, -3, 3},
      {"x-(1-2)", [](double x) { return x - (1.0 - 2.0); }, -3, 3},
      {"2*(x+1)*3", [](double x) { return 2.0 * (x + 1.0) * 3.0; }, -3, 3},
      {"exp(x)/(1+exp(x))", [](double x) { return std::exp(x) / (1.0 + std::exp(x)); }, -3, 3},
      {"ln(1+x^2)", [](double x) { return std::log(1.0 + std::pow(x, 2.0)); }, -3, 3},
      {"(x^2)^1", [](double x) { return std::pow(std::pow(x, 2.0), 1.0); }, -3, 3},
      {"(x^2)^3", [](double x) { return std::pow(std::pow(x, 2.0), 3.0); }, -3, 3},
      {"2+atan(x)", [](double x) { return 2.0 + std::atan(x); }, -3, 3},
      {"exp(-x)/2", [](double x) { return std::exp(-x) / 2.0; }, -3, 3},
      {"sqrt(x)+1", [](double x) { return std::sqrt(x) + 1.0; }, 0, 3},
      {"x+3", [](double x) { return x + 3.0; }, -3, 3},
  };
  return s;
}

std::vector<Sample> usable_samples() {
  std::vector<Sample> out;
  for (const auto& s : samples()) {
    if (s.ref) out.push_back(s);
  }
  return out;
}

const std::vector<std::string> kStructural{
    "piecewise(x<0: x; x>=0: x+1)",
    "piecewise(x<=0.5: -x; x>0.5: -3*x)",
    "piecewise(x<-1: 2*x; x<1: x; x>=1: x^3)",
    "inverse(atan(x), -10, 10, x/2)",
    "inverse(x^3+x, -5, 5, ln(x))",
};

}  // namespace

TEST(Parse, SpecExamples) {
  EXPECT_TRUE(parse("x").is_variable());
  const Expr l = parse("ln(x)");
  EXPECT_EQ(l.op(), Op::Ln);
  EXPECT_TRUE(l.arg().is_variable());
  const Expr j = parse("piecewise(x<0: x; x>=0: x+1)");
  ASSERT_EQ(j.op(), Op::Piecewise);
  ASSERT_EQ(j.breaks().size(), 1u);
  EXPECT_EQ(j.breaks()[0].at, 0.0);
  EXPECT_FALSE(j.breaks()[0].left_closed);
  EXPECT_EQ(eval(j, -0.5), -0.5);
  EXPECT_EQ(eval(j, 0.0), 1.0);
  EXPECT_EQ(eval(j, 0.5), 1.5);
}

TEST(Eval, SpecExamples) {
  EXPECT_EQ(eval(parse("x"), 3.0), 3.0);
  EXPECT_EQ(eval(parse("ln(x)"), 1.0), 0.0);
  EXPECT_EQ(eval(parse("(x^2+1)/x"), 2.0), 2.5);
}

TEST(Eval, MatchesReferenceExactly) {
  const auto corpus = usable_samples();
  ASSERT_GE(corpus.size(), 50u);
  for (const auto& s : corpus) {
    const Expr e = parse(s.text);
    for (int k = 1; k < 20; ++k) {
      const double x = s.lo + (s.hi - s.lo) * k / 20.0;
      EXPECT_EQ(eval(e, x), s.ref(x)) << s.text << " at " << x;
    }
  }
}

TEST(Print, RoundTripCorpus) {
  auto corpus = usable_samples();
  std::vector<std::string> texts;
  for (const auto& s : corpus) texts.push_back(s.text);
  texts.insert(texts.end(), kStructural.begin(), kStructural.end());
  ASSERT_GE(texts.size(), 50u);
  for (const auto& t : texts) {
    const Expr e = parse(t);
    const std::string printed = to_string(e);
    const Expr back = parse(printed);
    EXPECT_TRUE(back == e) << t << " -> " << printed;
    EXPECT_EQ(to_string(back), printed);
  }
}

TEST(Print, CanonicalForms) {
  EXPECT_EQ(to_string(parse("x - (-2)")), "x-(-2)");
  EXPECT_EQ(to_string(parse("x^(-0.5)")), "x^(-0.5)");
  EXPECT_EQ(to_string(parse("(x+1)*(x-1)")), "(x+1)*(x-1)");
  EXPECT_EQ(to_string(parse("x-(x-1)")), "x-(x-1)");
  EXPECT_EQ(to_string(parse("piecewise(x<0:x;x>=0:x+1)")), "piecewise(x<0: x; x>=0: x+1)");
}

TEST(Parse, Errors) {
  try {
    parse("x + foo(x)");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_THROW(parse("x +"), ParseError);
  EXPECT_THROW(parse("(x"), ParseError);
  EXPECT_THROW(parse("x)"), ParseError);
  EXPECT_THROW(parse("x^x"), ParseError);
  EXPECT_THROW(parse("piecewise(x<1: x; x<0: 2; x>=0: 3)"), ParseError);
  EXPECT_THROW(parse("piecewise(x<0: x; x>0: 1)"), ParseError);  // 0 itself uncovered
  EXPECT_THROW(parse("piecewise(x>=0: x; x<0: 1)"), ParseError);
  EXPECT_THROW(parse("piecewise(x<0: x)"), ParseError);
  EXPECT_THROW(parse("inverse(x, 1, 0, x)"), ParseError);
}

TEST(Eval, DomainErrors) {
  EXPECT_THROW(eval(parse("ln(x)"), 0.0), DomainError);
  EXPECT_THROW(eval(parse("ln(x)"), -1.0), DomainError);
  EXPECT_THROW(eval(parse("sqrt(x)"), -1.0), DomainError);
  EXPECT_THROW(eval(parse("1/x"), 0.0), DomainError);
  EXPECT_THROW(eval(parse("x^0.5"), -1.0), DomainError);
  EXPECT_THROW(eval(parse("exp(x)"), 1000.0), DomainError);
  EXPECT_EQ(eval(parse("x^3"), -2.0), -8.0);
}

TEST(Eval, PiecewiseBreakpointInclusion) {
  const Expr closed_left = parse("piecewise(x<=1: x; x>1: 10*x)");
  EXPECT_EQ(eval(closed_left, 1.0), 1.0);
  const Expr closed_right = parse("piecewise(x<1: x; x>=1: 10*x)");
  EXPECT_EQ(eval(closed_right, 1.0), 10.0);
  const Expr three = parse("piecewise(x<-1: 2*x; x<=1: x; x>1: x^3)");
  EXPECT_EQ(eval(three, -1.0), -1.0);
  EXPECT_EQ(eval(three, 1.0), 1.0);
  EXPECT_EQ(eval(three, 2.0), 8.0);
  EXPECT_EQ(eval(three, -2.0), -4.0);
}

TEST(Eval, InverseNode) {
  const Expr e = parse("inverse(x^3+x, -5, 5, x)");
  for (double u : {-2.0, -0.3, 0.0, 0.7, 1.9}) {
    const double y = u * u * u + u;
    EXPECT_NEAR(eval(e, y), u, 1e-14);
  }
  EXPECT_THROW(eval(e, 1000.0), DomainError);
  // decreasing inner function
  const Expr d = parse("inverse(exp(-x), -3, 3, x)");
  EXPECT_NEAR(eval(d, std::exp(-1.25)), 1.25, 1e-14);
}

TEST(Build, FoldingKeepsTreesSmall) {
  const Expr x = build::var();
  EXPECT_EQ(to_string((0.0 * x + 1.0) / (1.0 * x + 0.0)), "1/x");
  EXPECT_EQ(to_string(1.0 * x + 0.0), "x");
  EXPECT_TRUE((x * 0.0).is_constant(0.0));
  EXPECT_EQ(to_string(pow(x, 1.0)), "x");
  EXPECT_TRUE(pow(build::constant(4.0), 0.5).is_constant(2.0));
  EXPECT_TRUE(exp(build::constant(0.0)).is_constant(1.0));
  EXPECT_EQ(to_string(neg(build::constant(2.0))), "(-2)");
}

TEST(Build, Compose) {
  const Expr outer = parse("ln(x)+x^2");
  const Expr inner = parse("exp(x)");
  const Expr c = compose(outer, inner);
  for (double x : {-1.0, 0.0, 0.5, 2.0}) {
    EXPECT_DOUBLE_EQ(eval(c, x), x + std::exp(2.0 * x));
  }
  EXPECT_THROW(compose(parse("piecewise(x<0: x; x>=0: 1+x)"), inner), SpecError);
}

TEST(Breakpoints, Collected) {
  const Expr e = parse("piecewise(x<-1: 2*x; x<1: x; x>=1: x^3)");
  EXPECT_EQ(breakpoints_of(e), (std::vector<double>{-1.0, 1.0}));
  EXPECT_TRUE(has_breakpoint_within(e, 0.5, 1.0));
  EXPECT_FALSE(has_breakpoint_within(e, -0.5, 0.5));
  EXPECT_TRUE(breakpoints_of(parse("exp(x)")).empty());
}

TEST(Monotone, SpecExamples) {
  EXPECT_EQ(std::get<Direction>(check_strict_monotone(parse("x"), Interval(0, 1), 100)),
            Direction::Increasing);
  EXPECT_EQ(std::get<Direction>(check_strict_monotone(parse("-x"), Interval(0, 1), 100)),
            Direction::Decreasing);
  const auto v = check_strict_monotone(parse("x*x"), Interval(-1, 1), 100);
  ASSERT_TRUE(std::holds_alternative<MonotoneViolation>(v));
  const auto& viol = std::get<MonotoneViolation>(v);
  EXPECT_LT(std::fabs(viol.x1), 0.05);
  EXPECT_LT(std::fabs(viol.x2), 0.05);
}

TEST(Monotone, DeclaredDirectionChecked) {
  EXPECT_NO_THROW(MonotoneFn(parse("exp(x)"), Interval(-1, 1), Direction::Increasing));
  EXPECT_THROW(MonotoneFn(parse("exp(x)"), Interval(-1, 1), Direction::Decreasing), SpecError);
  EXPECT_THROW(MonotoneFn(parse("x^2"), Interval(-1, 1), Direction::Increasing), SpecError);
  EXPECT_EQ(MonotoneFn::detect(parse("1/x"), Interval(0, 1)).direction(), Direction::Decreasing);
  // jump generators are fine as long as they stay strictly monotone
  EXPECT_NO_THROW(
      MonotoneFn(parse("piecewise(x<0: x; x>=0: x+1)"), Interval(-1, 1), Direction::Increasing));
}

TEST(Interval, Basics) {
  EXPECT_THROW(Interval(1, 1), SpecError);
  const Interval half(0, std::numeric_limits<double>::infinity());
  EXPECT_EQ(half.clamped_hi(), kClamp);
  EXPECT_DOUBLE_EQ(half.quantile(0.5), 1.0);
  const Interval unit(0, 1);
  const auto g = unit.grid(5);
  EXPECT_GT(g.front(), 0.0);
  EXPECT_LT(g.back(), 1.0);
  EXPECT_NEAR(g.front(), 1e-9, 1e-18);
  const auto m = unit.midpoint_grid(4);
  EXPECT_DOUBLE_EQ(m[0], 0.125);
  EXPECT_DOUBLE_EQ(m[3], 0.875);
}
