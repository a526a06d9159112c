#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include <bajmean/geninv.hpp>
#include <bajmean/parser.hpp>

#include "corpus.hpp"

using namespace bajmean;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MonotoneFn jump() {
  return MonotoneFn(parse("piecewise(x<0: x; x>=0: x+1)"), Interval(-1, 1), Direction::Increasing);
}

}  // namespace

TEST(HullRange, SpecExamples) {
  const Interval a = hull_range(MonotoneFn(parse("x"), Interval(0, 1), Direction::Increasing));
  EXPECT_NEAR(a.lo(), 0.0, 1e-8);
  EXPECT_NEAR(a.hi(), 1.0, 1e-8);

  const Interval b = hull_range(MonotoneFn(parse("ln(x)"), Interval(0, kInf), Direction::Increasing));
  EXPECT_LT(b.lo(), -20.0);  // ln of the approach point near 0
  EXPECT_NEAR(b.hi(), std::log(kClamp), 1e-9);

  const Interval c = hull_range(jump());
  EXPECT_NEAR(c.lo(), -1.0, 1e-8);
  EXPECT_NEAR(c.hi(), 2.0, 1e-8);
}

TEST(LeftInverse, SpecExamples) {
  const LeftInverse id(MonotoneFn(parse("x"), Interval(0, 1), Direction::Increasing));
  EXPECT_NEAR(left_inverse_eval(id, 0.37), 0.37, 1e-12);
  const LeftInverse j(jump());
  EXPECT_NEAR(left_inverse_eval(j, 0.5), 0.0, 1e-12);
  const LeftInverse l(MonotoneFn(parse("ln(x)"), Interval(0, kInf), Direction::Increasing));
  EXPECT_NEAR(left_inverse_eval(l, 0.0), 1.0, 1e-12);
}

TEST(LeftInverse, OutsideHullRejected) {
  const LeftInverse id(MonotoneFn(parse("x"), Interval(0, 1), Direction::Increasing));
  EXPECT_THROW(id(1.5), DomainError);
  EXPECT_THROW(id(-0.1), DomainError);
  EXPECT_NO_THROW(id(1.0));  // closure allowed
}

TEST(LeftInverse, DecreasingGenerators) {
  const LeftInverse inv(MonotoneFn(parse("1/x"), Interval(0.5, 4), Direction::Decreasing));
  for (double y : {0.3, 0.5, 1.0, 1.9}) EXPECT_NEAR(inv(y), 1.0 / y, 1e-12);
  // decreasing jump: -x then -3x, gap (-1.5, -0.5] maps to 0.5
  const LeftInverse dj(MonotoneFn(parse("piecewise(x<=0.5: -x; x>0.5: -3*x)"), Interval(-1, 2),
                                  Direction::Decreasing));
  EXPECT_NEAR(dj(-1.0), 0.5, 1e-12);
  EXPECT_NEAR(dj(-1.4), 0.5, 1e-12);
  EXPECT_NEAR(dj(-3.0), 1.0, 1e-12);
  EXPECT_NEAR(dj(0.25), -0.25, 1e-12);
}

TEST(VerifySmf, SpecExamples) {
  const MonotoneFn id(parse("x"), Interval(0, 1), Direction::Increasing);
  const SmfReport a = verify_smf(id, LeftInverse(id), 200);
  EXPECT_TRUE(a.all_pass());
  EXPECT_LE(a.smf1_residual, 1e-12);

  const MonotoneFn j = jump();
  const SmfReport b = verify_smf(j, LeftInverse(j), 200);
  EXPECT_TRUE(b.smf1_pass);
  EXPECT_TRUE(b.smf2_pass);
  EXPECT_TRUE(b.smf3_pass);
  EXPECT_GT(b.gap_points, 0u);

  const MonotoneFn e(parse("exp(x)"), Interval(-1, 1), Direction::Increasing);
  const SmfReport c = verify_smf(e, LeftInverse(e), 200);
  EXPECT_TRUE(c.all_pass());
  EXPECT_LE(c.smf1_residual, 1e-10);
  EXPECT_LE(c.smf2_residual, 1e-10);
}

TEST(VerifySmf, JumpLimitsAtGapValue) {
  // SMF3 at y = 0.5: one-sided limits at g(0.5) = 0 are 0 and 1.
  const MonotoneFn j = jump();
  const LeftInverse g(j);
  const double x = g(0.5);
  EXPECT_NEAR(x, 0.0, 1e-12);
  EXPECT_NEAR(j(x - 1e-9), 0.0, 1e-8);
  EXPECT_NEAR(j(x + 1e-9), 1.0, 1e-8);
}

TEST(LeftInverse, Smf1ExactnessAcrossCorpus) {
  for (const auto& gc : corpus::generators()) {
    const MonotoneFn f = corpus::make_generator(gc);
    const LeftInverse g(f);
    for (double x : f.domain().midpoint_grid(200)) {
      const double tol = 2.0 * g.config().x_tolerance * std::max({std::fabs(x), 1e-6, 1.0});
      EXPECT_LE(std::fabs(g(f(x)) - x), tol) << gc.f << " at " << x;
    }
  }
}

TEST(LeftInverse, MonotoneInSameSense) {
  for (const auto& gc : corpus::generators()) {
    const MonotoneFn f = corpus::make_generator(gc);
    const LeftInverse g(f);
    const auto ys = g.range_hull().grid(300);
    double prev = g(ys.front());
    for (std::size_t k = 1; k < ys.size(); ++k) {
      const double cur = g(ys[k]);
      if (f.increasing()) {
        EXPECT_GE(cur, prev) << gc.f;
      } else {
        EXPECT_LE(cur, prev) << gc.f;
      }
      prev = cur;
    }
  }
}

TEST(LeftInverse, ContinuityProxy) {
  // max |g(y+δ) - g(y)| shrinks as δ shrinks, also across jump gaps.
  for (const auto& gc : corpus::generators()) {
    const MonotoneFn f = corpus::make_generator(gc);
    if (std::isinf(f.domain().lo()) || std::isinf(f.domain().hi())) continue;
    const LeftInverse g(f);
    const Interval& h = g.range_hull();
    const double width = h.hi() - h.lo();
    double last = kInf;
    for (double delta : {1e-2 * width, 1e-3 * width, 1e-4 * width}) {
      double worst = 0.0;
      for (double y : h.grid(400)) {
        if (y + delta >= h.hi()) continue;
        worst = std::max(worst, std::fabs(g(y + delta) - g(y)));
      }
      EXPECT_LE(worst, last) << gc.f;
      last = worst;
    }
  }
}

TEST(LeftInverse, FlatOnGaps) {
  const LeftInverse g(jump());
  for (int k = 1; k < 100; ++k) {
    EXPECT_NEAR(g(k / 100.0), 0.0, 1e-10);
  }
  const MonotoneFn two(parse("piecewise(x<1: x; x>=1: 2*x+1)"), Interval(0, 3), Direction::Increasing);
  const LeftInverse g2(two);
  for (double y : {1.0, 1.5, 2.0, 2.9}) EXPECT_NEAR(g2(y), 1.0, 1e-10);
}
