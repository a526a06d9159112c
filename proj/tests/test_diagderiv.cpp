#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <bajmean/diagderiv.hpp>
#include <bajmean/equality.hpp>
#include <bajmean/parser.hpp>

#include "corpus.hpp"

using namespace bajmean;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MeanSpec spec(const char* f, double lo, double hi, std::vector<const char*> p,
              Direction d = Direction::Increasing) {
  std::vector<Expr> w;
  for (const char* s : p) w.push_back(parse(s));
  return MeanSpec(MonotoneFn(parse(f), Interval(lo, hi), d), WeightSystem(w, Interval(lo, hi)));
}

double tolerance_for(std::size_t order) { return order == 1 ? 1e-5 : order == 2 ? 1e-4 : 5e-3; }

double rel_error(double formula, double fd) {
  return std::fabs(formula - fd) / std::max(std::fabs(formula), 1.0);
}

}  // namespace

TEST(D1, SpecExamples) {
  EXPECT_DOUBLE_EQ(d1(spec("exp(x)", -1, 1, {"1", "1"}), 0, 0.3), 0.5);
  EXPECT_DOUBLE_EQ(d1(spec("x", 0, kInf, {"x", "1"}), 0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(d1(spec("x", -1, 1, {"1", "1", "2"}), 2, 0.0), 0.5);
  EXPECT_THROW(d1(spec("x^3", -1, 1, {"1", "1"}), 0, 0.0), VanishingDerivativeError);
}

TEST(D2, SpecExamples) {
  EXPECT_DOUBLE_EQ(d2_mixed(spec("x", -1, 1, {"1", "1"}), 0, 1, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(d2_mixed(spec("ln(x)", 0, kInf, {"1", "1"}), 0, 1, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(d2_mixed(spec("x", 0, kInf, {"x", "1"}), 0, 1, 1.0), -0.25);
  EXPECT_DOUBLE_EQ(d2_pure(spec("x", -1, 1, {"1", "1"}), 0, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(d2_pure(spec("ln(x)", 0, kInf, {"1", "1"}), 0, 1.0), -0.25);
  EXPECT_DOUBLE_EQ(d2_pure(spec("x", 0, kInf, {"x", "1"}), 0, 1.0), 0.5);
  EXPECT_THROW(d2_mixed(spec("x", -1, 1, {"1", "1"}), 0, 0, 0.2), SpecError);
}

TEST(D3, SpecExamples) {
  EXPECT_DOUBLE_EQ(d3_mixed(spec("x", -1, 1, {"1", "2", "3"}), 0, 1, 2, 0.2), 0.0);
  EXPECT_NEAR(d3_mixed(spec("exp(x)", -1, 1, {"1", "1", "1"}), 0, 1, 2, 0.0), 2.0 / 27.0, 1e-15);
  EXPECT_NEAR(d3_mixed(spec("ln(x)", 0, kInf, {"1", "1", "1"}), 0, 1, 2, 1.0), 1.0 / 27.0, 1e-15);
  EXPECT_THROW(d3_mixed(spec("x", -1, 1, {"1", "1"}), 0, 1, 1, 0.2), SpecError);

  EXPECT_DOUBLE_EQ(d3_semi(spec("x", -1, 1, {"1", "1"}), 0, 1, 0.2), 0.0);
  EXPECT_NEAR(d3_semi(spec("exp(x)", -1, 1, {"1", "1"}), 0, 1, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(d3_semi(spec("ln(x)", 0, kInf, {"1", "1"}), 0, 1, 1.0), -0.125, 1e-15);

  EXPECT_DOUBLE_EQ(d3_pure(spec("x", -1, 1, {"1", "1"}), 0, 0.2), 0.0);
  EXPECT_NEAR(d3_pure(spec("exp(x)", -1, 1, {"1", "1"}), 0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(d3_pure(spec("ln(x)", 0, kInf, {"1", "1"}), 0, 1.0), 0.375, 1e-15);
}

TEST(FdPartial, SpecExamples) {
  EXPECT_NEAR(fd_partial(spec("x", -1, 1, {"1", "1"}), {0}, 0.5), 0.5, 1e-8);
  const auto ln = spec("ln(x)", 0, kInf, {"1", "1"});
  EXPECT_NEAR(fd_partial(ln, {0, 1}, 1.0), 0.25, 1e-5);
  EXPECT_NEAR(fd_partial(ln, {0, 0, 0}, 1.0), 0.375, 1e-3);
}

TEST(FdPartial, RefusesNearbyBreakpoints) {
  const auto j = spec("piecewise(x<0: x; x>=0: x+1)", -1, 1, {"1", "1"});
  EXPECT_THROW(fd_partial(j, {0}, 1e-5), DomainError);
  EXPECT_NO_THROW(fd_partial(j, {0}, 0.5));
  EXPECT_THROW(diag_partial(j, {0, 1}, 0.0), BreakpointError);
}

TEST(DiagPartial, DispatchIsOrderInsensitive) {
  const auto s = spec("exp(x)", -1, 2, {"1+x^2", "x+3", "exp(x)"});
  EXPECT_DOUBLE_EQ(diag_partial(s, {1, 0, 0}, 0.4), d3_semi(s, 0, 1, 0.4));
  EXPECT_DOUBLE_EQ(diag_partial(s, {1, 2, 1}, 0.4), d3_semi(s, 1, 2, 0.4));
  EXPECT_DOUBLE_EQ(diag_partial(s, {2, 0, 1}, 0.4), d3_mixed(s, 0, 1, 2, 0.4));
  EXPECT_DOUBLE_EQ(diag_partial(s, {2, 2}, 0.4), d2_pure(s, 2, 0.4));
  EXPECT_THROW(diag_partial(s, {0, 0, 0, 0}, 0.4), SpecError);
  EXPECT_EQ(format_index({0, 0, 1}), "1,1,2");
}

TEST(DiagPartial, IndexEnumeration) {
  // n=3: 3 first order, 3 pure + 3 mixed second order, 3 pure + 6 semi + 1 mixed third order
  EXPECT_EQ(diagonal_indices(3, 3).size(), 19u);
  EXPECT_EQ(diagonal_indices(2, 3).size(), 2u + 3u + 4u);
  EXPECT_EQ(diagonal_indices(4, 1).size(), 4u);
}

TEST(DiagPartial, MatchesFiniteDifferencesOnCorpus) {
  const std::vector<MeanSpec> specs{
      spec("x", -1, 3, {"1", "x+3"}),
      spec("ln(x)", 0, kInf, {"x", "1", "x^2"}),
      spec("exp(x)", -1, 2, {"exp(x)", "1+x^2"}),
      spec("x^3+x", -1, 1.5, {"1", "1+x^2", "exp(x)", "2"}),
      spec("1/x", 0, kInf, {"x", "x^2"}, Direction::Decreasing),
  };
  for (const auto& s : specs) {
    for (double x : {s.domain().quantile(0.3), s.domain().quantile(0.6)}) {
      for (const auto& idx : diagonal_indices(s.arity(), 3)) {
        const double f = diag_partial(s, idx, x);
        const double fd = fd_partial(s, idx, x);
        EXPECT_LE(rel_error(f, fd), tolerance_for(idx.size()))
            << to_string(s.generator().expr()) << " index " << format_index(idx) << " at " << x
            << ": " << f << " vs " << fd;
      }
    }
  }
}

TEST(DiagPartial, FirstOrderSumRule) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const MeanSpec s = corpus::random_spec(rng, true);
    const double x = corpus::random_point(rng, s.domain(), 0.05);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.arity(); ++i) sum += d1(s, i, x);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(DiagPartial, SymmetricInIndices) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    const MeanSpec s = corpus::random_spec(rng, true, 4);
    const double x = corpus::random_point(rng, s.domain(), 0.05);
    const std::size_t n = s.arity();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        EXPECT_EQ(d2_mixed(s, i, j, x), d2_mixed(s, j, i, x));
        for (std::size_t l = 0; l < n; ++l) {
          if (l == i || l == j) continue;
          const double ref = d3_mixed(s, i, j, l, x);
          std::vector<std::size_t> perm{i, j, l};
          std::sort(perm.begin(), perm.end());
          do {
            EXPECT_NEAR(d3_mixed(s, perm[0], perm[1], perm[2], x), ref,
                        1e-14 * std::max(1.0, std::fabs(ref)));
          } while (std::next_permutation(perm.begin(), perm.end()));
        }
      }
    }
  }
}

TEST(DiagPartial, MobiusInvariance) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 30; ++k) {
    const MeanSpec s = corpus::random_transformable_spec(rng, 3);
    const MobiusParams m = corpus::random_mobius(rng, s.generator());
    const MeanSpec t = mobius_transform(s, m);
    const double x = corpus::random_point(rng, s.domain(), 0.05);
    for (const auto& idx : diagonal_indices(s.arity(), 3)) {
      const double a = diag_partial(s, idx, x);
      const double b = diag_partial(t, idx, x);
      EXPECT_LE(std::fabs(a - b), 1e-6 * std::max(1.0, std::fabs(a)))
          << to_string(s.generator().expr()) << " index " << format_index(idx);
    }
  }
}
