#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oakit/expr.hpp"
#include "support/oracles.hpp"

using namespace oakit;

namespace {

double central_difference(const Expr& e, Point pt, std::size_t k, double h = 1e-6) {
  const std::size_t n = pt.x.size();
  double& v = k < n ? pt.x[k] : pt.y[k - n];
  const double v0 = v;
  v = v0 + h;
  const double fp = eval(e, pt);
  v = v0 - h;
  const double fm = eval(e, pt);
  v = v0;
  return (fp - fm) / (2 * h);
}

}  // namespace

TEST(Expr, ConstantEvaluatesToItself) {
  EXPECT_EQ(eval(constant(5.0), Point{{1.0}, {2.0}}), 5.0);
  EXPECT_EQ(eval(constant(5.0), Point{{}, {}}), 5.0);
}

TEST(Expr, Example31ObjectiveAtReportedOptimum) {
  const MinlpProblem P = fixtures::example31();
  EXPECT_NEAR(eval(P.objective, Point{{1.9752}, {14.0}}), -0.5249, 1e-3);
}

TEST(Expr, Example31ThirdConstraintActiveAtOptimum) {
  const MinlpProblem P = fixtures::example31();
  EXPECT_NEAR(eval(P.constraints[2], Point{{1.9752}, {14.0}}), 0.0, 1e-3);
}

TEST(Expr, GradientOfQuadraticTerm) {
  const Expr e = pow(var_x(0), 2) / 10.0;
  const Subgradient s = subgrad(e, Point{{1.9752}, {}});
  EXPECT_NEAR(s.alpha[0], 0.39504, 1e-6);
  EXPECT_NEAR(s.alpha[0], central_difference(e, Point{{1.9752}, {}}, 0), 1e-6);
}

TEST(Expr, GradientOfSqrtConstraint) {
  const MinlpProblem P = fixtures::example31();
  const Point pt{{1.9752}, {14.0}};
  const Subgradient s = subgrad(P.constraints[2], pt);
  EXPECT_NEAR(s.alpha[0], -3.4707, 1e-3);
  EXPECT_NEAR(s.alpha[0], central_difference(P.constraints[2], pt, 0), 1e-5);
  EXPECT_NEAR(s.beta[0], 0.4125 * std::sqrt(14.0), 1e-9);
}

TEST(Expr, AbsKinkReturnsZeroSlope) {
  const Subgradient s = subgrad(abs(var_x(0)), Point{{0.0}, {}});
  EXPECT_EQ(s.alpha[0], 0.0);
  EXPECT_TRUE(kink_active(abs(var_x(0)), Point{{0.0}, {}}, 1e-12));
}

TEST(Expr, MaxTieAveragesChildren) {
  const Expr e = max({var_x(0), scale(-1.0, var_x(0)), 2.0 * var_y(0)});
  const Subgradient s = subgrad(e, Point{{0.0}, {0.0}});
  EXPECT_NEAR(s.alpha[0], 0.0, 1e-15);
  EXPECT_NEAR(s.beta[0], 2.0 / 3.0, 1e-15);
  const Subgradient t = subgrad(e, Point{{1.0}, {0.0}});
  EXPECT_EQ(t.alpha[0], 1.0);
  EXPECT_EQ(t.beta[0], 0.0);
}

TEST(Expr, DomainErrorsNameTheNode) {
  try {
    (void)eval(log(var_x(0)), Point{{-1.0}, {}});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("log"), std::string::npos);
  }
  EXPECT_THROW((void)eval(sqrt(var_x(0) - 1.0), Point{{0.0}, {}}), DomainError);
  EXPECT_THROW((void)eval(pow(var_y(0), 1.5), Point{{}, {-1.0}}), DomainError);
  EXPECT_THROW((void)subgrad(sqrt(var_x(0)), Point{{0.0}, {}}), DomainError);
  EXPECT_NO_THROW((void)eval(pow(var_x(0), 2), Point{{-3.0}, {}}));
}

TEST(Expr, IntegerPowerOfNegativeBaseIsDefined) {
  EXPECT_DOUBLE_EQ(eval(pow(var_x(0), 3), Point{{-2.0}, {}}), -8.0);
  EXPECT_DOUBLE_EQ(subgrad(pow(var_x(0), 3), Point{{-2.0}, {}}).alpha[0], 12.0);
}

TEST(Expr, OperatorsBuildExpectedTrees) {
  const Expr e = 2.0 * var_x(0) - var_y(1) / 4.0 + 1.0;
  const Point pt{{3.0}, {0.0, 8.0}};
  EXPECT_DOUBLE_EQ(eval(e, pt), 5.0);
  const VarExtent ext = var_extent(e);
  EXPECT_EQ(ext.x, 1u);
  EXPECT_EQ(ext.y, 2u);
  EXPECT_TRUE(same_tree(e, 2.0 * var_x(0) - var_y(1) / 4.0 + 1.0));
  EXPECT_FALSE(same_tree(e, 2.0 * var_x(0) - var_y(0) / 4.0 + 1.0));
}

TEST(Expr, EvalSubgradMatchesSeparateCalls) {
  const MinlpProblem P = fixtures::example31();
  const Point pt{{3.3}, {7.0}};
  const auto [v, s] = eval_subgrad(P.constraints[2], pt);
  EXPECT_EQ(v, eval(P.constraints[2], pt));
  const Subgradient t = subgrad(P.constraints[2], pt);
  EXPECT_EQ(s.alpha, t.alpha);
  EXPECT_EQ(s.beta, t.beta);
}

TEST(Expr, SmoothAgreementWithFiniteDifferences) {
  std::mt19937_64 rng(7);
  const std::vector<Expr> exprs = {
      exp(0.5 * var_x(0) - var_y(0)) + pow(var_x(1), 4),
      -log(var_x(0) + var_x(1) + 1.0),
      sqrt(var_x(0) + 0.5) * -1.0 + 0.3 * pow(var_y(0), 1.5),
  };
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (const Expr& e : exprs) {
    for (int s = 0; s < 50; ++s) {
      const Point pt{{u(rng), u(rng)}, {u(rng)}};
      const Subgradient g = subgrad(e, pt);
      for (std::size_t k = 0; k < 3; ++k) {
        const double fd = central_difference(e, pt, k);
        const double an = k < 2 ? g.alpha[k] : g.beta[0];
        EXPECT_NEAR(an, fd, 1e-4 * std::max(1.0, std::fabs(fd))) << to_string(e);
      }
    }
  }
}

TEST(Expr, DeterministicResults) {
  const MinlpProblem P = fixtures::example31();
  const Point pt{{2.5}, {9.0}};
  const Subgradient a = subgrad(P.objective, pt), b = subgrad(P.objective, pt);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.beta, b.beta);
  EXPECT_EQ(eval(P.objective, pt), eval(P.objective, pt));
}

TEST(Expr, PrintsReadableForm) {
  const std::string s = to_string(pow(var_x(0), 2) + 3.0 * var_y(0));
  EXPECT_NE(s.find("x0"), std::string::npos);
  EXPECT_NE(s.find("y0"), std::string::npos);
}
