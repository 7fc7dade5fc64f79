#include <gtest/gtest.h>

#include "boundreg/errors.hpp"
#include "boundreg/oracle.hpp"

using namespace boundreg;

namespace {
VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
} // namespace

TEST(Oracle, CanonicalFixedGamma) {
  const auto o = oracle::oracle_fixed_gamma<double>(0.2 * vec({4, 1, -1, -4}), intercept_loadings(4),
                                                    RegressionWeights<double>::ones(4),
                                                    BoundSpec<double>::symmetric(4, 0.3));
  EXPECT_LT((o.weights - vec({0.3, 0.2, -0.2, -0.3})).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(o.active_pattern,
            (std::vector<Activity>{Activity::at_upper, Activity::free, Activity::free, Activity::at_lower}));
  EXPECT_TRUE(o.kkt_ok);
  EXPECT_FALSE(o.tie);
}

TEST(Oracle, AcceptedPatternMinimizesObjective) {
  // Re-enumerate independently and compare objectives of every feasible pattern.
  const VectorXd alpha = vec({0.5, -0.2, 0.3, -0.9});
  const auto l = intercept_loadings(4);
  const RegressionWeights<double> z(vec({1, 2, 0.5, 1.5}));
  const auto b = BoundSpec<double>::symmetric(4, 0.25);
  const auto o = oracle::oracle_fixed_gamma<double>(alpha, l, z, b);
  std::vector<int> digits(4, 0);
  int feasible = 0;
  for (int code = 0; code < 81; ++code) {
    int c = code;
    for (int i = 3; i >= 0; --i) digits[static_cast<std::size_t>(i)] = c % 3, c /= 3;
    const auto r = oracle::detail::evaluate_pattern(digits, alpha, l.values(), z.values(), b.lower(), b.upper());
    if (!r.feasible) continue;
    ++feasible;
    EXPECT_GE(r.objective, o.objective - 1e-14);
  }
  EXPECT_EQ(feasible, o.feasible_patterns);
}

TEST(Oracle, NonBindingIsAllFree) {
  const VectorXd alpha = vec({0.1, -0.3, 0.05});
  const auto l = intercept_loadings(3);
  const auto z = RegressionWeights<double>::ones(3);
  const auto o = oracle::oracle_fixed_gamma<double>(alpha, l, z, BoundSpec<double>::symmetric(3, 1.0));
  for (auto a : o.active_pattern) EXPECT_EQ(a, Activity::free);
  EXPECT_LT((o.weights - weighted_residuals(alpha, l, z).residuals).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Oracle, FullProblemCanonical) {
  const auto o = oracle::oracle_bounded_regression(vec({4, 1, -1, -4}), intercept_loadings(4),
                                                   RegressionWeights<double>::ones(4),
                                                   BoundSpec<double>::symmetric(4, 0.3));
  EXPECT_LT((o.weights - vec({0.3, 0.2, -0.2, -0.3})).cwiseAbs().maxCoeff(), 1e-10);
  const auto s = bounded_regression(vec({4, 1, -1, -4}), intercept_loadings(4), RegressionWeights<double>::ones(4),
                                    BoundSpec<double>::symmetric(4, 0.3));
  EXPECT_LT((o.weights - s.weights).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Oracle, UnboundedLimit) {
  const VectorXd alpha = vec({0.7, -1.2, 0.4, 2.0, -0.3});
  const auto l = intercept_loadings(5);
  const RegressionWeights<double> z(vec({1, 0.5, 2, 1.5, 1}));
  const auto o = oracle::oracle_bounded_regression(alpha, l, z, BoundSpec<double>::symmetric(5, 1.0));
  EXPECT_LT((o.weights - unbounded_weights(alpha, l, z)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Oracle, ReportsInfeasibility) {
  EXPECT_THROW(oracle::oracle_bounded_regression(vec({1, 3}), intercept_loadings(2),
                                                 RegressionWeights<double>::ones(2),
                                                 BoundSpec<double>::symmetric(2, 0.4)),
               InfeasibleError);
}

TEST(Oracle, SizeCap) {
  EXPECT_THROW(oracle::oracle_fixed_gamma<double>(VectorXd::Ones(13), intercept_loadings(13),
                                                  RegressionWeights<double>::ones(13),
                                                  BoundSpec<double>::symmetric(13, 1.0)),
               InputError);
}
