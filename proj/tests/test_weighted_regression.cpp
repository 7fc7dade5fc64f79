#include <gtest/gtest.h>

#include "boundreg/errors.hpp"
#include "boundreg/weighted_regression.hpp"

using namespace boundreg;

namespace {
VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
} // namespace

TEST(Weights, ReciprocalOfDiagonal) {
  const auto z = regression_weights_from_cov(CovarianceMatrix<double>(vec({1, 4}).asDiagonal().toDenseMatrix()));
  EXPECT_DOUBLE_EQ(z(0), 1.0);
  EXPECT_DOUBLE_EQ(z(1), 0.25);
  const auto z1 = regression_weights_from_cov(CovarianceMatrix<double>(MatrixXd::Identity(3, 3)));
  EXPECT_EQ(z1.values(), VectorXd::Ones(3));
  const auto z2 = regression_weights_from_cov(CovarianceMatrix<double>(MatrixXd::Constant(1, 1, 0.01)));
  EXPECT_NEAR(z2(0), 100.0, 1e-12);
}

TEST(Weights, RejectNonPositive) {
  EXPECT_THROW(RegressionWeights<double>(vec({1, 0})), InputError);
  EXPECT_THROW(RegressionWeights<double>(vec({1, -2})), InputError);
}

TEST(Residuals, Demeaning) {
  const auto r = weighted_residuals(vec({1, 3}), intercept_loadings(2), RegressionWeights<double>::ones(2));
  EXPECT_NEAR(r.residuals(0), -1.0, 1e-15);
  EXPECT_NEAR(r.residuals(1), 1.0, 1e-15);
}

TEST(Residuals, WeightedLeastSquares) {
  // Q = 1 + 3 = 4, y = 1 + 9 = 10, fitted 2.5.
  const auto r = weighted_residuals(vec({1, 3}), intercept_loadings(2), RegressionWeights<double>(vec({1, 3})));
  EXPECT_NEAR(r.fitted_coeffs(0), 2.5, 1e-15);
  EXPECT_NEAR(r.residuals(0), -1.5, 1e-15);
  EXPECT_NEAR(r.residuals(1), 0.5, 1e-15);
  EXPECT_NEAR(r.normal_matrix(0, 0), 4.0, 1e-15);
}

TEST(Residuals, PerfectFitWhenSquare) {
  const MatrixXd lambda = (MatrixXd(2, 2) << 1, 1, 1, -1).finished();
  const auto r = weighted_residuals(vec({2, 7}), LoadingsMatrix<double>(lambda, LoadingsKind::general),
                                    RegressionWeights<double>::ones(2));
  EXPECT_LT(r.residuals.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Residuals, SingularNormalMatrix) {
  const MatrixXd lambda = (MatrixXd(3, 2) << 1, 1, 1, 1, 1, 1).finished();
  EXPECT_THROW(weighted_residuals(vec({1, 2, 3}), LoadingsMatrix<double>(lambda, LoadingsKind::general),
                                  RegressionWeights<double>::ones(3)),
               SingularSystemError);
}

TEST(Residuals, ShapeMismatch) {
  EXPECT_THROW(weighted_residuals(vec({1, 2, 3}), intercept_loadings(2), RegressionWeights<double>::ones(2)),
               InputError);
}

TEST(Unbounded, TwoPoint) {
  const VectorXd w = unbounded_weights(vec({1, 3}), intercept_loadings(2), RegressionWeights<double>::ones(2));
  EXPECT_NEAR(w(0), -0.5, 1e-15);
  EXPECT_NEAR(w(1), 0.5, 1e-15);
}

TEST(Unbounded, Canonical) {
  const VectorXd w =
      unbounded_weights(vec({4, 1, -1, -4}), intercept_loadings(4), RegressionWeights<double>::ones(4));
  EXPECT_LT((w - vec({0.4, 0.1, -0.1, -0.4})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Unbounded, ZeroResiduals) {
  EXPECT_THROW(unbounded_weights(vec({2, 2}), intercept_loadings(2), RegressionWeights<double>::ones(2)),
               InputError);
}

TEST(GammaSeed, Formula) {
  const auto z = RegressionWeights<double>::ones(2);
  EXPECT_DOUBLE_EQ(gamma_seed(weighted_residuals(vec({1, 3}), intercept_loadings(2), z), z), 0.5);
  const RegressionWeights<double> z3(vec({1, 3}));
  EXPECT_NEAR(gamma_seed(weighted_residuals(vec({1, 3}), intercept_loadings(2), z3), z3), 1.0 / 3.0, 1e-15);
  RegressionResult<double> zero{VectorXd::Zero(2), VectorXd::Zero(1), MatrixXd::Ones(1, 1)};
  EXPECT_THROW(gamma_seed(zero, z), InputError);
}

TEST(Generic, FloatScalar) {
  const Eigen::VectorXf alpha = (Eigen::VectorXf(2) << 1.0f, 3.0f).finished();
  const auto w = unbounded_weights(alpha, intercept_loadings<float>(2), RegressionWeights<float>::ones(2));
  EXPECT_FLOAT_EQ(w(1), 0.5f);
}
