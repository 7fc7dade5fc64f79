#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "boundreg/errors.hpp"
#include "boundreg/loadings.hpp"
#include "boundreg/types.hpp"

namespace boundreg {

/// Reciprocal-condition floor for normal matrices.
inline constexpr double kMinNormalRcond = 1e-12;

/// Cross-sectional regression weights z_i, strictly positive and finite.
template <typename Scalar>
class RegressionWeights {
 public:
  explicit RegressionWeights(Vector<Scalar> z) : z_(std::move(z)) {
    if (z_.size() == 0) throw InputError("regression weights are empty");
    for (Index i = 0; i < z_.size(); ++i) {
      if (!(z_(i) > Scalar(0)) || !std::isfinite(static_cast<double>(z_(i))))
        throw InputError("regression weight " + std::to_string(i) + " is not positive and finite");
    }
  }

  static RegressionWeights ones(Index n) { return RegressionWeights(Vector<Scalar>::Ones(n)); }

  const Vector<Scalar>& values() const { return z_; }
  Index size() const { return z_.size(); }
  Scalar operator()(Index i) const { return z_(i); }

 private:
  Vector<Scalar> z_;
};

template <typename Scalar>
struct RegressionResult {
  Vector<Scalar> residuals;
  Vector<Scalar> fitted_coeffs;
  Matrix<Scalar> normal_matrix;
};

/// z_i = 1 / C_ii.
template <typename Scalar>
RegressionWeights<Scalar> regression_weights_from_cov(const CovarianceMatrix<Scalar>& cov) {
  return RegressionWeights<Scalar>(cov.diag().cwiseInverse());
}

namespace detail {

template <typename Scalar>
Eigen::LLT<Matrix<Scalar>> factorize_normal(const Matrix<Scalar>& q, const char* what) {
  Eigen::LLT<Matrix<Scalar>> llt(q);
  const double rcond = llt.info() == Eigen::Success ? static_cast<double>(llt.rcond()) : 0.0;
  if (llt.info() != Eigen::Success || !(rcond >= kMinNormalRcond)) {
    throw SingularSystemError(std::string(what) + " is singular or ill-conditioned (rcond estimate " +
                                  std::to_string(rcond) + ")",
                              rcond);
  }
  return llt;
}

template <typename Scalar>
void check_regression_shapes(Index n_alpha, const LoadingsMatrix<Scalar>& loadings,
                             const RegressionWeights<Scalar>& z) {
  if (loadings.rows() != n_alpha || z.size() != n_alpha)
    throw InputError("inconsistent sizes: alpha " + std::to_string(n_alpha) + ", loadings " +
                     std::to_string(loadings.rows()) + ", weights " + std::to_string(z.size()));
}

/// True when sum z|eps| is negligible next to sum z|alpha|, i.e. the
/// regression leaves no direction to allocate along.
template <typename Scalar>
bool residuals_vanish(const Vector<Scalar>& alpha, const Vector<Scalar>& residuals,
                      const Vector<Scalar>& z) {
  const Scalar res = z.cwiseProduct(residuals.cwiseAbs()).sum();
  const Scalar ref = z.cwiseProduct(alpha.cwiseAbs()).sum();
  return !(res > Scalar(64) * std::numeric_limits<Scalar>::epsilon() * ref);
}

} // namespace detail

/// Residuals of the weighted regression of alpha over the loadings
/// (no implicit intercept).
template <typename Derived, typename Scalar = typename Derived::Scalar>
RegressionResult<Scalar> weighted_residuals(const Eigen::MatrixBase<Derived>& alpha,
                                            const LoadingsMatrix<Scalar>& loadings,
                                            const RegressionWeights<Scalar>& z) {
  detail::check_regression_shapes(alpha.size(), loadings, z);
  const Matrix<Scalar>& lambda = loadings.values();
  Matrix<Scalar> weighted = z.values().asDiagonal() * lambda;
  Matrix<Scalar> q = lambda.transpose() * weighted;
  auto llt = detail::factorize_normal(q, "normal matrix Q");
  Vector<Scalar> coeffs = llt.solve(weighted.transpose() * alpha);
  Vector<Scalar> residuals = alpha - lambda * coeffs;
  return {std::move(residuals), std::move(coeffs), std::move(q)};
}

/// gamma^(0) = 1 / sum z_i |eps_i|.
template <typename Scalar>
Scalar gamma_seed(const RegressionResult<Scalar>& result, const RegressionWeights<Scalar>& z) {
  const Scalar denom = z.values().cwiseProduct(result.residuals.cwiseAbs()).sum();
  if (!(denom > Scalar(0)) || !std::isfinite(static_cast<double>(denom)))
    throw InputError("gamma seed undefined: sum z|eps| is zero");
  return Scalar(1) / denom;
}

/// w_i = gamma z_i eps_i with sum |w_i| = 1.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> unbounded_weights(const Eigen::MatrixBase<Derived>& alpha,
                                 const LoadingsMatrix<Scalar>& loadings,
                                 const RegressionWeights<Scalar>& z) {
  const Vector<Scalar> a = alpha;
  auto reg = weighted_residuals(a, loadings, z);
  if (detail::residuals_vanish(a, reg.residuals, z.values()))
    throw InputError("all regression residuals vanish; no direction to allocate");
  Vector<Scalar> w = z.values().cwiseProduct(reg.residuals);
  return w / w.cwiseAbs().sum();
}

} // namespace boundreg
