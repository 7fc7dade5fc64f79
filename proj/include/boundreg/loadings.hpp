#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "boundreg/errors.hpp"
#include "boundreg/types.hpp"

namespace boundreg {

/// Symmetric N x N covariance with a strictly positive diagonal.
template <typename Scalar>
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Matrix<Scalar> values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols() || values_.rows() == 0)
      throw InputError("covariance matrix must be square and non-empty");
    const Scalar scale = values_.cwiseAbs().maxCoeff();
    const Scalar asym = (values_ - values_.transpose()).cwiseAbs().maxCoeff();
    if (asym > Scalar(1e-12) * scale)
      throw InputError("covariance matrix is not symmetric");
    for (Index i = 0; i < values_.rows(); ++i) {
      if (!(values_(i, i) > Scalar(0)))
        throw InputError("covariance diagonal must be strictly positive (instrument " +
                         std::to_string(i) + ")");
    }
  }

  const Matrix<Scalar>& values() const { return values_; }
  auto diag() const { return values_.diagonal(); }
  Index size() const { return values_.rows(); }

 private:
  Matrix<Scalar> values_;
};

enum class LoadingsKind {
  principal_components,
  intercept,
  classification,
  classification_plus_styles,
  general,
};

/// N x K risk-factor loadings. For the classification kinds the first
/// `classification_columns` columns form a one-hot block.
template <typename Scalar>
class LoadingsMatrix {
 public:
  LoadingsMatrix(Matrix<Scalar> values, LoadingsKind kind, Index classification_columns = 0)
      : values_(std::move(values)), kind_(kind), classification_columns_(classification_columns) {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw InputError("loadings matrix needs N >= 1 rows and K >= 1 columns");
    if (!values_.allFinite()) throw InputError("loadings matrix has non-finite entries");
    for (Index a = 0; a < values_.cols(); ++a) {
      if ((values_.col(a).array() == Scalar(0)).all())
        throw InputError("loadings column " + std::to_string(a) + " is identically zero");
    }
    if (kind_ == LoadingsKind::intercept) classification_columns_ = values_.cols();
    if (kind_ == LoadingsKind::classification) classification_columns_ = values_.cols();
    if (classification_columns_ > values_.cols())
      throw InputError("classification block wider than the loadings matrix");
    if (classification_columns_ > 0) {
      auto block = values_.leftCols(classification_columns_);
      for (Index i = 0; i < block.rows(); ++i) {
        for (Index a = 0; a < block.cols(); ++a) {
          if (block(i, a) != Scalar(0) && block(i, a) != Scalar(1))
            throw InputError("classification loadings must be binary");
        }
        if (block.row(i).sum() != Scalar(1))
          throw InputError("classification row " + std::to_string(i) + " does not sum to 1");
      }
    }
  }

  const Matrix<Scalar>& values() const { return values_; }
  LoadingsKind kind() const { return kind_; }
  Index rows() const { return values_.rows(); }
  Index factors() const { return values_.cols(); }
  Index classification_columns() const { return classification_columns_; }

 private:
  Matrix<Scalar> values_;
  LoadingsKind kind_;
  Index classification_columns_;
};

/// Unbiased sample covariance of the rows of `observations` (N x (M+1)).
/// `ids`, when given, names the offending instrument in errors.
template <typename Derived>
CovarianceMatrix<typename Derived::Scalar> sample_covariance(
    const Eigen::MatrixBase<Derived>& observations, std::span<const std::string> ids = {}) {
  using Scalar = typename Derived::Scalar;
  const Index n = observations.rows();
  const Index samples = observations.cols();
  if (samples < 2) throw InputError("sample covariance needs at least two observations (M >= 1)");
  Matrix<Scalar> centered = observations.colwise() - observations.rowwise().mean();
  Matrix<Scalar> cov = (centered * centered.transpose()) / Scalar(samples - 1);
  cov = (cov + cov.transpose()) * Scalar(0.5);
  for (Index i = 0; i < n; ++i) {
    if (!(cov(i, i) > Scalar(0))) {
      const std::string name = ids.size() == static_cast<std::size_t>(n)
                                   ? ids[static_cast<std::size_t>(i)]
                                   : std::to_string(i);
      throw InputError("zero sample variance for instrument " + name);
    }
  }
  return CovarianceMatrix<Scalar>(std::move(cov));
}

/// Eigenvectors of `cov` whose eigenvalues exceed eigen_tol * lambda_max,
/// in descending eigenvalue order. Each column's largest-magnitude entry is
/// made positive.
template <typename Scalar>
LoadingsMatrix<Scalar> pca_loadings(const CovarianceMatrix<Scalar>& cov,
                                    Scalar eigen_tol = Scalar(1e-10)) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(cov.values());
  if (solver.info() != Eigen::Success) throw SolverError("eigendecomposition failed");
  const Vector<Scalar>& evals = solver.eigenvalues();  // ascending
  const Index n = evals.size();
  const Scalar lambda_max = evals(n - 1);
  if (!(lambda_max > Scalar(0))) throw InputError("covariance has no positive eigenvalue");
  const Scalar cutoff = eigen_tol * lambda_max;
  Index k = 0;
  for (Index j = n - 1; j >= 0 && evals(j) > cutoff; --j) ++k;
  if (k == 0) throw InputError("all eigenvalues are below the threshold");

  Matrix<Scalar> cols(n, k);
  for (Index c = 0; c < k; ++c) {
    Vector<Scalar> v = solver.eigenvectors().col(n - 1 - c);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < Scalar(0)) v = -v;
    cols.col(c) = v;
  }
  return LoadingsMatrix<Scalar>(std::move(cols), LoadingsKind::principal_components);
}

template <typename Scalar = double>
LoadingsMatrix<Scalar> intercept_loadings(Index n) {
  return LoadingsMatrix<Scalar>(Matrix<Scalar>::Ones(n, 1), LoadingsKind::intercept);
}

/// One binary column per distinct label, in order of first appearance.
template <typename Scalar = double>
LoadingsMatrix<Scalar> classification_loadings(std::span<const std::string> labels) {
  if (labels.empty()) throw InputError("classification needs at least one label");
  std::unordered_map<std::string, Index> column_of;
  std::vector<Index> assigned;
  assigned.reserve(labels.size());
  for (const auto& label : labels) {
    if (label.empty()) throw InputError("instrument without a classification label");
    auto [it, inserted] = column_of.emplace(label, static_cast<Index>(column_of.size()));
    assigned.push_back(it->second);
  }
  Matrix<Scalar> values = Matrix<Scalar>::Zero(static_cast<Index>(labels.size()),
                                               static_cast<Index>(column_of.size()));
  for (std::size_t i = 0; i < assigned.size(); ++i) values(static_cast<Index>(i), assigned[i]) = 1;
  return LoadingsMatrix<Scalar>(std::move(values), LoadingsKind::classification);
}

/// Appends style columns. The classification block of `base` (intercept
/// counts as a one-column block) is kept in front.
template <typename Scalar, typename Derived>
LoadingsMatrix<Scalar> augment_style_columns(const LoadingsMatrix<Scalar>& base,
                                             const Eigen::MatrixBase<Derived>& styles) {
  if (styles.cols() < 1) throw InputError("style block needs at least one column");
  if (styles.rows() != base.rows())
    throw InputError("style block has " + std::to_string(styles.rows()) + " rows, loadings have " +
                     std::to_string(base.rows()));
  for (Index s = 0; s < styles.cols(); ++s) {
    if ((styles.col(s).array() == Scalar(0)).all())
      throw InputError("style column " + std::to_string(s) + " is identically zero");
  }
  Matrix<Scalar> values(base.rows(), base.factors() + styles.cols());
  values << base.values(), styles.template cast<Scalar>();
  const bool classified = base.classification_columns() > 0;
  return LoadingsMatrix<Scalar>(
      std::move(values),
      classified ? LoadingsKind::classification_plus_styles : LoadingsKind::general,
      base.classification_columns());
}

} // namespace boundreg
