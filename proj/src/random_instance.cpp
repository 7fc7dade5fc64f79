#include "boundreg/random_instance.hpp"

#include <algorithm>

#include "boundreg/errors.hpp"

namespace boundreg {

namespace {

bool well_posed(const MatrixXd& lambda, const VectorXd& z) {
  const MatrixXd q = lambda.transpose() * z.asDiagonal() * lambda;
  Eigen::LLT<MatrixXd> llt(q);
  return llt.info() == Eigen::Success && llt.rcond() > 1e-8;
}

} // namespace

RandomInstance random_instance(std::mt19937_64& rng, int max_n, int max_k) {
  if (max_n < 2 || max_k < 1) throw InputError("random instances need max_n >= 2 and max_k >= 1");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    const int n = std::uniform_int_distribution<int>(2, max_n)(rng);
    VectorXd z(n), alpha(n), lower(n), upper(n);
    for (int i = 0; i < n; ++i) {
      z(i) = 0.5 + 1.5 * uni(rng);
      alpha(i) = normal(rng);
      upper(i) = 0.1 + 0.9 * uni(rng);
      lower(i) = -(0.1 + 0.9 * uni(rng));
    }
    const bool classified = max_k >= 2 && uni(rng) < 0.5;
    MatrixXd lambda;
    LoadingsKind kind = LoadingsKind::intercept;
    Index block = 0;
    if (!classified) {
      lambda = MatrixXd::Ones(n, 1);
    } else {
      const int categories = std::uniform_int_distribution<int>(1, max_k - 1)(rng);
      std::vector<int> label(static_cast<std::size_t>(n));
      for (auto& l : label) l = std::uniform_int_distribution<int>(0, categories - 1)(rng);
      std::vector<int> used;
      for (int l : label)
        if (std::find(used.begin(), used.end(), l) == used.end()) used.push_back(l);
      block = static_cast<Index>(used.size());
      lambda = MatrixXd::Zero(n, block + 1);
      for (int i = 0; i < n; ++i) {
        const auto c = std::find(used.begin(), used.end(), label[static_cast<std::size_t>(i)]) - used.begin();
        lambda(i, c) = 1.0;
        lambda(i, block) = normal(rng);
      }
      kind = LoadingsKind::classification_plus_styles;
    }
    if (lambda.cols() >= n || !well_posed(lambda, z)) continue;
    return {std::move(alpha), LoadingsMatrix<double>(std::move(lambda), kind, block), RegressionWeights<double>(std::move(z)),
            BoundSpec<double>(std::move(lower), std::move(upper))};
  }
}

} // namespace boundreg
