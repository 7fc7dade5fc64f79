#pragma once

#include <random>

#include "boundreg/bounded_regression.hpp"
#include "boundreg/loadings.hpp"
#include "boundreg/weighted_regression.hpp"

namespace boundreg {

/// A random bounded-regression problem: intercept, or a random binary
/// classification plus one N(0,1) style column; z ~ U(0.5, 2),
/// alpha ~ N(0, 1), upper ~ U(0.1, 1), lower ~ -U(0.1, 1). The full normal
/// matrix is invertible and K < N.
struct RandomInstance {
  VectorXd alpha;
  LoadingsMatrix<double> loadings;
  RegressionWeights<double> z;
  BoundSpec<double> bounds;
};

RandomInstance random_instance(std::mt19937_64& rng, int max_n, int max_k);

} // namespace boundreg
