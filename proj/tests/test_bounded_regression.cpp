#include <gtest/gtest.h>

#include <random>

#include "boundreg/bounded_regression.hpp"
#include "boundreg/errors.hpp"
#include "boundreg/oracle.hpp"
#include "boundreg/random_instance.hpp"

using namespace boundreg;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const VectorXd kCanonicalAlpha = vec({4, 1, -1, -4});

double neutrality(const LoadingsMatrix<double>& l, const VectorXd& w) {
  return (l.values().transpose() * w).cwiseAbs().maxCoeff();
}

} // namespace

TEST(BoundPolicy, UniformCap) {
  const auto b = bounds_from_policy(UniformCap{0.3}, 4);
  EXPECT_EQ(b.upper(), VectorXd::Constant(4, 0.3));
  EXPECT_EQ(b.lower(), VectorXd::Constant(4, -0.3));
}

TEST(BoundPolicy, TurnoverCap) {
  const auto b = bounds_from_policy(TurnoverCap{0.1, 2.0, vec({1, 3})}, 2);
  EXPECT_DOUBLE_EQ(b.upper()(0), 1.0);
  EXPECT_DOUBLE_EQ(b.lower()(0), -1.0);
  EXPECT_DOUBLE_EQ(b.upper()(1), 0.1);
  EXPECT_DOUBLE_EQ(b.lower()(1), -0.1);
}

TEST(BoundPolicy, ExplicitMustStraddleZero) {
  EXPECT_THROW(bounds_from_policy(ExplicitBounds{vec({0.2, -1}), vec({1, 1})}, 2), InputError);
  EXPECT_THROW(bounds_from_policy(ExplicitBounds{vec({-1}), vec({1})}, 2), InputError);
}

TEST(RestrictedNormal, DropsColumnsAbsentFromFreeSet) {
  const std::vector<std::string> labels{"a", "a", "b", "b"};
  const auto l = classification_loadings(labels);
  const RegressionWeights<double> z(vec({1, 2, 3, 4}));
  const std::vector<Index> free_set{0, 1};
  const auto r = restricted_normal_matrix(l, z, free_set);
  EXPECT_EQ(r.kept_columns, (std::vector<Index>{0}));
  ASSERT_EQ(r.q.rows(), 1);
  EXPECT_DOUBLE_EQ(r.q(0, 0), 3.0);
}

TEST(RestrictedNormal, InterceptCountsFreeElements) {
  const std::vector<Index> free_set{2, 3};
  const auto r = restricted_normal_matrix(intercept_loadings(4), RegressionWeights<double>::ones(4), free_set);
  EXPECT_DOUBLE_EQ(r.q(0, 0), 2.0);
}

TEST(RestrictedNormal, DuplicatedStyleIsSingular) {
  MatrixXd lambda(3, 3);
  lambda << 1, 0.5, 0.5, 1, -1, -1, 1, 2, 2;
  const std::vector<Index> free_set{0, 1, 2};
  EXPECT_THROW(restricted_normal_matrix(LoadingsMatrix<double>(lambda, LoadingsKind::general),
                                        RegressionWeights<double>::ones(3), free_set),
               SingularSystemError);
}

TEST(ClipStep, RayToBox) {
  const auto b = BoundSpec<double>::symmetric(2, 0.5);
  const auto c = clip_step(VectorXd(VectorXd::Zero(2)), vec({0.6, -0.6}), b);
  EXPECT_NEAR(c.t_star, 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(c.point(0), 0.5, 1e-15);
  EXPECT_NEAR(c.point(1), -0.5, 1e-15);
}

TEST(ClipStep, InsideAndZeroStep) {
  const auto b = BoundSpec<double>::symmetric(2, 0.5);
  const auto inside = clip_step(VectorXd(VectorXd::Zero(2)), vec({0.2, -0.1}), b);
  EXPECT_EQ(inside.t_star, 1.0);
  EXPECT_EQ(inside.point, vec({0.2, -0.1}));
  const auto still = clip_step(vec({0.1, 0.1}), vec({0.1, 0.1}), b);
  EXPECT_EQ(still.point, vec({0.1, 0.1}));
}

TEST(FixedGamma, CanonicalAtGammaTenth) {
  const auto l = intercept_loadings(4);
  const auto z = RegressionWeights<double>::ones(4);
  const auto b = BoundSpec<double>::symmetric(4, 0.3);
  int iterates = 0;
  auto observe = [&](const SolveState<double>& s) {
    ++iterates;
    EXPECT_LT(neutrality(l, s.w_hat), 1e-14);
    EXPECT_LE(s.w_hat.maxCoeff(), 0.3 + 1e-12);
    EXPECT_GE(s.w_hat.minCoeff(), -0.3 - 1e-12);
  };
  const auto sol = solve_fixed_gamma<double>(0.1 * kCanonicalAlpha, l, z, b, SolverConfig{}, observe);
  EXPECT_GT(iterates, 0);
  EXPECT_EQ(sol.state.j_plus(), (std::vector<Index>{0}));
  EXPECT_EQ(sol.state.j_minus(), (std::vector<Index>{3}));
  EXPECT_LT((sol.w_tilde - vec({0.3, 0.1, -0.1, -0.3})).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FixedGamma, NonBindingBoundsGiveResiduals) {
  const auto l = intercept_loadings(3);
  const RegressionWeights<double> z(vec({1, 2, 0.5}));
  const VectorXd alpha = vec({0.1, -0.05, 0.2});
  const auto sol = solve_fixed_gamma(alpha, l, z, BoundSpec<double>::symmetric(3, 1.0), SolverConfig{});
  const auto reg = weighted_residuals(alpha, l, z);
  EXPECT_LT((sol.w_tilde - z.values().cwiseProduct(reg.residuals)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(sol.state.j_plus().empty());
  EXPECT_TRUE(sol.state.j_minus().empty());
}

TEST(FixedGamma, ZeroResidualsGiveZero) {
  const auto sol = solve_fixed_gamma(vec({0.3, 0.3}), intercept_loadings(2), RegressionWeights<double>::ones(2),
                                     BoundSpec<double>::symmetric(2, 0.5), SolverConfig{});
  EXPECT_LT(sol.w_tilde.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(sol.state.j_plus().empty() && sol.state.j_minus().empty());
}

TEST(Bounded, CanonicalInstance) {
  const auto sol = bounded_regression(kCanonicalAlpha, intercept_loadings(4), RegressionWeights<double>::ones(4),
                                      BoundSpec<double>::symmetric(4, 0.3));
  EXPECT_LT((sol.weights - vec({0.3, 0.2, -0.2, -0.3})).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(sol.gamma(), 0.2, 1e-10);
}

TEST(Bounded, UnconstrainedSolutionOnTheBounds) {
  const auto sol = bounded_regression(vec({1, 3}), intercept_loadings(2), RegressionWeights<double>::ones(2),
                                      BoundSpec<double>::symmetric(2, 0.5));
  EXPECT_LT((sol.weights - vec({-0.5, 0.5})).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(sol.state.outer_iterations, 1);
}

TEST(Bounded, InfeasibleTwoElementCaps) {
  try {
    bounded_regression(vec({1, 3}), intercept_loadings(2), RegressionWeights<double>::ones(2),
                       BoundSpec<double>::symmetric(2, 0.4));
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("normalization infeasible under bounds"), std::string::npos);
    EXPECT_LE(e.state().outer_iterations, SolverConfig{}.max_outer);
  }
}

TEST(Bounded, FixedElementsStayAtTheirValue) {
  VectorXd lower = VectorXd::Constant(5, -0.4), upper = VectorXd::Constant(5, 0.4);
  lower(2) = upper(2) = 0.0;
  const auto sol = bounded_regression(vec({2, -1, 5, 0.5, -3}), intercept_loadings(5),
                                      RegressionWeights<double>::ones(5), BoundSpec<double>(lower, upper));
  EXPECT_EQ(sol.weights(2), 0.0);
  EXPECT_NEAR(sol.weights.cwiseAbs().sum(), 1.0, 1e-10);
  EXPECT_LT(std::abs(sol.weights.sum()), 1e-12);
}

TEST(Bounded, AllFixedIsAnInputError) {
  EXPECT_THROW(bounded_regression(vec({1, 2}), intercept_loadings(2), RegressionWeights<double>::ones(2),
                                  BoundSpec<double>(VectorXd::Zero(2), VectorXd::Zero(2))),
               InputError);
}

TEST(Bounded, InnerCapRaisesNonConvergence) {
  SolverConfig config;
  config.max_inner = 1;
  EXPECT_THROW(bounded_regression(kCanonicalAlpha, intercept_loadings(4), RegressionWeights<double>::ones(4),
                                  BoundSpec<double>::symmetric(4, 0.3), config),
               NonConvergenceError);
}

TEST(Rebalance, ZeroPriorReducesToEstablishing) {
  const auto l = intercept_loadings(4);
  const auto z = RegressionWeights<double>::ones(4);
  const auto b = BoundSpec<double>::symmetric(4, 0.3);
  const auto a = bounded_regression(kCanonicalAlpha, l, z, b);
  const auto r = bounded_regression_rebalance(kCanonicalAlpha, l, z, b, VectorXd(VectorXd::Zero(4)));
  EXPECT_EQ(a.weights, r.weights);
  EXPECT_EQ(r.trades, r.weights);
}

TEST(Rebalance, NonNeutralPriorRejected) {
  EXPECT_THROW(bounded_regression_rebalance(kCanonicalAlpha, intercept_loadings(4),
                                            RegressionWeights<double>::ones(4), BoundSpec<double>::symmetric(4, 0.3),
                                            vec({0.05, -0.05, 0.05, -0.049})),
               InputError);
}

TEST(Rebalance, CanonicalWithPriorMatchesOracleInTradeSpace) {
  const auto l = intercept_loadings(4);
  const auto z = RegressionWeights<double>::ones(4);
  const auto b = BoundSpec<double>::symmetric(4, 0.3);
  const VectorXd prior = vec({0.05, -0.05, 0.05, -0.05});
  const auto r = bounded_regression_rebalance(kCanonicalAlpha, l, z, b, prior);
  EXPECT_LT((r.weights - r.trades - prior).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(r.weights.cwiseAbs().sum(), 1.0, 1e-10);
  EXPECT_LT(neutrality(l, r.weights), 1e-12);
  const auto o = oracle::oracle_fixed_gamma<double>(r.gamma() * kCanonicalAlpha, l, z, b);
  EXPECT_LT((o.weights - r.trades).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Properties, RandomInstancesAgainstOracle) {
  std::mt19937_64 rng(20240601);
  int compared = 0;
  for (int t = 0; t < 150; ++t) {
    const auto inst = random_instance(rng, 7, 3);
    VectorXd expected;
    try {
      expected = oracle::oracle_bounded_regression(inst.alpha, inst.loadings, inst.z, inst.bounds).weights;
    } catch (const Error&) {
      continue;
    }
    const auto sol = bounded_regression(inst.alpha, inst.loadings, inst.z, inst.bounds);
    EXPECT_LE((sol.weights - expected).cwiseAbs().maxCoeff(), 1e-8) << "instance " << t;
    ++compared;
  }
  EXPECT_GT(compared, 100);
}

TEST(Properties, ContractAndCertificate) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 150; ++t) {
    const auto inst = random_instance(rng, 8, 3);
    BoundedSolution<double> sol;
    try {
      sol = bounded_regression(inst.alpha, inst.loadings, inst.z, inst.bounds);
    } catch (const SolverError&) {
      continue;
    }
    const VectorXd& w = sol.weights;
    EXPECT_NEAR(w.cwiseAbs().sum(), 1.0, 1e-5);
    const double scale = (inst.loadings.values().cwiseAbs().transpose() * inst.bounds.upper()).maxCoeff();
    EXPECT_LE(neutrality(inst.loadings, w), 1e-10 * scale);
    EXPECT_LE((w - inst.bounds.upper()).maxCoeff(), 1e-6);
    EXPECT_LE((inst.bounds.lower() - w).maxCoeff(), 1e-6);
    const auto cert = kkt_certificate<double>(sol.gamma() * inst.alpha, inst.loadings, inst.z, inst.bounds,
                                              sol.state.activity, w);
    EXPECT_LE(cert.stationarity(), 1e-8) << "instance " << t;
  }
}

TEST(Properties, IteratesStayNeutralAndInBounds) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 60; ++t) {
    const auto inst = random_instance(rng, 8, 3);
    const double gamma = 0.5 / inst.z.values().cwiseProduct(inst.alpha.cwiseAbs()).sum() * (1 + t % 7);
    const double scale = std::max(1.0, inst.loadings.values().cwiseAbs().maxCoeff());
    auto observe = [&](const SolveState<double>& s) {
      EXPECT_LE(neutrality(inst.loadings, s.w_hat), 1e-12 * scale);
      EXPECT_LE((s.w_hat - inst.bounds.upper()).maxCoeff(), 1e-6);
      EXPECT_LE((inst.bounds.lower() - s.w_hat).maxCoeff(), 1e-6);
    };
    try {
      solve_fixed_gamma<double>(gamma * inst.alpha, inst.loadings, inst.z, inst.bounds, SolverConfig{}, observe);
    } catch (const SolverError&) {
    }
  }
}

TEST(Properties, ScaleInvariance) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 40; ++t) {
    const auto inst = random_instance(rng, 8, 3);
    BoundedSolution<double> a;
    try {
      a = bounded_regression(inst.alpha, inst.loadings, inst.z, inst.bounds);
    } catch (const SolverError&) {
      continue;
    }
    const auto b = bounded_regression(VectorXd(7.5 * inst.alpha), inst.loadings, inst.z, inst.bounds);
    EXPECT_LE((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(b.gamma() * 7.5, a.gamma(), 1e-9 * a.gamma());
  }
}

TEST(Properties, Deterministic) {
  std::mt19937_64 rng(42);
  const auto inst = random_instance(rng, 8, 3);
  auto run = [&] { return bounded_regression(inst.alpha, inst.loadings, inst.z, BoundSpec<double>::symmetric(inst.alpha.size(), 0.35)); };
  try {
    const auto a = run();
    const auto b = run();
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.gamma(), b.gamma());
  } catch (const SolverError&) {
    EXPECT_THROW(run(), SolverError);
  }
}

TEST(Properties, UnboundedLimit) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto inst = random_instance(rng, 8, 3);
    const auto b = BoundSpec<double>::symmetric(inst.alpha.size(), 1.0);
    const VectorXd expected = unbounded_weights(inst.alpha, inst.loadings, inst.z);
    const auto sol = bounded_regression(inst.alpha, inst.loadings, inst.z, b);
    EXPECT_LE((sol.weights - expected).cwiseAbs().maxCoeff(), 1e-10);
  }
}
