#pragma once

// Weighted cross-sectional regression with per-element bounds, factor
// neutrality and L1 normalization.
//
// Two nested iterations. For fixed gamma, the inner loop walks a feasible,
// neutral iterate w_hat towards the regression solution of the current
// free set, clipping at the first bound it meets and pinning elements that
// land on a bound (J+ / J-). When the partition stops changing, pinned
// elements whose stationarity condition is violated are released one at a
// time. The outer loop rescales gamma by 1 / sum |w~| until the weights are
// L1-normalized, then polishes gamma with Newton steps on the final
// partition, along which w~ is affine in gamma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "boundreg/errors.hpp"
#include "boundreg/loadings.hpp"
#include "boundreg/types.hpp"
#include "boundreg/weighted_regression.hpp"

namespace boundreg {

/// Per-element bounds lower_i <= 0 <= upper_i. "No bound" is +-1 for
/// weights. Elements with lower_i == upper_i (necessarily 0) are fixed.
template <typename Scalar>
class BoundSpec {
 public:
  BoundSpec(Vector<Scalar> lower, Vector<Scalar> upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size())
      throw InputError("lower and upper bounds differ in length");
    for (Index i = 0; i < lower_.size(); ++i) {
      const auto lo = static_cast<double>(lower_(i));
      const auto up = static_cast<double>(upper_(i));
      if (!std::isfinite(lo) || !std::isfinite(up))
        throw InputError("bound " + std::to_string(i) + " is not finite");
      if (lo > 0.0)
        throw InputError("lower bound of element " + std::to_string(i) + " is positive (" +
                         std::to_string(lo) + ")");
      if (up < 0.0)
        throw InputError("upper bound of element " + std::to_string(i) + " is negative (" +
                         std::to_string(up) + ")");
    }
  }

  static BoundSpec unbounded(Index n) {
    return BoundSpec(Vector<Scalar>::Constant(n, Scalar(-1)), Vector<Scalar>::Constant(n, Scalar(1)));
  }
  static BoundSpec symmetric(Index n, Scalar cap) {
    return BoundSpec(Vector<Scalar>::Constant(n, -cap), Vector<Scalar>::Constant(n, cap));
  }

  const Vector<Scalar>& lower() const { return lower_; }
  const Vector<Scalar>& upper() const { return upper_; }
  Index size() const { return lower_.size(); }
  bool is_fixed(Index i) const { return lower_(i) == upper_(i); }

  BoundSpec scaled(Scalar factor) const { return BoundSpec(lower_ * factor, upper_ * factor); }

 private:
  Vector<Scalar> lower_;
  Vector<Scalar> upper_;
};

/// |w_i| <= xi everywhere.
struct UniformCap {
  double xi;
};

/// |w_i| <= xi_tilde where turnover tau_i >= tau_star, unbounded elsewhere.
struct TurnoverCap {
  double xi_tilde;
  double tau_star;
  VectorXd tau;
};

struct ExplicitBounds {
  VectorXd lower;
  VectorXd upper;
};

using BoundPolicy = std::variant<UniformCap, TurnoverCap, ExplicitBounds>;

template <typename Scalar = double>
BoundSpec<Scalar> bounds_from_policy(const BoundPolicy& policy, Index n) {
  auto check_cap = [](double cap, const char* name) {
    if (!(cap > 0.0 && cap <= 1.0))
      throw InputError(std::string(name) + " must lie in (0, 1], got " + std::to_string(cap));
  };
  return std::visit(
      [&](const auto& p) -> BoundSpec<Scalar> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, UniformCap>) {
          check_cap(p.xi, "xi");
          return BoundSpec<Scalar>::symmetric(n, Scalar(p.xi));
        } else if constexpr (std::is_same_v<P, TurnoverCap>) {
          check_cap(p.xi_tilde, "xi_tilde");
          if (p.tau.size() != n) throw InputError("turnover vector has the wrong length");
          Vector<Scalar> cap(n);
          for (Index i = 0; i < n; ++i) {
            if (!(p.tau(i) >= 0.0)) throw InputError("turnover " + std::to_string(i) + " is negative");
            cap(i) = Scalar(p.tau(i) >= p.tau_star ? p.xi_tilde : 1.0);
          }
          return BoundSpec<Scalar>(-cap, cap);
        } else {
          if (p.lower.size() != n || p.upper.size() != n)
            throw InputError("explicit bounds have the wrong length");
          return BoundSpec<Scalar>(p.lower.template cast<Scalar>(), p.upper.template cast<Scalar>());
        }
      },
      policy);
}

struct SolverConfig {
  double tol = 1e-6;   // bound-membership tolerance
  double prec = 1e-5;  // |sum |w| - 1| stopping tolerance
  int max_inner = 0;   // 0 selects 4 N
  int max_outer = 100;

  void validate() const {
    if (!(tol > 0.0) || !(prec > 0.0) || max_inner < 0 || max_outer < 1)
      throw InputError("solver config: tol, prec, max_outer must be positive and max_inner >= 0");
  }
  int inner_cap(Index n) const { return max_inner > 0 ? max_inner : static_cast<int>(4 * n); }
};

enum class Activity : std::int8_t { free, at_upper, at_lower, fixed };

template <typename Scalar>
struct SolveState {
  std::vector<Activity> activity;
  Vector<Scalar> w_hat;
  Scalar gamma = Scalar(0);
  int inner_iterations = 0;
  int outer_iterations = 0;
  int polish_steps = 0;

  std::vector<Index> collect(Activity which) const {
    std::vector<Index> out;
    for (std::size_t i = 0; i < activity.size(); ++i)
      if (activity[i] == which) out.push_back(static_cast<Index>(i));
    return out;
  }
  std::vector<Index> j_plus() const { return collect(Activity::at_upper); }
  std::vector<Index> j_minus() const { return collect(Activity::at_lower); }
  std::vector<Index> free_set() const { return collect(Activity::free); }

  SolveDiagnostics diagnostics(double last_l1 = 0.0) const {
    SolveDiagnostics d;
    for (Index i : j_plus()) d.j_plus.push_back(i);
    for (Index i : j_minus()) d.j_minus.push_back(i);
    d.w_hat.reserve(static_cast<std::size_t>(w_hat.size()));
    for (Index i = 0; i < w_hat.size(); ++i) d.w_hat.push_back(static_cast<double>(w_hat(i)));
    d.gamma = static_cast<double>(gamma);
    d.inner_iterations = inner_iterations;
    d.outer_iterations = outer_iterations;
    d.last_l1 = last_l1;
    return d;
  }
};

/// Q~ over the free set, with loadings columns that vanish on the free set
/// dropped.
template <typename Scalar>
struct RestrictedNormalMatrix {
  Matrix<Scalar> q;
  std::vector<Index> kept_columns;
  Eigen::LLT<Matrix<Scalar>> llt;

  /// Solves Q~ v = y restricted to the kept columns of a full K-vector y.
  Vector<Scalar> solve(const Vector<Scalar>& y_full) const {
    Vector<Scalar> y(static_cast<Index>(kept_columns.size()));
    for (std::size_t c = 0; c < kept_columns.size(); ++c) y(static_cast<Index>(c)) = y_full(kept_columns[c]);
    return llt.solve(y);
  }
};

template <typename Scalar>
RestrictedNormalMatrix<Scalar> restricted_normal_matrix(const LoadingsMatrix<Scalar>& loadings,
                                                        const RegressionWeights<Scalar>& z,
                                                        std::span<const Index> free_set) {
  if (free_set.empty()) throw InputError("restricted normal matrix needs a non-empty free set");
  const Matrix<Scalar>& lambda = loadings.values();
  RestrictedNormalMatrix<Scalar> out;
  for (Index a = 0; a < lambda.cols(); ++a) {
    bool nonzero = false;
    for (Index i : free_set) nonzero = nonzero || lambda(i, a) != Scalar(0);
    if (nonzero) out.kept_columns.push_back(a);
  }
  const auto k = static_cast<Index>(out.kept_columns.size());
  out.q = Matrix<Scalar>::Zero(k, k);
  for (Index i : free_set) {
    for (Index a = 0; a < k; ++a) {
      const Scalar la = z(i) * lambda(i, out.kept_columns[static_cast<std::size_t>(a)]);
      for (Index b = 0; b < k; ++b) out.q(a, b) += la * lambda(i, out.kept_columns[static_cast<std::size_t>(b)]);
    }
  }
  out.llt = detail::factorize_normal(out.q, "restricted normal matrix Q~");
  return out;
}

template <typename Scalar>
struct ClipStep {
  Vector<Scalar> point;
  Scalar t_star;
};

/// Largest step t* in [0, 1] from w_hat along x_target - w_hat that keeps
/// every element inside its bounds.
template <typename Scalar>
ClipStep<Scalar> clip_step(const Vector<Scalar>& w_hat, const Vector<Scalar>& x_target,
                           const BoundSpec<Scalar>& bounds) {
  const Vector<Scalar> q = x_target - w_hat;
  Scalar t_star = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < q.size(); ++i) {
    if (q(i) > Scalar(0)) {
      const Scalar p = std::min(x_target(i), bounds.upper()(i));
      t_star = std::min(t_star, (p - w_hat(i)) / q(i));
    } else if (q(i) < Scalar(0)) {
      const Scalar p = std::max(x_target(i), bounds.lower()(i));
      t_star = std::min(t_star, (p - w_hat(i)) / q(i));
    }
  }
  if (!std::isfinite(static_cast<double>(t_star))) return {w_hat, Scalar(1)};
  t_star = std::clamp(t_star, Scalar(0), Scalar(1));
  return {w_hat + t_star * q, t_star};
}

template <typename Scalar>
struct FixedGammaSolution {
  Vector<Scalar> w_tilde;
  SolveState<Scalar> state;
};

template <typename Scalar>
using IterateObserver = std::function<void(const SolveState<Scalar>&)>;

namespace detail {

template <typename Scalar>
void check_problem_shapes(Index n, const LoadingsMatrix<Scalar>& loadings,
                          const RegressionWeights<Scalar>& z, const BoundSpec<Scalar>& bounds) {
  if (loadings.rows() != n || z.size() != n || bounds.size() != n)
    throw InputError("inconsistent sizes: alpha " + std::to_string(n) + ", loadings " +
                     std::to_string(loadings.rows()) + ", weights " + std::to_string(z.size()) +
                     ", bounds " + std::to_string(bounds.size()));
}

/// Value pinned elements contribute to y and to the candidate.
template <typename Scalar>
Scalar pinned_value(Activity a, Index i, const BoundSpec<Scalar>& bounds) {
  return a == Activity::at_lower ? bounds.lower()(i) : bounds.upper()(i);
}

/// Regression candidate z_i (alpha~_i - sum_AB Lambda_iA Q~^-1_AB y_B) for
/// every element under the given partition. Requires a non-empty free set.
template <typename Scalar>
Vector<Scalar> partition_candidate(const Vector<Scalar>& alpha_tilde, const LoadingsMatrix<Scalar>& loadings,
                                   const RegressionWeights<Scalar>& z, const BoundSpec<Scalar>& bounds,
                                   const std::vector<Activity>& activity, std::span<const Index> free_set) {
  const Matrix<Scalar>& lambda = loadings.values();
  Vector<Scalar> y = Vector<Scalar>::Zero(lambda.cols());
  for (std::size_t i = 0; i < activity.size(); ++i) {
    const auto ii = static_cast<Index>(i);
    const Scalar c = activity[i] == Activity::free ? z(ii) * alpha_tilde(ii)
                                                   : pinned_value(activity[i], ii, bounds);
    if (c != Scalar(0)) y += c * lambda.row(ii).transpose();
  }
  auto normal = restricted_normal_matrix(loadings, z, free_set);
  const Vector<Scalar> v = normal.solve(y);
  Vector<Scalar> fit = Vector<Scalar>::Zero(lambda.rows());
  for (std::size_t c = 0; c < normal.kept_columns.size(); ++c)
    fit += v(static_cast<Index>(c)) * lambda.col(normal.kept_columns[c]);
  return z.values().cwiseProduct(alpha_tilde - fit);
}

template <typename Scalar>
std::vector<Index> free_indices(const std::vector<Activity>& activity) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < activity.size(); ++i)
    if (activity[i] == Activity::free) out.push_back(static_cast<Index>(i));
  return out;
}

} // namespace detail

/// Inner J+/J- iteration at fixed gamma (alpha_tilde = gamma alpha).
template <typename Scalar>
FixedGammaSolution<Scalar> solve_fixed_gamma(const Vector<Scalar>& alpha_tilde,
                                             const LoadingsMatrix<Scalar>& loadings,
                                             const RegressionWeights<Scalar>& z,
                                             const BoundSpec<Scalar>& bounds, const SolverConfig& config,
                                             const IterateObserver<Scalar>& observer = {}) {
  config.validate();
  const Index n = alpha_tilde.size();
  detail::check_problem_shapes(n, loadings, z, bounds);
  const Scalar tol = Scalar(config.tol);
  const int cap = config.inner_cap(n);

  SolveState<Scalar> state;
  state.activity.assign(static_cast<std::size_t>(n), Activity::free);
  for (Index i = 0; i < n; ++i)
    if (bounds.is_fixed(i)) state.activity[static_cast<std::size_t>(i)] = Activity::fixed;
  state.w_hat = Vector<Scalar>::Zero(n);
  std::vector<bool> released(static_cast<std::size_t>(n), false);

  for (int s = 1; s <= cap; ++s) {
    state.inner_iterations = s;
    const std::vector<Index> free_set = detail::free_indices<Scalar>(state.activity);
    Vector<Scalar> candidate;
    Vector<Scalar> target = state.w_hat;
    if (!free_set.empty()) {
      candidate = detail::partition_candidate(alpha_tilde, loadings, z, bounds, state.activity, free_set);
      target = candidate;
      for (Index i = 0; i < n; ++i) {
        const Activity a = state.activity[static_cast<std::size_t>(i)];
        if (a != Activity::free) target(i) = detail::pinned_value(a, i, bounds);
      }
    }

    const Vector<Scalar> q = target - state.w_hat;
    state.w_hat = clip_step(state.w_hat, target, bounds).point;

    std::vector<Activity> next = state.activity;
    for (Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (next[ui] == Activity::fixed) continue;
      const bool near_up = std::abs(state.w_hat(i) - bounds.upper()(i)) < tol;
      const bool near_lo = std::abs(state.w_hat(i) - bounds.lower()(i)) < tol;
      if (near_up && !(released[ui] && q(i) <= Scalar(0)))
        next[ui] = Activity::at_upper;
      else if (near_lo && !(released[ui] && q(i) >= Scalar(0)))
        next[ui] = Activity::at_lower;
      else
        next[ui] = Activity::free;
      released[ui] = released[ui] && (near_up || near_lo) && next[ui] == Activity::free;
    }

    if (observer) observer(state);

    if (next == state.activity) {
      if (free_set.empty()) return {state.w_hat, std::move(state)};
      // Stationarity of pinned elements; release the worst offender.
      Index worst = -1;
      Scalar worst_score = Scalar(0);
      for (Index i = 0; i < n; ++i) {
        const Activity a = state.activity[static_cast<std::size_t>(i)];
        Scalar gap = Scalar(0);
        if (a == Activity::at_upper) gap = bounds.upper()(i) - candidate(i);
        else if (a == Activity::at_lower) gap = candidate(i) - bounds.lower()(i);
        else continue;
        const Scalar slack = Scalar(1e-12) * (Scalar(1) + std::abs(detail::pinned_value(a, i, bounds)));
        if (gap > slack && gap / z(i) > worst_score) {
          worst_score = gap / z(i);
          worst = i;
        }
      }
      if (worst < 0) return {state.w_hat, std::move(state)};
      next[static_cast<std::size_t>(worst)] = Activity::free;
      released[static_cast<std::size_t>(worst)] = true;
    }
    state.activity = std::move(next);
  }
  throw NonConvergenceError("inner J+/J- iteration did not converge within " + std::to_string(cap) +
                                " iterations",
                            state.diagnostics());
}

/// Post-hoc check of the fixed-gamma optimality system at a returned state.
template <typename Scalar>
struct KktCertificate {
  Scalar free_equation_residual = 0;  // max |w_i - candidate_i| over the free set
  Scalar upper_violation = 0;         // max (w+_i - candidate_i)_+ over J+
  Scalar lower_violation = 0;         // max (candidate_i - w-_i)_+ over J-
  Scalar pinned_offset = 0;           // max |w_i - bound_i| over J+ and J-
  Scalar bound_violation = 0;         // max distance outside [w-, w+]
  Scalar neutrality_residual = 0;     // max_A |sum_i w_i Lambda_iA|

  Scalar stationarity() const {
    return std::max({free_equation_residual, upper_violation, lower_violation});
  }
};

template <typename Scalar>
KktCertificate<Scalar> kkt_certificate(const Vector<Scalar>& alpha_tilde, const LoadingsMatrix<Scalar>& loadings,
                                       const RegressionWeights<Scalar>& z, const BoundSpec<Scalar>& bounds,
                                       const std::vector<Activity>& activity, const Vector<Scalar>& w) {
  KktCertificate<Scalar> cert;
  const Index n = w.size();
  for (Index i = 0; i < n; ++i) {
    cert.bound_violation = std::max({cert.bound_violation, w(i) - bounds.upper()(i), bounds.lower()(i) - w(i)});
    const Activity a = activity[static_cast<std::size_t>(i)];
    if (a == Activity::at_upper || a == Activity::at_lower)
      cert.pinned_offset = std::max(cert.pinned_offset, std::abs(w(i) - detail::pinned_value(a, i, bounds)));
  }
  cert.neutrality_residual = (loadings.values().transpose() * w).cwiseAbs().maxCoeff();
  const auto free_set = detail::free_indices<Scalar>(activity);
  if (free_set.empty()) return cert;
  const Vector<Scalar> u = detail::partition_candidate(alpha_tilde, loadings, z, bounds, activity, free_set);
  for (Index i = 0; i < n; ++i) {
    switch (activity[static_cast<std::size_t>(i)]) {
      case Activity::free:
        cert.free_equation_residual = std::max(cert.free_equation_residual, std::abs(w(i) - u(i)));
        break;
      case Activity::at_upper:
        cert.upper_violation = std::max(cert.upper_violation, bounds.upper()(i) - u(i));
        break;
      case Activity::at_lower:
        cert.lower_violation = std::max(cert.lower_violation, u(i) - bounds.lower()(i));
        break;
      case Activity::fixed:
        break;
    }
  }
  return cert;
}

template <typename Scalar>
struct BoundedSolution {
  Vector<Scalar> weights;  // w = x + prior
  Vector<Scalar> trades;   // x, the vector the inner iteration runs on
  SolveState<Scalar> state;

  Scalar gamma() const { return state.gamma; }
};

namespace detail {

template <typename Scalar>
Scalar l1_with_prior(const Vector<Scalar>& x, const Vector<Scalar>& prior) {
  return (x + prior).cwiseAbs().sum();
}

/// d x~ / d gamma on the partition of `state`: zero on pinned elements,
/// z_i (alpha_i - Lambda_i Q~^-1 y(alpha)) on the free set.
template <typename Scalar>
Vector<Scalar> gamma_derivative(const Vector<Scalar>& alpha, const LoadingsMatrix<Scalar>& loadings,
                                const RegressionWeights<Scalar>& z, const std::vector<Activity>& activity) {
  const Index n = alpha.size();
  const auto free_set = free_indices<Scalar>(activity);
  Vector<Scalar> d = Vector<Scalar>::Zero(n);
  if (free_set.empty()) return d;
  const Matrix<Scalar>& lambda = loadings.values();
  Vector<Scalar> y = Vector<Scalar>::Zero(lambda.cols());
  for (Index i : free_set) y += z(i) * alpha(i) * lambda.row(i).transpose();
  auto normal = restricted_normal_matrix(loadings, z, free_set);
  const Vector<Scalar> v = normal.solve(y);
  for (Index i : free_set) {
    Scalar fit = 0;
    for (std::size_t c = 0; c < normal.kept_columns.size(); ++c)
      fit += lambda(i, normal.kept_columns[c]) * v(static_cast<Index>(c));
    d(i) = z(i) * (alpha(i) - fit);
  }
  return d;
}

/// d sum |w| / d gamma on the partition `activity`, evaluated at w.
template <typename Scalar>
Scalar l1_slope(const Vector<Scalar>& alpha, const LoadingsMatrix<Scalar>& loadings, const RegressionWeights<Scalar>& z,
                const std::vector<Activity>& activity, const Vector<Scalar>& w) {
  const Vector<Scalar> d = gamma_derivative(alpha, loadings, z, activity);
  Scalar slope = 0;
  for (Index i = 0; i < w.size(); ++i) {
    const Scalar sign = w(i) > 0 ? Scalar(1) : w(i) < 0 ? Scalar(-1) : (d(i) >= 0 ? Scalar(1) : Scalar(-1));
    slope += sign * d(i);
  }
  return slope;
}

template <typename Scalar>
Scalar seed_gamma(const Vector<Scalar>& alpha, const LoadingsMatrix<Scalar>& loadings,
                  const RegressionWeights<Scalar>& z, const BoundSpec<Scalar>& bounds) {
  std::vector<Activity> activity(static_cast<std::size_t>(alpha.size()), Activity::free);
  for (Index i = 0; i < alpha.size(); ++i)
    if (bounds.is_fixed(i)) activity[static_cast<std::size_t>(i)] = Activity::fixed;
  const auto free_set = free_indices<Scalar>(activity);
  if (free_set.empty()) throw InputError("every element has equal lower and upper bounds");
  // z eps on the non-fixed elements is the derivative of the unbounded
  // candidate with respect to gamma.
  const Vector<Scalar> zeps = gamma_derivative(alpha, loadings, z, activity);
  Vector<Scalar> a = Vector<Scalar>::Zero(alpha.size());
  for (Index i : free_set) a(i) = alpha(i);
  if (residuals_vanish(a, Vector<Scalar>(zeps.cwiseQuotient(z.values())), z.values()))
    throw InputError("all regression residuals vanish; no direction to allocate");
  return Scalar(1) / zeps.cwiseAbs().sum();
}

template <typename Scalar>
BoundedSolution<Scalar> gamma_loop(const Vector<Scalar>& alpha, const LoadingsMatrix<Scalar>& loadings,
                                   const RegressionWeights<Scalar>& z, const BoundSpec<Scalar>& bounds,
                                   const Vector<Scalar>& prior, const SolverConfig& config) {
  config.validate();
  check_problem_shapes(alpha.size(), loadings, z, bounds);
  const Scalar prec = Scalar(config.prec);

  Scalar gamma = seed_gamma(alpha, loadings, z, bounds);
  int total_inner = 0;
  Scalar l1 = 0;
  SolveState<Scalar> last;
  Scalar below = 0;
  Scalar above = std::numeric_limits<Scalar>::infinity();
  // A Newton jump can land where the inner iteration passes through a
  // singular partition; the plain step from the last good iterate is then
  // taken instead and Newton is not tried again.
  bool use_newton = true;
  bool jumped = false;
  Scalar fallback = gamma;
  for (int a = 1; a <= config.max_outer; ++a) {
    FixedGammaSolution<Scalar> sol;
    try {
      sol = solve_fixed_gamma<Scalar>(gamma * alpha, loadings, z, bounds, config);
    } catch (const SolverError&) {
      if (!jumped) throw;
      use_newton = jumped = false;
      gamma = fallback;
      continue;
    }
    total_inner += sol.state.inner_iterations;
    l1 = l1_with_prior(sol.w_tilde, prior);
    sol.state.gamma = gamma;
    sol.state.outer_iterations = a;
    if (!(l1 > Scalar(0)) || !std::isfinite(static_cast<double>(l1)))
      throw NonConvergenceError("fixed-gamma weights vanished", sol.state.diagnostics(static_cast<double>(l1)));
    if (std::abs(l1 - Scalar(1)) < prec) {
      // Newton polish on the converged partition.
      for (int k = 0; k < 4; ++k) {
        const Scalar f = l1 - Scalar(1);
        if (std::abs(f) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon()) break;
        const Scalar slope = l1_slope(alpha, loadings, z, sol.state.activity, Vector<Scalar>(sol.w_tilde + prior));
        if (!(slope > Scalar(0))) break;
        const Scalar next_gamma = gamma - f / slope;
        if (!(next_gamma > Scalar(0))) break;
        FixedGammaSolution<Scalar> trial;
        try {
          trial = solve_fixed_gamma<Scalar>(next_gamma * alpha, loadings, z, bounds, config);
        } catch (const SolverError&) {
          break;
        }
        const Scalar trial_l1 = l1_with_prior(trial.w_tilde, prior);
        if (!(std::abs(trial_l1 - Scalar(1)) < std::abs(f))) break;
        total_inner += trial.state.inner_iterations;
        const int polished = sol.state.polish_steps + 1;
        sol = std::move(trial);
        gamma = next_gamma;
        l1 = trial_l1;
        sol.state.gamma = gamma;
        sol.state.outer_iterations = a;
        sol.state.polish_steps = polished;
      }
      sol.state.inner_iterations = total_inner;
      Vector<Scalar> weights = sol.w_tilde + prior;
      return {std::move(weights), std::move(sol.w_tilde), std::move(sol.state)};
    }
    // gamma / sum|w| contracts at a rate equal to the pinned mass, which
    // stalls when nearly every element is pinned. A Newton step on the
    // current partition is taken instead whenever it stays inside the
    // bracket of gamma values seen on either side of the root.
    if (l1 < Scalar(1)) below = std::max(below, gamma);
    else above = std::min(above, gamma);
    fallback = gamma / l1;
    Scalar next = fallback;
    jumped = false;
    if (use_newton) {
      try {
        const Scalar slope = l1_slope(alpha, loadings, z, sol.state.activity, Vector<Scalar>(sol.w_tilde + prior));
        if (slope > Scalar(0)) {
          const Scalar newton = gamma - (l1 - Scalar(1)) / slope;
          if (newton > below && newton < above) next = newton;
        }
      } catch (const SolverError&) {
      }
      if (!(next > below && next < above) && std::isfinite(static_cast<double>(above))) next = (below + above) / 2;
      jumped = next != fallback;
    }
    last = std::move(sol.state);
    gamma = next;
  }
  last.inner_iterations = total_inner;
  throw InfeasibleError("normalization infeasible under bounds: sum |w| = " + std::to_string(static_cast<double>(l1)) +
                            " after " + std::to_string(config.max_outer) + " gamma iterations",
                        last.diagnostics(static_cast<double>(l1)));
}

} // namespace detail

/// Bounded, factor-neutral, L1-normalized regression weights.
template <typename Derived, typename Scalar = typename Derived::Scalar>
BoundedSolution<Scalar> bounded_regression(const Eigen::MatrixBase<Derived>& alpha,
                                           const LoadingsMatrix<Scalar>& loadings,
                                           const RegressionWeights<Scalar>& z, const BoundSpec<Scalar>& bounds,
                                           const SolverConfig& config = {}) {
  const Vector<Scalar> a = alpha;
  return detail::gamma_loop(a, loadings, z, bounds, Vector<Scalar>(Vector<Scalar>::Zero(a.size())), config);
}

/// Rebalancing from neutral prior weights w* (= H*/I). The inner iteration
/// runs on trades x = w - w* with `trade_bounds`; the gamma iteration
/// normalizes sum |x + w*|.
template <typename Derived, typename PriorDerived, typename Scalar = typename Derived::Scalar>
BoundedSolution<Scalar> bounded_regression_rebalance(const Eigen::MatrixBase<Derived>& expected_returns,
                                                     const LoadingsMatrix<Scalar>& loadings,
                                                     const RegressionWeights<Scalar>& z,
                                                     const BoundSpec<Scalar>& trade_bounds,
                                                     const Eigen::MatrixBase<PriorDerived>& prior_weights,
                                                     const SolverConfig& config = {}) {
  const Vector<Scalar> e = expected_returns;
  const Vector<Scalar> prior = prior_weights;
  if (prior.size() != e.size()) throw InputError("prior weights have the wrong length");
  const Matrix<Scalar>& lambda = loadings.values();
  if (lambda.rows() != e.size()) throw InputError("loadings have the wrong number of rows");
  for (Index a = 0; a < lambda.cols(); ++a) {
    const Scalar exposure = lambda.col(a).dot(prior);
    const Scalar scale = std::max(Scalar(1), lambda.col(a).cwiseProduct(prior).cwiseAbs().sum());
    if (std::abs(exposure) > Scalar(1e-8) * scale)
      throw InputError("prior holdings are not neutral to factor " + std::to_string(a) + " (exposure " +
                       std::to_string(static_cast<double>(exposure)) + ")");
  }
  return detail::gamma_loop(e, loadings, z, trade_bounds, prior, config);
}

} // namespace boundreg
