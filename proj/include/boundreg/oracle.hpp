#pragma once

// Brute-force reference for the bounded regression. Enumerates all 3^N
// activity patterns of the fixed-gamma problem
//
//   minimize sum_i (w_i - z_i alpha~_i)^2 / z_i
//   subject to sum_i w_i Lambda_iA = 0, lower <= w <= upper,
//
// solves each pattern's equality-constrained system directly and keeps
// the feasible pattern with the lowest objective. Intended for tests and
// the `verify` command only; N is capped at 12.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "boundreg/bounded_regression.hpp"
#include "boundreg/errors.hpp"
#include "boundreg/loadings.hpp"
#include "boundreg/types.hpp"
#include "boundreg/weighted_regression.hpp"

namespace boundreg::oracle {

inline constexpr Index kMaxOracleSize = 12;

template <typename Scalar>
struct OracleSolution {
  Vector<Scalar> weights;
  std::vector<Activity> active_pattern;
  bool kkt_ok = false;
  bool tie = false;  // another pattern reached the same objective
  Scalar objective = 0;
  std::int64_t feasible_patterns = 0;
  Scalar gamma = 0;
  int gamma_iterations = 0;
};

namespace detail {

template <typename Scalar>
struct PatternResult {
  bool feasible = false;
  bool kkt_ok = false;
  Vector<Scalar> w;
  Scalar objective = 0;
};

// pattern digit: 0 free, 1 at upper, 2 at lower
template <typename Scalar>
PatternResult<Scalar> evaluate_pattern(const std::vector<int>& digits, const Vector<Scalar>& alpha_tilde,
                                       const Matrix<Scalar>& lambda, const Vector<Scalar>& z,
                                       const Vector<Scalar>& lower, const Vector<Scalar>& upper) {
  const Index n = alpha_tilde.size();
  const Index k = lambda.cols();
  PatternResult<Scalar> r;
  r.w = Vector<Scalar>::Zero(n);
  const Scalar eps = Scalar(1e-12);

  Vector<Scalar> pinned_sum = Vector<Scalar>::Zero(k);
  std::vector<Index> free_set;
  for (Index i = 0; i < n; ++i) {
    const int d = digits[static_cast<std::size_t>(i)];
    if (d == 0) {
      free_set.push_back(i);
    } else {
      r.w(i) = d == 1 ? upper(i) : lower(i);
      pinned_sum += r.w(i) * lambda.row(i).transpose();
    }
  }

  Vector<Scalar> stationary = z.cwiseProduct(alpha_tilde);
  if (free_set.empty()) {
    if (pinned_sum.cwiseAbs().maxCoeff() > eps) return r;
  } else {
    // Columns that vanish on the free set constrain the pinned elements only.
    std::vector<Index> live;
    for (Index a = 0; a < k; ++a) {
      bool nonzero = false;
      for (Index i : free_set) nonzero = nonzero || lambda(i, a) != Scalar(0);
      if (nonzero) live.push_back(a);
      else if (std::abs(pinned_sum(a)) > eps) return r;
    }
    const auto m = static_cast<Index>(free_set.size());
    const auto kl = static_cast<Index>(live.size());
    // Free weights w_F = z_F (alpha~_F - Lambda_F mu); neutrality
    // Lambda_F^T w_F = -pinned_sum determines mu.
    Matrix<Scalar> lf(m, kl);
    Vector<Scalar> zf(m), af(m);
    for (Index r_ = 0; r_ < m; ++r_) {
      const Index i = free_set[static_cast<std::size_t>(r_)];
      zf(r_) = z(i);
      af(r_) = alpha_tilde(i);
      for (Index c = 0; c < kl; ++c) lf(r_, c) = lambda(i, live[static_cast<std::size_t>(c)]);
    }
    Vector<Scalar> rhs(kl);
    for (Index c = 0; c < kl; ++c) rhs(c) = pinned_sum(live[static_cast<std::size_t>(c)]);
    rhs += lf.transpose() * zf.cwiseProduct(af);
    const Matrix<Scalar> normal = lf.transpose() * zf.asDiagonal() * lf;
    Eigen::FullPivLU<Matrix<Scalar>> lu(normal);
    lu.setThreshold(Scalar(1e-11));
    if (!lu.isInvertible()) return r;
    const Vector<Scalar> mu = lu.solve(rhs);
    Vector<Scalar> fit = Vector<Scalar>::Zero(n);
    for (Index c = 0; c < kl; ++c) fit += mu(c) * lambda.col(live[static_cast<std::size_t>(c)]);
    stationary = z.cwiseProduct(alpha_tilde - fit);
    for (Index i : free_set) {
      r.w(i) = stationary(i);
      const Scalar slack = eps * (Scalar(1) + std::abs(r.w(i)));
      if (r.w(i) > upper(i) + slack || r.w(i) < lower(i) - slack) return r;
    }
  }
  r.feasible = true;
  r.objective = (r.w - z.cwiseProduct(alpha_tilde)).cwiseAbs2().cwiseQuotient(z).sum();
  r.kkt_ok = !free_set.empty();
  if (r.kkt_ok) {
    for (Index i = 0; i < n; ++i) {
      const int d = digits[static_cast<std::size_t>(i)];
      const Scalar slack = eps * (Scalar(1) + std::abs(r.w(i)));
      if (d == 1 && lower(i) != upper(i) && stationary(i) < upper(i) - slack) r.kkt_ok = false;
      if (d == 2 && lower(i) != upper(i) && stationary(i) > lower(i) + slack) r.kkt_ok = false;
    }
  }
  return r;
}

inline Activity to_activity(int digit, bool fixed) {
  if (fixed) return Activity::fixed;
  return digit == 0 ? Activity::free : digit == 1 ? Activity::at_upper : Activity::at_lower;
}

} // namespace detail

/// Exhaustive fixed-gamma solve. Returns the KKT-consistent feasible
/// pattern with the lowest objective; ties keep the lexicographically first
/// pattern and set `tie`.
template <typename Scalar>
OracleSolution<Scalar> oracle_fixed_gamma(const Vector<Scalar>& alpha_tilde, const LoadingsMatrix<Scalar>& loadings,
                                          const RegressionWeights<Scalar>& z, const BoundSpec<Scalar>& bounds) {
  const Index n = alpha_tilde.size();
  if (n > kMaxOracleSize) throw InputError("oracle enumeration is limited to N <= 12");
  if (loadings.rows() != n || z.size() != n || bounds.size() != n)
    throw InputError("oracle: inconsistent problem sizes");

  std::vector<int> digits(static_cast<std::size_t>(n), 0);
  std::vector<bool> fixed(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) fixed[static_cast<std::size_t>(i)] = bounds.is_fixed(i);

  OracleSolution<Scalar> best;
  bool have = false;
  bool have_kkt = false;
  const Scalar tie_eps = Scalar(1e-14);
  while (true) {
    bool skip = false;
    for (Index i = 0; i < n; ++i)
      if (fixed[static_cast<std::size_t>(i)] && digits[static_cast<std::size_t>(i)] != 1) skip = true;
    if (!skip) {
      auto r = detail::evaluate_pattern(digits, alpha_tilde, loadings.values(), z.values(), bounds.lower(),
                                        bounds.upper());
      if (r.feasible) {
        ++best.feasible_patterns;
        // KKT-consistent patterns take precedence; among equals, lowest objective.
        const bool better = !have || (r.kkt_ok && !have_kkt) ||
                            (r.kkt_ok == have_kkt && r.objective < best.objective - tie_eps);
        if (have && r.kkt_ok == have_kkt && std::abs(r.objective - best.objective) <= tie_eps &&
            (r.w - best.weights).cwiseAbs().maxCoeff() > Scalar(1e-9))
          best.tie = true;
        if (better) {
          const auto count = best.feasible_patterns;
          best.weights = r.w;
          best.objective = r.objective;
          best.kkt_ok = r.kkt_ok;
          best.tie = false;
          best.active_pattern.resize(static_cast<std::size_t>(n));
          for (Index i = 0; i < n; ++i)
            best.active_pattern[static_cast<std::size_t>(i)] =
                detail::to_activity(digits[static_cast<std::size_t>(i)], fixed[static_cast<std::size_t>(i)]);
          best.feasible_patterns = count;
          have = true;
          have_kkt = r.kkt_ok;
        }
      }
    }
    // next pattern, last element fastest
    Index pos = n - 1;
    while (pos >= 0 && digits[static_cast<std::size_t>(pos)] == 2) digits[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
    ++digits[static_cast<std::size_t>(pos)];
  }
  if (!have) throw InfeasibleError("oracle: no feasible activity pattern", SolveDiagnostics{});
  return best;
}

/// Oracle version of the full problem. Sum |w(gamma)| is continuous in
/// gamma, so the normalization root is bracketed by doubling/halving from
/// the unbounded seed and then refined with the Illinois variant of
/// regula falsi, each evaluation solved by enumeration.
template <typename Derived, typename Scalar = typename Derived::Scalar>
OracleSolution<Scalar> oracle_bounded_regression(const Eigen::MatrixBase<Derived>& alpha_in,
                                                 const LoadingsMatrix<Scalar>& loadings,
                                                 const RegressionWeights<Scalar>& z, const BoundSpec<Scalar>& bounds,
                                                 int max_iterations = 200, Scalar precision = Scalar(1e-12)) {
  const Vector<Scalar> alpha = alpha_in;
  const Index n = alpha.size();
  if (n > kMaxOracleSize) throw InputError("oracle enumeration is limited to N <= 12");

  Vector<Scalar> free_alpha = alpha;
  for (Index i = 0; i < n; ++i)
    if (bounds.is_fixed(i)) free_alpha(i) = 0;
  const Scalar seed = gamma_seed(weighted_residuals(free_alpha, loadings, z), z);

  int evaluations = 0;
  auto evaluate = [&](Scalar gamma) {
    auto sol = oracle_fixed_gamma<Scalar>(gamma * alpha, loadings, z, bounds);
    sol.gamma = gamma;
    sol.gamma_iterations = ++evaluations;
    return sol;
  };
  auto excess = [](const OracleSolution<Scalar>& s) { return s.weights.cwiseAbs().sum() - Scalar(1); };
  auto fail = [&](const OracleSolution<Scalar>& s, const std::string& why) {
    SolveDiagnostics diag;
    diag.gamma = static_cast<double>(s.gamma);
    diag.last_l1 = static_cast<double>(s.weights.cwiseAbs().sum());
    diag.outer_iterations = evaluations;
    return InfeasibleError("oracle: " + why + " (sum |w| = " + std::to_string(diag.last_l1) + ")", diag);
  };

  auto lo = evaluate(seed);
  Scalar f_lo = excess(lo);
  if (std::abs(f_lo) < precision) return lo;
  auto hi = lo;
  Scalar f_hi = f_lo;
  // Bracket the root.
  while (f_lo > 0 || f_hi < 0) {
    if (evaluations >= max_iterations) throw fail(f_hi < 0 ? hi : lo, "normalization not bracketed");
    if (f_hi < 0) {
      hi = evaluate(hi.gamma * Scalar(2));
      f_hi = excess(hi);
      if (std::abs(f_hi) < precision) return hi;
      if (f_hi < 0) { lo = hi; f_lo = f_hi; }
    } else {
      lo = evaluate(lo.gamma / Scalar(2));
      f_lo = excess(lo);
      if (std::abs(f_lo) < precision) return lo;
      if (f_lo > 0) { hi = lo; f_hi = f_lo; }
    }
  }
  int side = 0;
  while (evaluations < max_iterations) {
    const Scalar gamma = (lo.gamma * f_hi - hi.gamma * f_lo) / (f_hi - f_lo);
    auto mid = evaluate(gamma);
    const Scalar f_mid = excess(mid);
    if (std::abs(f_mid) < precision) return mid;
    if (f_mid < 0) {
      lo = std::move(mid);
      f_lo = f_mid;
      if (side == -1) f_hi /= Scalar(2);
      side = -1;
    } else {
      hi = std::move(mid);
      f_hi = f_mid;
      if (side == 1) f_lo /= Scalar(2);
      side = 1;
    }
    // A bracket that collapses without a root means sum |w| jumps across 1.
    if (hi.gamma - lo.gamma <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() * hi.gamma) break;
  }
  throw fail(std::abs(f_lo) < std::abs(f_hi) ? lo : hi, "normalization root not reached");
}

} // namespace boundreg::oracle
