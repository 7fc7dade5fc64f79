#include "boundreg/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boundreg/errors.hpp"

namespace boundreg {

void PositionLimits::validate() const {
  for (double v : {xi, xi_tilde, xi_prime})
    if (!(v > 0.0 && v <= 1.0)) throw InputError("position limits must lie in (0, 1]");
}

namespace {

void check_level_and_addv(double investment_level, const VectorXd& addv) {
  if (!(investment_level > 0.0) || !std::isfinite(investment_level))
    throw InputError("investment level must be positive");
  for (Index i = 0; i < addv.size(); ++i)
    if (!(addv(i) >= 0.0) || !std::isfinite(addv(i))) throw InputError("ADDV must be non-negative");
}

} // namespace

BoundSpec<double> establishing_bounds(const PositionLimits& limits, double investment_level, const VectorXd& addv) {
  limits.validate();
  check_level_and_addv(investment_level, addv);
  const VectorXd cap = (limits.xi_tilde * addv).cwiseMin(limits.xi * investment_level);
  return BoundSpec<double>(-cap, cap);
}

BoundSpec<double> rebalancing_bounds(const PositionLimits& limits, double investment_level, const VectorXd& addv,
                                     const VectorXd& prior) {
  limits.validate();
  check_level_and_addv(investment_level, addv);
  if (prior.size() != addv.size()) throw InputError("prior holdings and ADDV differ in length");
  const VectorXd position_cap = (limits.xi_prime * addv).cwiseMin(limits.xi * investment_level);
  const VectorXd trade_cap = limits.xi_tilde * addv;
  std::string violators;
  for (Index i = 0; i < prior.size(); ++i) {
    if (std::abs(prior(i)) > position_cap(i) * (1.0 + 1e-12)) {
      if (!violators.empty()) violators += ", ";
      violators += std::to_string(i);
    }
  }
  if (!violators.empty())
    throw InputError("prior holdings exceed min(xi I, xi' V) for instruments " + violators);
  // The precondition guarantees upper >= 0 >= lower up to rounding.
  const VectorXd upper = (position_cap - prior).cwiseMin(trade_cap).cwiseMax(0.0);
  const VectorXd lower = (-position_cap - prior).cwiseMax(-trade_cap).cwiseMin(0.0);
  return BoundSpec<double>(lower, upper);
}

BoundSpec<double> apply_overrides(const BoundSpec<double>& bounds, const io::BoundOverrides& overrides) {
  const auto n = static_cast<std::size_t>(bounds.size());
  if (overrides.lower.size() != n || overrides.upper.size() != n)
    throw InputError("overrides do not match the bounds length");
  VectorXd lower = bounds.lower();
  VectorXd upper = bounds.upper();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Index>(i);
    if (overrides.lower[i]) {
      if (*overrides.lower[i] > 0.0) throw InputError("lower override for element " + std::to_string(i) + " is positive");
      lower(ii) = std::max(lower(ii), *overrides.lower[i]);
    }
    if (overrides.upper[i]) {
      if (*overrides.upper[i] < 0.0) throw InputError("upper override for element " + std::to_string(i) + " is negative");
      upper(ii) = std::min(upper(ii), *overrides.upper[i]);
    }
  }
  return BoundSpec<double>(std::move(lower), std::move(upper));
}

HoldingsVector weights_to_holdings(const VectorXd& w, double investment_level, double prec) {
  if (!(investment_level > 0.0)) throw InputError("investment level must be positive");
  const double l1 = w.cwiseAbs().sum();
  if (!(std::abs(l1 - 1.0) < prec))
    throw InputError("weights are not L1-normalized (sum |w| = " + std::to_string(l1) + ")");
  return {investment_level * w, investment_level};
}

TradeVector holdings_to_trade(const HoldingsVector& target, const VectorXd& prior) {
  if (prior.size() != target.dollars.size()) throw InputError("prior holdings have the wrong length");
  return {target.dollars - prior, prior};
}

} // namespace boundreg
