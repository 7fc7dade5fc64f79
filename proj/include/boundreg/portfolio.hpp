#pragma once

#include "boundreg/bounded_regression.hpp"
#include "boundreg/io.hpp"
#include "boundreg/types.hpp"

namespace boundreg {

/// Dollar holdings H and the investment level I = sum |H_i| (long plus short).
struct HoldingsVector {
  VectorXd dollars;
  double investment_level = 0.0;
};

/// Traded dollars D = H - H*.
struct TradeVector {
  VectorXd dollars;
  VectorXd prior;
};

/// Position caps as fractions: xi of I (diversification), xi_tilde of ADDV
/// per trade, xi_prime of ADDV per position.
struct PositionLimits {
  double xi = 1.0;
  double xi_tilde = 1.0;
  double xi_prime = 1.0;

  void validate() const;
};

/// H+-_i = +-min(xi I, xi_tilde V_i), in dollars. Divide by I (see
/// BoundSpec::scaled) for weight bounds. V_i = 0 yields a fixed zero element.
BoundSpec<double> establishing_bounds(const PositionLimits& limits, double investment_level, const VectorXd& addv);

/// D+ = min(min(xi I, xi' V) - H*, xi_tilde V), D- = max(-min(xi I, xi' V) - H*, -xi_tilde V).
/// Requires |H*_i| <= min(xi I, xi' V_i).
BoundSpec<double> rebalancing_bounds(const PositionLimits& limits, double investment_level, const VectorXd& addv,
                                     const VectorXd& prior);

/// Tightens dollar bounds with per-instrument overrides (e.g. lower = 0 for
/// hard-to-borrow names). Overrides never loosen a bound.
BoundSpec<double> apply_overrides(const BoundSpec<double>& bounds, const io::BoundOverrides& overrides);

/// H = I w. Requires |sum |w| - 1| < prec.
HoldingsVector weights_to_holdings(const VectorXd& w, double investment_level, double prec = 1e-5);

TradeVector holdings_to_trade(const HoldingsVector& target, const VectorXd& prior);

} // namespace boundreg
