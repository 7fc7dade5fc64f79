#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "boundreg/bounded_regression.hpp"
#include "boundreg/io.hpp"
#include "boundreg/panel.hpp"
#include "boundreg/portfolio.hpp"
#include "boundreg/types.hpp"

namespace boundreg {

enum class BoundMode { none, addv_fraction };
enum class LoadingsIncarnation { intercept, classification, classification_plus_styles };

struct BacktestConfig {
  int universe_size = 2000;
  int window = 21;          // ADDV and variance window, trading days
  int refresh_period = 21;  // universe / variance refresh cadence
  double investment_level = 2e7;  // long plus short
  BoundMode bound_mode = BoundMode::none;
  double addv_fraction = 0.01;  // |H_i| <= addv_fraction V_i in addv_fraction mode
  double xi = 1.0;              // |H_i| <= xi I; 1 disables the cap
  LoadingsIncarnation loadings = LoadingsIncarnation::intercept;
  bool keep_weights = false;
  SolverConfig solver;

  void validate() const;
};

/// Reads universe_size, window, refresh_period, investment_level,
/// bound_mode, addv_fraction, xi, loadings_incarnation and the solver keys.
/// Unknown keys are rejected.
BacktestConfig backtest_config_from(const io::KeyValues& kv);

struct DailyRecord {
  std::string date;
  double pnl = 0.0;
  double gross_investment = 0.0;
  double net_investment = 0.0;
  double shares_traded = 0.0;
  double herfindahl = 0.0;       // sum w_i^2
  double max_addv_ratio = 0.0;   // max |H_i| / V_i
  bool bounds_bind = false;
  bool skipped = false;          // solver failure; excluded from statistics
  std::string note;
};

struct BacktestSummary {
  double mean_pnl = 0.0;
  double stdev_pnl = 0.0;
  double total_pnl = 0.0;
  double total_shares = 0.0;
  double roc = 0.0;               // 252 mean / I
  std::optional<double> sr;       // sqrt(252) mean / stdev; empty when stdev = 0
  double cps = 0.0;               // cents per share, 100 total_pnl / total_shares
  int trading_days = 0;
  int skipped_days = 0;
};

/// ROC / SR / CPS over the non-skipped days.
BacktestSummary summarize(const std::vector<DailyRecord>& days, double investment_level);

struct BacktestReport {
  std::vector<DailyRecord> days;  // chronological
  BacktestSummary summary;
  double investment_level = 0.0;
  std::vector<std::string> ids;
  MatrixXd daily_weights;  // days x N, only with keep_weights
};

/// E_i = -ln(open_i / close_prev_adj_i).
VectorXd mean_reversion_returns(const VectorXd& open_today, const VectorXd& close_prev_adj);

/// Q_i = 2 |H_i| / open_i (establishing plus liquidating).
VectorXd shares_traded(const HoldingsVector& holdings, const VectorXd& open);

/// Intraday open-to-close backtest. Labels and styles are indexed like
/// prices.ids() and are required by the incarnations that use them.
BacktestReport run_backtest(const BacktestConfig& config, const PricePanel& prices,
                            const std::vector<std::string>* classification = nullptr,
                            const MatrixXd* styles = nullptr);

/// `date,pnl,gross_investment,shares_traded` rows, a blank line, then
/// `roc,sr,cps` and one value row (sr = NA when undefined).
void write_report(const BacktestReport& report, std::ostream& out);
void write_cumulative_pnl(const BacktestReport& report, std::ostream& out);
void write_daily_weights(const BacktestReport& report, std::ostream& out);

} // namespace boundreg
