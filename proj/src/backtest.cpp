#include "boundreg/backtest.hpp"

#include <cmath>
#include <ostream>
#include <set>

#include "boundreg/csv.hpp"
#include "boundreg/errors.hpp"
#include "boundreg/loadings.hpp"
#include "boundreg/weighted_regression.hpp"

namespace boundreg {

void BacktestConfig::validate() const {
  if (universe_size < 1 || window < 2 || refresh_period < 1)
    throw InputError("backtest config: universe_size >= 1, window >= 2 and refresh_period >= 1 required");
  if (!(investment_level > 0.0)) throw InputError("backtest config: investment_level must be positive");
  if (!(addv_fraction > 0.0 && addv_fraction <= 1.0))
    throw InputError("backtest config: addv_fraction must lie in (0, 1]");
  if (!(xi > 0.0 && xi <= 1.0)) throw InputError("backtest config: xi must lie in (0, 1]");
  solver.validate();
}

BacktestConfig backtest_config_from(const io::KeyValues& kv) {
  BacktestConfig c;
  std::vector<std::string> known;
  io::apply_solver_config(kv, c.solver, &known);
  c.universe_size = io::kv_int(kv, "universe_size", c.universe_size);
  c.window = io::kv_int(kv, "window", c.window);
  c.refresh_period = io::kv_int(kv, "refresh_period", c.refresh_period);
  c.investment_level = io::kv_double(kv, "investment_level", c.investment_level);
  c.addv_fraction = io::kv_double(kv, "addv_fraction", c.addv_fraction);
  c.xi = io::kv_double(kv, "xi", c.xi);
  known.insert(known.end(), {"universe_size", "window", "refresh_period", "investment_level", "addv_fraction", "xi",
                             "bound_mode", "loadings_incarnation", "keep_weights"});
  if (auto it = kv.find("bound_mode"); it != kv.end()) {
    if (it->second == "none") c.bound_mode = BoundMode::none;
    else if (it->second == "addv_fraction") c.bound_mode = BoundMode::addv_fraction;
    else throw InputError("bound_mode must be 'none' or 'addv_fraction'");
  }
  if (auto it = kv.find("loadings_incarnation"); it != kv.end()) {
    if (it->second == "intercept") c.loadings = LoadingsIncarnation::intercept;
    else if (it->second == "classification") c.loadings = LoadingsIncarnation::classification;
    else if (it->second == "classification_plus_styles") c.loadings = LoadingsIncarnation::classification_plus_styles;
    else throw InputError("loadings_incarnation must be intercept, classification or classification_plus_styles");
  }
  if (auto it = kv.find("keep_weights"); it != kv.end()) c.keep_weights = it->second == "true" || it->second == "1";
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : kv)
    if (!allowed.count(key)) throw InputError("unknown config key '" + key + "'");
  c.validate();
  return c;
}

BacktestSummary summarize(const std::vector<DailyRecord>& days, double investment_level) {
  BacktestSummary s;
  for (const auto& d : days) {
    if (d.skipped) {
      ++s.skipped_days;
      continue;
    }
    ++s.trading_days;
    s.total_pnl += d.pnl;
    s.total_shares += d.shares_traded;
  }
  if (s.trading_days == 0) return s;
  s.mean_pnl = s.total_pnl / s.trading_days;
  if (s.trading_days > 1) {
    double ss = 0.0;
    for (const auto& d : days)
      if (!d.skipped) ss += (d.pnl - s.mean_pnl) * (d.pnl - s.mean_pnl);
    s.stdev_pnl = std::sqrt(ss / (s.trading_days - 1));
  }
  s.roc = 252.0 * s.mean_pnl / investment_level;
  if (s.stdev_pnl > 0.0) s.sr = std::sqrt(252.0) * s.mean_pnl / s.stdev_pnl;
  s.cps = s.total_shares > 0.0 ? 100.0 * s.total_pnl / s.total_shares : 0.0;
  return s;
}

VectorXd mean_reversion_returns(const VectorXd& open_today, const VectorXd& close_prev_adj) {
  if (open_today.size() != close_prev_adj.size()) throw InputError("open and previous close differ in length");
  for (Index i = 0; i < open_today.size(); ++i)
    if (!(open_today(i) > 0.0) || !(close_prev_adj(i) > 0.0))
      throw InputError("non-positive price for element " + std::to_string(i));
  return -(open_today.array() / close_prev_adj.array()).log().matrix();
}

VectorXd shares_traded(const HoldingsVector& holdings, const VectorXd& open) {
  if (open.size() != holdings.dollars.size()) throw InputError("holdings and open prices differ in length");
  for (Index i = 0; i < open.size(); ++i)
    if (!(open(i) > 0.0)) throw InputError("non-positive open price for element " + std::to_string(i));
  return 2.0 * holdings.dollars.cwiseAbs().cwiseQuotient(open);
}

namespace {

/// Universe, regression weights and loadings fixed for one refresh period.
struct Period {
  std::vector<Index> members;
  VectorXd addv;  // over members
  std::optional<RegressionWeights<double>> z;
  std::optional<LoadingsMatrix<double>> loadings;
  std::string note;
};

Period build_period(const BacktestConfig& config, const PricePanel& prices, Index column,
                    const std::vector<std::string>* classification, const MatrixXd* styles) {
  Period p;
  const VectorXd addv = compute_addv(prices, config.window, column);
  const auto universe = select_universe(addv, config.universe_size, config.refresh_period);

  // Intraday log returns over the same window.
  const auto first = column + 1;
  std::vector<Index> members;
  std::vector<double> variances;
  for (Index i : universe.member_indices) {
    const VectorXd r = (prices.close_adj().row(i).segment(first, config.window).array() /
                        prices.open().row(i).segment(first, config.window).array())
                           .log()
                           .matrix()
                           .transpose();
    const double mean = r.mean();
    const double var = (r.array() - mean).square().sum() / static_cast<double>(config.window - 1);
    if (var > 0.0 && std::isfinite(var)) {
      members.push_back(i);
      variances.push_back(var);
    }
  }
  if (members.size() < universe.member_indices.size())
    p.note = std::to_string(universe.member_indices.size() - members.size()) + " zero-variance instruments dropped";
  if (members.size() < 2) return p;

  const auto m = static_cast<Index>(members.size());
  p.members = members;
  p.addv.resize(m);
  VectorXd z(m);
  for (Index k = 0; k < m; ++k) {
    p.addv(k) = addv(members[static_cast<std::size_t>(k)]);
    z(k) = 1.0 / variances[static_cast<std::size_t>(k)];
  }
  p.z.emplace(std::move(z));

  switch (config.loadings) {
    case LoadingsIncarnation::intercept:
      p.loadings.emplace(intercept_loadings<double>(m));
      break;
    case LoadingsIncarnation::classification:
    case LoadingsIncarnation::classification_plus_styles: {
      if (!classification) throw InputError("classification incarnation requires classification labels");
      std::vector<std::string> labels;
      for (Index i : members) labels.push_back((*classification)[static_cast<std::size_t>(i)]);
      auto base = classification_loadings<double>(labels);
      if (config.loadings == LoadingsIncarnation::classification) {
        p.loadings.emplace(std::move(base));
        break;
      }
      if (!styles) throw InputError("classification_plus_styles incarnation requires style columns");
      std::vector<Index> live;
      for (Index s = 0; s < styles->cols(); ++s) {
        bool nonzero = false;
        for (Index i : members) nonzero = nonzero || (*styles)(i, s) != 0.0;
        if (nonzero) live.push_back(s);
      }
      if (live.empty()) {
        p.loadings.emplace(std::move(base));
        break;
      }
      MatrixXd block(m, static_cast<Index>(live.size()));
      for (Index k = 0; k < m; ++k)
        for (std::size_t s = 0; s < live.size(); ++s)
          block(k, static_cast<Index>(s)) = (*styles)(members[static_cast<std::size_t>(k)], live[s]);
      p.loadings.emplace(augment_style_columns(base, block));
      break;
    }
  }
  return p;
}

} // namespace

BacktestReport run_backtest(const BacktestConfig& config, const PricePanel& prices,
                            const std::vector<std::string>* classification, const MatrixXd* styles) {
  config.validate();
  const Index n = prices.instruments();
  const Index days = prices.days();
  if (classification && static_cast<Index>(classification->size()) != n)
    throw InputError("classification labels do not match the instruments");
  if (styles && styles->rows() != n) throw InputError("style matrix does not match the instruments");
  const Index first_day = config.window;  // chronological index of the first trading day
  if (days <= first_day)
    throw InputError("need more than " + std::to_string(config.window) + " days of history, have " +
                     std::to_string(days));

  BacktestReport report;
  report.investment_level = config.investment_level;
  report.ids = prices.ids();
  if (config.keep_weights) report.daily_weights = MatrixXd::Zero(days - first_day, n);
  const double level = config.investment_level;

  Period period;
  for (Index t = first_day; t < days; ++t) {
    const Index col = days - 1 - t;  // newest-first storage
    if ((t - first_day) % config.refresh_period == 0)
      period = build_period(config, prices, col, classification, styles);

    DailyRecord rec;
    rec.date = prices.dates()[static_cast<std::size_t>(col)];
    rec.note = period.note;
    const auto m = static_cast<Index>(period.members.size());
    if (m < 2 || !period.z || !period.loadings) {
      report.days.push_back(std::move(rec));
      continue;
    }
    VectorXd open(m), close(m), prev_close(m);
    for (Index k = 0; k < m; ++k) {
      const Index i = period.members[static_cast<std::size_t>(k)];
      open(k) = prices.open()(i, col);
      close(k) = prices.close_adj()(i, col);
      prev_close(k) = prices.close_adj()(i, col + 1);
    }
    const VectorXd expected = mean_reversion_returns(open, prev_close);
    const auto& z = *period.z;
    const auto& loadings = *period.loadings;

    VectorXd w;
    std::optional<BoundSpec<double>> weight_bounds;
    try {
      const auto reg = weighted_residuals(expected, loadings, z);
      if (detail::residuals_vanish(expected, reg.residuals, z.values())) {
        rec.note = "no signal; flat";
        report.days.push_back(std::move(rec));
        continue;
      }
      if (config.bound_mode == BoundMode::none) {
        w = unbounded_weights(expected, loadings, z);
      } else {
        const PositionLimits limits{config.xi, config.addv_fraction, 1.0};
        weight_bounds = establishing_bounds(limits, level, period.addv).scaled(1.0 / level);
        w = bounded_regression(expected, loadings, z, *weight_bounds, config.solver).weights;
      }
    } catch (const SolverError& e) {
      rec.skipped = true;
      rec.note = e.what();
      report.days.push_back(std::move(rec));
      continue;
    }

    const HoldingsVector holdings{level * w, level};
    rec.pnl = holdings.dollars.dot((close.array() / open.array() - 1.0).matrix());
    rec.gross_investment = holdings.dollars.cwiseAbs().sum();
    rec.net_investment = holdings.dollars.sum();
    rec.shares_traded = shares_traded(holdings, open).sum();
    rec.herfindahl = w.squaredNorm();
    for (Index k = 0; k < m; ++k) {
      if (period.addv(k) > 0.0)
        rec.max_addv_ratio = std::max(rec.max_addv_ratio, std::abs(holdings.dollars(k)) / period.addv(k));
      if (weight_bounds) {
        const double tol = config.solver.tol;
        if (w(k) >= weight_bounds->upper()(k) - tol || w(k) <= weight_bounds->lower()(k) + tol) rec.bounds_bind = true;
      }
    }
    if (config.keep_weights)
      for (Index k = 0; k < m; ++k) report.daily_weights(t - first_day, period.members[static_cast<std::size_t>(k)]) = w(k);
    report.days.push_back(std::move(rec));
  }
  report.summary = summarize(report.days, level);
  return report;
}

void write_report(const BacktestReport& report, std::ostream& out) {
  out << "date,pnl,gross_investment,shares_traded\n";
  for (const auto& d : report.days) {
    if (d.skipped) continue;
    out << d.date << ',' << csv::format_double(d.pnl) << ',' << csv::format_double(d.gross_investment) << ','
        << csv::format_double(d.shares_traded) << '\n';
  }
  const auto& s = report.summary;
  out << "\nroc,sr,cps\n"
      << csv::format_double(s.roc) << ',' << (s.sr ? csv::format_double(*s.sr) : std::string("NA")) << ','
      << csv::format_double(s.cps) << '\n';
  for (const auto& d : report.days)
    if (d.skipped) out << "# skipped " << d.date << ": " << d.note << '\n';
}

void write_cumulative_pnl(const BacktestReport& report, std::ostream& out) {
  out << "date,cumulative_pnl\n";
  double cum = 0.0;
  for (const auto& d : report.days) {
    if (d.skipped) continue;
    cum += d.pnl;
    out << d.date << ',' << csv::format_double(cum) << '\n';
  }
}

void write_daily_weights(const BacktestReport& report, std::ostream& out) {
  out << "date";
  for (const auto& id : report.ids) out << ',' << id;
  out << '\n';
  for (Index r = 0; r < report.daily_weights.rows(); ++r) {
    out << report.days[static_cast<std::size_t>(r)].date;
    for (Index c = 0; c < report.daily_weights.cols(); ++c) out << ',' << csv::format_double(report.daily_weights(r, c));
    out << '\n';
  }
}

} // namespace boundreg
