#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <functional>
#include <sstream>

#include "boundreg/backtest.hpp"
#include "boundreg/bounded_regression.hpp"
#include "boundreg/csv.hpp"
#include "boundreg/errors.hpp"
#include "boundreg/io.hpp"
#include "boundreg/loadings.hpp"
#include "boundreg/oracle.hpp"
#include "boundreg/panel.hpp"
#include "boundreg/random_instance.hpp"
#include "boundreg/synthetic.hpp"
#include "boundreg/weighted_regression.hpp"

namespace boundreg::cli {

namespace {

namespace fs = std::filesystem;

bool is_panel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return line.rfind("# order=", 0) == 0;
  }
  return false;
}

struct AlphaInput {
  std::vector<std::string> ids;
  VectorXd values;
};

// Panel CSV (newest column is alpha) or an `id,alpha` table.
AlphaInput read_alpha(const std::string& path) {
  if (path.empty()) throw InputError("--alpha is required");
  if (is_panel_file(path)) {
    const auto panel = load_panel_file(path);
    return {panel.ids(), panel.latest()};
  }
  const auto table = io::read_id_table_file(path, "alpha file");
  return {table.ids, io::read_column(table, table.ids, "alpha", "alpha file")};
}

// Square `id,<id1>,...,<idN>` covariance table aligned with `ids`.
CovarianceMatrix<double> read_covariance_table(const io::IdTable& table, const std::vector<std::string>& ids,
                                               const std::string& what) {
  MatrixXd cov(static_cast<Index>(ids.size()), static_cast<Index>(ids.size()));
  for (std::size_t c = 0; c < ids.size(); ++c)
    cov.col(static_cast<Index>(c)) = io::read_column(table, ids, ids[c], what);
  return CovarianceMatrix<double>(std::move(cov));
}

CovarianceMatrix<double> read_covariance(const std::string& path, const std::vector<std::string>& ids,
                                         const std::string& what) {
  if (is_panel_file(path)) {
    const auto panel = load_panel_file(path);
    const auto rows = io::align(io::IdTable{{}, panel.ids(), {}, {}}, ids, what);
    MatrixXd obs(static_cast<Index>(ids.size()), panel.values().cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      obs.row(static_cast<Index>(i)) = panel.values().row(static_cast<Index>(rows[i]));
    return sample_covariance(obs, std::span<const std::string>(ids));
  }
  return read_covariance_table(io::read_id_table_file(path, what), ids, what);
}

std::pair<std::string, std::string> split_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return {spec, {}};
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

LoadingsMatrix<double> build_loadings(const std::string& spec, const std::vector<std::string>& ids) {
  const auto [kind, arg] = split_spec(spec);
  const auto n = static_cast<Index>(ids.size());
  if (kind == "intercept" && arg.empty()) return intercept_loadings<double>(n);
  if (kind == "classification" && !arg.empty())
    return classification_loadings<double>(
        io::read_classification(io::read_id_table_file(arg, "classification file"), ids));
  if (kind == "classification+styles") {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) throw InputError("--loadings classification+styles=<file>,<file>");
    const auto base = classification_loadings<double>(
        io::read_classification(io::read_id_table_file(arg.substr(0, comma), "classification file"), ids));
    const MatrixXd styles = io::read_styles(io::read_id_table_file(arg.substr(comma + 1), "style file"), ids);
    return augment_style_columns(base, styles);
  }
  if (kind == "pca" && !arg.empty()) {
    const auto comma = arg.find(',');
    double eigen_tol = 1e-10;
    if (comma != std::string::npos) eigen_tol = csv::parse_double(arg.substr(comma + 1), "pca eigen_tol");
    return pca_loadings(read_covariance(arg.substr(0, comma), ids, "pca input"), eigen_tol);
  }
  throw InputError("unrecognized --loadings '" + spec +
                   "' (intercept | classification=<file> | classification+styles=<file>,<file> | "
                   "pca=<file>[,<eigen_tol>])");
}

// `id,z` table, a square covariance table, or a panel; the latter two give z = 1 / C_ii.
RegressionWeights<double> build_weights(const std::string& path, const std::vector<std::string>& ids) {
  if (path.empty()) return RegressionWeights<double>::ones(static_cast<Index>(ids.size()));
  if (is_panel_file(path)) return regression_weights_from_cov(read_covariance(path, ids, "weights file"));
  const auto table = io::read_id_table_file(path, "weights file");
  if (std::find(table.columns.begin(), table.columns.end(), "z") != table.columns.end())
    return RegressionWeights<double>(io::read_column(table, ids, "z", "weights file"));
  return regression_weights_from_cov(read_covariance_table(table, ids, "weights file"));
}

SolverConfig build_solver_config(const std::string& path) {
  SolverConfig config;
  if (path.empty()) return config;
  const auto kv = io::read_key_values_file(path);
  std::vector<std::string> consumed;
  io::apply_solver_config(kv, config, &consumed);
  for (const auto& [key, value] : kv)
    if (std::find(consumed.begin(), consumed.end(), key) == consumed.end())
      throw InputError("config: unknown key '" + key + "'");
  config.validate();
  return config;
}

void dump_state(const NonConvergenceError& e, std::ostream& err) {
  const auto& s = e.state();
  err << "state: gamma=" << csv::format_double(s.gamma) << " sum|w|=" << csv::format_double(s.last_l1)
      << " inner=" << s.inner_iterations << " outer=" << s.outer_iterations << '\n';
  auto list = [&](const char* name, const std::vector<std::int64_t>& v) {
    err << name << ':';
    for (auto i : v) err << ' ' << i;
    err << '\n';
  };
  list("J+", s.j_plus);
  list("J-", s.j_minus);
  err << "w_hat:";
  for (double w : s.w_hat) err << ' ' << csv::format_double(w);
  err << '\n';
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const NonConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    dump_state(e, err);
    return kExitSolver;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

void write_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& emit) {
  if (path.empty()) {
    emit(fallback);
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  emit(out);
}

void print_summary(std::ostream& out, const BoundedSolution<double>& sol, const LoadingsMatrix<double>& loadings) {
  const double neutrality = (loadings.values().transpose() * sol.weights).cwiseAbs().maxCoeff();
  out << "sum|w|=" << csv::format_double(sol.weights.cwiseAbs().sum())
      << " neutrality_residual=" << csv::format_double(neutrality)
      << " gamma=" << csv::format_double(sol.gamma()) << " inner_iterations=" << sol.state.inner_iterations
      << " outer_iterations=" << sol.state.outer_iterations << '\n';
}

} // namespace

int run_solve(const SolveOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto alpha = read_alpha(options.alpha);
    const auto loadings = build_loadings(options.loadings, alpha.ids);
    const auto z = build_weights(options.weights, alpha.ids);
    const auto bounds = options.bounds.empty()
                            ? BoundSpec<double>::symmetric(static_cast<Index>(alpha.ids.size()), 1.0)
                            : io::read_bounds(io::read_id_table_file(options.bounds, "bounds file"), alpha.ids);
    const auto config = build_solver_config(options.config);
    const auto sol = bounded_regression(alpha.values, loadings, z, bounds, config);
    write_output(options.output, out, [&](std::ostream& o) { io::write_vector(o, alpha.ids, sol.weights, "weight"); });
    print_summary(options.output.empty() ? err : out, sol, loadings);
    return kExitOk;
  });
}

int run_rebalance(const SolveOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.prior.empty()) throw InputError("--prior is required");
    const auto alpha = read_alpha(options.alpha);
    const auto loadings = build_loadings(options.loadings, alpha.ids);
    const auto z = build_weights(options.weights, alpha.ids);
    const VectorXd prior =
        io::read_column(io::read_id_table_file(options.prior, "prior file"), alpha.ids, "weight", "prior file");
    const auto n = static_cast<Index>(alpha.ids.size());
    // Without a bounds file every trade may take the whole book.
    const auto bounds = options.bounds.empty()
                            ? BoundSpec<double>(-VectorXd::Ones(n) - prior.cwiseAbs(), VectorXd::Ones(n) + prior.cwiseAbs())
                            : io::read_bounds(io::read_id_table_file(options.bounds, "bounds file"), alpha.ids);
    const auto config = build_solver_config(options.config);
    const auto sol = bounded_regression_rebalance(alpha.values, loadings, z, bounds, prior, config);
    write_output(options.output, out, [&](std::ostream& o) {
      o << "id,weight,trade\n";
      for (std::size_t i = 0; i < alpha.ids.size(); ++i)
        o << alpha.ids[i] << ',' << csv::format_double(sol.weights(static_cast<Index>(i))) << ','
          << csv::format_double(sol.trades(static_cast<Index>(i))) << '\n';
    });
    print_summary(options.output.empty() ? err : out, sol, loadings);
    return kExitOk;
  });
}

int run_backtest(const BacktestOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.data_dir.empty()) throw InputError("--data is required");
    const auto config = options.config.empty() ? BacktestConfig{}
                                               : backtest_config_from(io::read_key_values_file(options.config));
    auto cfg = config;
    cfg.keep_weights = cfg.keep_weights || options.weights;
    const auto market = read_market(options.data_dir);
    const auto* labels = market.labels.empty() ? nullptr : &market.labels;
    const auto* styles = market.styles.size() == 0 ? nullptr : &market.styles;
    const auto report = boundreg::run_backtest(cfg, market.prices, labels, styles);

    const fs::path dir = options.output_dir.empty() ? fs::path(".") : fs::path(options.output_dir);
    fs::create_directories(dir);
    auto emit = [&](const char* name, auto&& writer) {
      std::ofstream f(dir / name);
      if (!f) throw InputError("cannot write '" + (dir / name).string() + "'");
      writer(report, f);
    };
    emit("report.csv", write_report);
    emit("cumpnl.csv", write_cumulative_pnl);
    if (cfg.keep_weights) emit("weights.csv", write_daily_weights);
    const auto& s = report.summary;
    out << "days=" << s.trading_days << " skipped=" << s.skipped_days << " roc=" << csv::format_double(s.roc)
        << " sr=" << (s.sr ? csv::format_double(*s.sr) : std::string("NA")) << " cps=" << csv::format_double(s.cps)
        << '\n';
    return kExitOk;
  });
}

int run_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (options.count < 0) throw InputError("--count must be non-negative");
    if (options.max_n < 2 || options.max_n > oracle::kMaxOracleSize)
      throw InputError("--max-n must lie in [2, 12]");
    if (options.max_k < 1) throw InputError("--max-k must be at least 1");
    if (options.count == 0) {
      err << "warning: no instances requested\n";
      out << "PASS instances=0 compared=0 max_discrepancy=0\n";
      return kExitOk;
    }
    SolverConfig config;
    if (options.solver_tol) config.tol = *options.solver_tol;
    if (options.solver_prec) config.prec = *options.solver_prec;
    config.validate();

    std::mt19937_64 rng(options.seed);
    int compared = 0, failures = 0, skipped = 0;
    double worst = 0.0;
    for (int t = 0; t < options.count; ++t) {
      const auto inst = random_instance(rng, options.max_n, options.max_k);
      VectorXd solver_w, oracle_w;
      try {
        solver_w = bounded_regression(inst.alpha, inst.loadings, inst.z, inst.bounds, config).weights;
        oracle_w = oracle::oracle_bounded_regression(inst.alpha, inst.loadings, inst.z, inst.bounds).weights;
      } catch (const SolverError&) {
        ++skipped;
        continue;
      } catch (const InputError&) {
        ++skipped;
        continue;
      }
      ++compared;
      const double gap = (solver_w - oracle_w).cwiseAbs().maxCoeff();
      worst = std::max(worst, gap);
      if (!(gap <= 1e-8)) {
        ++failures;
        err << "instance " << t << ": discrepancy " << csv::format_double(gap) << '\n';
      }
    }
    out << (failures == 0 ? "PASS" : "FAIL") << " instances=" << options.count << " compared=" << compared
        << " skipped=" << skipped << " failures=" << failures << " max_discrepancy=" << csv::format_double(worst)
        << '\n';
    return failures == 0 ? kExitOk : kExitVerifyFailed;
  });
}

int run_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.output_dir.empty()) throw InputError("--output is required");
    SyntheticConfig config;
    config.seed = options.seed;
    config.instruments = options.instruments;
    config.days = options.days;
    config.gap_sigma = options.gap_sigma;
    config.reversion = options.reversion;
    config.intraday_noise = options.intraday_noise;
    config.addv = options.addv;
    config.categories = options.categories;
    write_market(generate_synthetic(config), options.output_dir);
    out << "wrote " << options.instruments << " instruments x " << options.days << " days to "
        << options.output_dir << '\n';
    return kExitOk;
  });
}

} // namespace boundreg::cli
