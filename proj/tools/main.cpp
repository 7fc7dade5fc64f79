#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace boundreg::cli;
  CLI::App app{"Bounded, factor-neutral regression weights and intraday backtests"};
  app.require_subcommand(1);

  SolveOptions solve;
  auto add_solve_options = [](CLI::App* cmd, SolveOptions& o) {
    cmd->add_option("--alpha", o.alpha, "alpha panel CSV (newest column) or id,alpha table")->required();
    cmd->add_option("--loadings", o.loadings,
                    "intercept | classification=<file> | classification+styles=<file>,<file> | pca=<file>[,<tol>]");
    cmd->add_option("--weights", o.weights, "id,z table, covariance table or panel (z = 1/C_ii)");
    cmd->add_option("--bounds", o.bounds, "id,lower,upper table");
    cmd->add_option("--config", o.config, "key = value solver overrides");
    cmd->add_option("--output", o.output, "output CSV (stdout if omitted)");
  };
  auto* solve_cmd = app.add_subcommand("solve", "bounded regression weights");
  add_solve_options(solve_cmd, solve);

  SolveOptions rebalance;
  auto* rebalance_cmd = app.add_subcommand("rebalance", "bounded regression from prior weights");
  add_solve_options(rebalance_cmd, rebalance);
  rebalance_cmd->add_option("--prior", rebalance.prior, "id,weight prior weights")->required();

  BacktestOptions backtest;
  auto* backtest_cmd = app.add_subcommand("backtest", "intraday mean-reversion backtest");
  backtest_cmd->add_option("--config", backtest.config, "key = value backtest configuration");
  backtest_cmd->add_option("--data", backtest.data_dir, "directory with open.csv, close_adj.csv, volume.csv")
      ->required();
  backtest_cmd->add_option("--output", backtest.output_dir, "output directory (default .)");
  backtest_cmd->add_flag("--weights", backtest.weights, "also write weights.csv");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "compare the solver with the brute-force oracle");
  verify_cmd->add_option("--seed", verify.seed);
  verify_cmd->add_option("--count", verify.count);
  verify_cmd->add_option("--max-n", verify.max_n);
  verify_cmd->add_option("--max-k", verify.max_k);
  verify_cmd->add_option("--solver-tol", verify.solver_tol);
  verify_cmd->add_option("--solver-prec", verify.solver_prec);

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "write a seeded synthetic market");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--instruments", gen.instruments);
  gen_cmd->add_option("--days", gen.days);
  gen_cmd->add_option("--gap-sigma", gen.gap_sigma);
  gen_cmd->add_option("--reversion", gen.reversion);
  gen_cmd->add_option("--noise", gen.intraday_noise);
  gen_cmd->add_option("--addv", gen.addv);
  gen_cmd->add_option("--categories", gen.categories);
  gen_cmd->add_option("--output", gen.output_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*solve_cmd) return run_solve(solve, std::cout, std::cerr);
  if (*rebalance_cmd) return run_rebalance(rebalance, std::cout, std::cerr);
  if (*backtest_cmd) return run_backtest(backtest, std::cout, std::cerr);
  if (*verify_cmd) return run_verify(verify, std::cout, std::cerr);
  return run_generate(gen, std::cout, std::cerr);
}
