#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace boundreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitVerifyFailed = 3;

struct SolveOptions {
  std::string alpha;     // panel CSV; alpha = newest column
  std::string loadings = "intercept";
  std::string weights;   // `id,z` CSV or a panel CSV (z = 1 / C_ii); empty means z = 1
  std::string bounds;    // `id,lower,upper`; empty means +-1
  std::string config;    // key = value solver overrides
  std::string output;    // `id,weight` CSV; empty writes to stdout
  std::string prior;     // rebalance only: `id,weight` prior weights w*
};

struct BacktestOptions {
  std::string config;
  std::string data_dir;
  std::string output_dir;
  bool weights = false;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int count = 200;
  int max_n = 8;
  int max_k = 3;
  std::optional<double> solver_tol;   // bound-membership tolerance
  std::optional<double> solver_prec;  // normalization tolerance
};

struct GenerateOptions {
  std::uint64_t seed = 1;
  int instruments = 5;
  int days = 100;
  double gap_sigma = 0.01;
  double reversion = 1.0;
  double intraday_noise = 0.0;
  double addv = 6e8;
  int categories = 2;
  std::string output_dir;
};

int run_solve(const SolveOptions& options, std::ostream& out, std::ostream& err);
int run_rebalance(const SolveOptions& options, std::ostream& out, std::ostream& err);
int run_backtest(const BacktestOptions& options, std::ostream& out, std::ostream& err);
int run_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);
int run_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);

} // namespace boundreg::cli
