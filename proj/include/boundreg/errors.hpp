#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace boundreg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or contract-violating inputs. The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Failures of the numerical procedure itself. The CLI maps these to exit code 2.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A normal matrix that could not be factorized (collinear loadings on the
/// free set, or an ill-conditioned Q).
class SingularSystemError : public SolverError {
 public:
  SingularSystemError(const std::string& what, double rcond)
      : SolverError(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Scalar-erased copy of the iteration state, carried by solver errors so
/// that callers can dump it without knowing the solver's scalar type.
struct SolveDiagnostics {
  std::vector<std::int64_t> j_plus;
  std::vector<std::int64_t> j_minus;
  std::vector<double> w_hat;
  double gamma = 0.0;
  int inner_iterations = 0;
  int outer_iterations = 0;
  double last_l1 = 0.0;
};

class NonConvergenceError : public SolverError {
 public:
  NonConvergenceError(const std::string& what, SolveDiagnostics state)
      : SolverError(what), state_(std::move(state)) {}
  const SolveDiagnostics& state() const noexcept { return state_; }

 private:
  SolveDiagnostics state_;
};

/// The gamma iteration could not reach the L1 normalization: the bounds are
/// too tight for neutrality plus sum |w| = 1.
class InfeasibleError : public NonConvergenceError {
 public:
  using NonConvergenceError::NonConvergenceError;
};

} // namespace boundreg
