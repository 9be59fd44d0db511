#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace holltan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed grid, out-of-range parameters, inconsistent fields.
class ValidationError : public Error {
 public:
  using Error::Error;
};

enum class SolverFailure {
  iteration_limit,
  divergence,
  negative_overshoot,
  indefinite_operator,
  sign_change,
  no_sign_change,
  step_collapse,
  step_instability,
};

const char* to_string(SolverFailure kind);

// A numerical procedure did not produce an acceptable result. `trace` holds
// the residual history when the failing routine is iterative.
class SolverError : public Error {
 public:
  SolverError(SolverFailure kind, const std::string& what,
              double last_residual = 0.0, std::vector<double> trace = {})
      : Error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        last_residual_(last_residual),
        trace_(std::move(trace)) {}

  SolverFailure kind() const noexcept { return kind_; }
  double last_residual() const noexcept { return last_residual_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  SolverFailure kind_;
  double last_residual_;
  std::vector<double> trace_;
};

}  // namespace holltan
