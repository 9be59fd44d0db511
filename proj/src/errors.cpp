#include "holltan/errors.hpp"

namespace holltan {

const char* to_string(SolverFailure kind) {
  switch (kind) {
    case SolverFailure::iteration_limit: return "iteration_limit";
    case SolverFailure::divergence: return "divergence";
    case SolverFailure::negative_overshoot: return "negative_overshoot";
    case SolverFailure::indefinite_operator: return "indefinite_operator";
    case SolverFailure::sign_change: return "sign_change";
    case SolverFailure::no_sign_change: return "no_sign_change";
    case SolverFailure::step_collapse: return "step_collapse";
    case SolverFailure::step_instability: return "step_instability";
  }
  return "unknown";
}

}  // namespace holltan
