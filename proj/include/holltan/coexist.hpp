#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "holltan/errors.hpp"
#include "holltan/grid.hpp"
#include "holltan/semitrivial.hpp"

namespace holltan {

/// A candidate or converged solution (U, V) of the coupled elliptic system.
/// The fertility intensities live here; ModelParams supplies the rate
/// constants (its eta/xi fields are ignored by the routines below).
struct SteadyState {
  Field u;
  Field v;
  double eta = 0.0;
  double xi = 0.0;
};

struct StateResidual {
  Field u;
  Field v;
  double max_norm() const { return std::max(u.max_norm(), v.max_norm()); }
};

/// Nodewise residual of
///   -Lap U - (eta - r) U + alpha1 U^2 + alpha2 V U / (1 + m U)
///   -Lap V - (xi - s) V + beta1 V^2 - beta2 U V / (1 + m U).
StateResidual residual(const SteadyState& state, const ModelParams& params);

/// Exact 2N x 2N Jacobian of `residual` in the unknown ordering [U; V].
LinearOperator jacobian(const SteadyState& state, const ModelParams& params);

struct NewtonOptions {
  double tol = kNewtonTolerance;
  int max_iterations = kNewtonMaxIterations;
  /// Converged nodes below -negative_tolerance leave the nonnegative cone.
  double negative_tolerance = 1e-8;
};

/// Damped Newton at the fertility values carried by `initial`. Failures are
/// reported as SolverError with kind divergence, iteration_limit or
/// negative_overshoot.
SteadyState newton_solve(const SteadyState& initial, const ModelParams& params,
                         const NewtonOptions& options = {});

enum class ContinuationParameter { xi, eta };
const char* to_string(ContinuationParameter p);

/// Null direction of the linearization at a semi-trivial state.
///
/// For xi: psi is the positive principal eigenfunction of
/// -Lap + s - beta2 P_eta (eigenvalue xi_0) and phi = alpha2 R(P_eta psi)
/// with R = (-Lap + r - eta + 2 alpha1 U_eta)^{-1}; the branch leaves
/// (U_eta, 0) along (-phi, psi).
///
/// For eta: phi is the positive principal eigenfunction of
/// -Lap + r + alpha2 V_xi (eigenvalue eta_0) and
/// psi = (-Lap + 2 beta1 V_xi - xi + s)^{-1}(beta2 V_xi phi); the branch
/// leaves (0, V_xi) along (phi, psi).
struct KernelTangent {
  ContinuationParameter parameter = ContinuationParameter::xi;
  Field phi;
  Field psi;
  double critical_param = 0.0;
  double prey_residual = 0.0;      // max-norm residual of the prey equation
  double predator_residual = 0.0;  // max-norm residual of the predator equation
};

KernelTangent kernel_tangent_xi(const Grid& grid, const ModelParams& params,
                                const Field& u_eta);
KernelTangent kernel_tangent_eta(const Grid& grid, const ModelParams& params,
                                 const Field& v_xi);

struct ParameterWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double x) const { return lo <= x && x <= hi; }
};

inline constexpr double kBisectionTolerance = 1e-8;

/// Bisects for the xi in `window` where the smallest eigenvalue of the
/// predator block of the Jacobian at (U_eta, 0) changes sign.
double detect_bifurcation(const Grid& grid, const ModelParams& params,
                          const Field& u_eta, ParameterWindow window,
                          double tol = kBisectionTolerance);

enum class BranchKind { trivial, semitrivial_prey, semitrivial_predator, coexistence };
const char* to_string(BranchKind k);

enum class StopReason { max_points, window_edge, positivity_lost };
const char* to_string(StopReason r);

struct BranchPoint {
  SteadyState state;
  double residual = 0.0;
  int newton_iterations = 0;
  double param(ContinuationParameter p) const {
    return p == ContinuationParameter::xi ? state.xi : state.eta;
  }
};

struct Branch {
  BranchKind kind = BranchKind::coexistence;
  ContinuationParameter parameter = ContinuationParameter::xi;
  std::vector<BranchPoint> points;
  StopReason stop = StopReason::max_points;
};

/// Initial predictor direction in (U, V, parameter) space.
struct Direction {
  Field u;
  Field v;
  double param = 0.0;
};

struct ContinuationOptions {
  ContinuationParameter parameter = ContinuationParameter::xi;
  BranchKind kind = BranchKind::coexistence;
  double initial_step = 1e-3;
  double min_step = 1e-9;
  double max_step = 0.05;
  int max_points = 40;
  ParameterWindow window;
  double newton_tol = kNewtonTolerance;
  int max_newton_iterations = 15;
  double negative_tolerance = 1e-8;
  bool include_start = true;
};

/// Thrown when the step shrinks below min_step without a converged
/// corrector. `partial` holds every point accepted so far.
class ContinuationError : public SolverError {
 public:
  ContinuationError(const std::string& what, double last_residual, Branch partial)
      : SolverError(SolverFailure::step_collapse, what, last_residual),
        partial_(std::move(partial)) {}
  const Branch& partial() const noexcept { return partial_; }

 private:
  Branch partial_;
};

/// Pseudo-arclength continuation. Steps are measured in the norm
/// ||(x, p)||^2 = |x|^2 / N + p^2 with N the node count. The first predictor
/// follows `direction`, later ones the secant through the last two points.
/// Corrector results with nodes below -negative_tolerance are rejected and
/// the step halved; the run ends with positivity_lost if that halving
/// reaches min_step.
Branch continue_branch(const SteadyState& start, const ModelParams& params,
                       const Direction& direction, const ContinuationOptions& options);

/// Coexistence branch emanating from (xi_0, U_eta, 0) in the +psi direction.
/// `params.eta` fixes the prey fertility.
Branch trace_coexistence_xi(const ModelParams& params, const Field& u_eta,
                            const KernelTangent& tangent, ContinuationOptions options);

/// Coexistence branch emanating from (eta_0, 0, V_xi) in the +phi direction.
/// `params.xi` fixes the predator fertility.
Branch trace_coexistence_eta(const ModelParams& params, const Field& v_xi,
                             const KernelTangent& tangent, ContinuationOptions options);

struct Alignment {
  double angle_deg = 0.0;       // between the branch secant and the kernel tangent
  double amplitude = 0.0;       // max-norm of the emerging species
  double shape_deviation = 0.0; // || w / ||w||_inf - tangent component ||_inf
  double param = 0.0;
};

/// `base` is U_eta for an xi tangent and V_xi for an eta tangent.
Alignment tangent_alignment(const SteadyState& point, const KernelTangent& tangent,
                            const Field& base);

/// Uses the branch point whose emerging-species amplitude is closest to
/// `amplitude` (in log scale). Throws ValidationError for an empty branch.
Alignment tangent_alignment(const Branch& branch, const KernelTangent& tangent,
                            const Field& base, double amplitude);

}  // namespace holltan
