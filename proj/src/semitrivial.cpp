#include "holltan/semitrivial.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SparseLU>

#include "holltan/eigen.hpp"
#include "holltan/errors.hpp"

namespace holltan {

void ModelParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw ValidationError(std::string(name) + " must be positive");
    }
  };
  positive(alpha1, "alpha1");
  positive(beta1, "beta1");
  positive(m, "m");
  positive(r, "r");
  positive(s, "s");
  // Zero coupling constants are the decoupled limits.
  if (!(std::isfinite(alpha2) && alpha2 >= 0.0)) {
    throw ValidationError("alpha2 must be nonnegative");
  }
  if (!(std::isfinite(beta2) && beta2 >= 0.0)) {
    throw ValidationError("beta2 must be nonnegative");
  }
  if (!(std::isfinite(eta) && eta >= 0.0)) throw ValidationError("eta must be nonnegative");
  if (!(std::isfinite(xi) && xi >= 0.0)) throw ValidationError("xi must be nonnegative");
}

const char* to_string(Species s) {
  return s == Species::prey ? "prey" : "predator";
}

namespace {

struct NewtonOutcome {
  Eigen::VectorXd u;
  bool converged = false;
};

NewtonOutcome logistic_newton(const Eigen::SparseMatrix<double>& lap, double growth,
                              double crowding, Eigen::VectorXd u, double tol,
                              std::vector<double>& trace) {
  const auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return lap * x - growth * x + crowding * x.cwiseProduct(x);
  };
  Eigen::VectorXd f = residual(u);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int it = 0; it < kNewtonMaxIterations; ++it) {
    const double norm = f.lpNorm<Eigen::Infinity>();
    trace.push_back(norm);
    if (norm <= tol) return {std::move(u), true};
    if (!std::isfinite(norm)) break;

    Eigen::SparseMatrix<double> jac = lap;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      jac.coeffRef(i, i) += 2.0 * crowding * u[i] - growth;
    }
    lu.compute(jac);
    if (lu.info() != Eigen::Success) break;
    const Eigen::VectorXd step = lu.solve(-f);

    // Backtrack on the 2-norm of the residual.
    double t = 1.0;
    Eigen::VectorXd trial;
    Eigen::VectorXd ftrial;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      trial = u + t * step;
      ftrial = residual(trial);
      if (ftrial.norm() <= (1.0 - 1e-4 * t) * f.norm()) break;
    }
    u = std::move(trial);
    f = std::move(ftrial);
  }
  return {std::move(u), false};
}

}  // namespace

Field solve_logistic(const Grid& grid, double growth, double crowding, double tol,
                     const std::optional<Field>& initial) {
  if (!(crowding > 0.0)) throw ValidationError("crowding must be positive");
  if (!(tol > 0.0)) throw ValidationError("Newton tolerance must be positive");
  if (!std::isfinite(growth)) throw ValidationError("growth must be finite");
  if (initial && !(initial->grid() == grid)) {
    throw ValidationError("initial guess lives on a different grid");
  }

  const EigenPair base = principal_eigenpair(grid, Field::zeros(grid));
  if (growth <= base.lambda + 1e-8) return Field::zeros(grid);

  std::vector<Eigen::VectorXd> starts;
  if (initial) {
    starts.push_back(initial->values());
  } else {
    starts.push_back(0.1 * growth / crowding * base.phi.values());
  }
  starts.push_back(Eigen::VectorXd::Constant(grid.size(), growth / crowding));

  const Eigen::SparseMatrix<double> lap = dirichlet_laplacian(grid).matrix;
  std::vector<double> trace;
  for (auto& start : starts) {
    NewtonOutcome out = logistic_newton(lap, growth, crowding, std::move(start), tol, trace);
    if (out.converged && out.u.minCoeff() > 0.0) return Field(grid, std::move(out.u));
  }
  const double last = trace.empty() ? 0.0 : trace.back();
  throw SolverError(SolverFailure::divergence,
                    "logistic Newton did not reach a positive solution", last,
                    std::move(trace));
}

Field holling_saturation(const Field& u, double m) {
  if (!(m > 0.0)) throw ValidationError("m must be positive");
  if (u.min() < 0.0) throw ValidationError("Holling saturation needs U >= 0");
  return Field(u.grid(), u.values().array() / (1.0 + m * u.values().array()));
}

SemiTrivialState prey_state(const Grid& grid, const ModelParams& params, double tol) {
  params.validate();
  return {Species::prey, solve_logistic(grid, params.eta - params.r, params.alpha1, tol),
          params.eta};
}

SemiTrivialState predator_state(const Grid& grid, const ModelParams& params,
                                double tol) {
  params.validate();
  return {Species::predator,
          solve_logistic(grid, params.xi - params.s, params.beta1, tol), params.xi};
}

double bifurcation_point_xi0(const Grid& grid, const ModelParams& params,
                             const Field& u_eta) {
  const Field p = holling_saturation(u_eta, params.m);
  const Field potential(grid, params.s - params.beta2 * p.values().array());
  return principal_eigenpair(grid, potential).lambda;
}

double bifurcation_point_eta0(const Grid& grid, const ModelParams& params,
                              const Field& v_xi) {
  if (v_xi.min() < 0.0) throw ValidationError("V_xi must be nonnegative");
  const Field potential(grid, params.r + params.alpha2 * v_xi.values().array());
  return principal_eigenpair(grid, potential).lambda;
}

SmallnessCondition smallness_condition(const ModelParams& params, double lambda1) {
  const double excess = params.eta - params.r;
  if (!(excess > 0.0)) {
    throw ValidationError("smallness condition needs eta > r (no prey branch otherwise)");
  }
  SmallnessCondition c;
  c.value = params.beta2 * excess / (params.alpha1 + params.m * excess);
  c.threshold = lambda1 + params.s;
  c.ok = c.value < c.threshold;
  return c;
}

SemiTrivialBounds check_semitrivial_bounds(const SemiTrivialState& state,
                                           const ModelParams& params, double tol) {
  const Grid& grid = state.profile.grid();
  const double lambda1 = principal_eigenpair(grid, Field::zeros(grid)).lambda;

  SemiTrivialBounds b;
  b.which = state.which;
  b.param = state.param;
  b.min = state.profile.min();
  b.max = state.profile.max();
  b.tolerance = 10.0 * tol;
  if (state.which == Species::prey) {
    b.bound = (state.param - params.r) / params.alpha1;
    b.threshold = lambda1 + params.r;
  } else {
    b.bound = (state.param - params.s) / params.beta1;
    b.threshold = lambda1 + params.s;
  }
  b.trivial = state.profile.max_norm() == 0.0;
  b.positive = b.min > 0.0;
  b.below_bound = b.max <= b.bound + b.tolerance;
  b.above_threshold = state.param > b.threshold;
  b.pass = b.trivial || (b.positive && b.below_bound && b.above_threshold);
  return b;
}

}  // namespace holltan
