#include "holltan/coexist.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SparseLU>

#include "holltan/eigen.hpp"
#include "state_vector.hpp"

namespace holltan {

const char* to_string(ContinuationParameter p) {
  return p == ContinuationParameter::xi ? "xi" : "eta";
}

const char* to_string(BranchKind k) {
  switch (k) {
    case BranchKind::trivial: return "trivial";
    case BranchKind::semitrivial_prey: return "semitrivial_prey";
    case BranchKind::semitrivial_predator: return "semitrivial_predator";
    case BranchKind::coexistence: return "coexistence";
  }
  return "unknown";
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::max_points: return "max_points";
    case StopReason::window_edge: return "window_edge";
    case StopReason::positivity_lost: return "positivity_lost";
  }
  return "unknown";
}

namespace detail {

Eigen::VectorXd residual_vector(const Eigen::SparseMatrix<double>& lap,
                                const Eigen::VectorXd& x, double eta, double xi,
                                const ModelParams& p) {
  const Eigen::Index n = lap.rows();
  const auto u = x.head(n).array();
  const auto v = x.tail(n).array();
  const Eigen::ArrayXd holling = u * v / (1.0 + p.m * u);
  Eigen::VectorXd out(2 * n);
  out.head(n) = lap * x.head(n);
  out.tail(n) = lap * x.tail(n);
  out.head(n).array() += -(eta - p.r) * u + p.alpha1 * u.square() + p.alpha2 * holling;
  out.tail(n).array() += -(xi - p.s) * v + p.beta1 * v.square() - p.beta2 * holling;
  return out;
}

Eigen::SparseMatrix<double> jacobian_matrix(const Eigen::SparseMatrix<double>& lap,
                                            const Eigen::VectorXd& x, double eta,
                                            double xi, const ModelParams& p) {
  const Eigen::Index n = lap.rows();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * lap.nonZeros() + 4 * n);
  for (int k = 0; k < lap.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(lap, k); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
      t.emplace_back(it.row() + n, it.col() + n, it.value());
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = x[i];
    const double v = x[n + i];
    const double d = 1.0 + p.m * u;
    // d/dU [U V / (1 + m U)] = V / (1 + m U)^2, d/dV = U / (1 + m U)
    const double hu = v / (d * d);
    const double hv = u / d;
    t.emplace_back(i, i, -(eta - p.r) + 2.0 * p.alpha1 * u + p.alpha2 * hu);
    t.emplace_back(i, n + i, p.alpha2 * hv);
    t.emplace_back(n + i, i, -p.beta2 * hu);
    t.emplace_back(n + i, n + i, -(xi - p.s) + 2.0 * p.beta1 * v - p.beta2 * hv);
  }
  Eigen::SparseMatrix<double> jac(2 * n, 2 * n);
  jac.setFromTriplets(t.begin(), t.end());
  jac.makeCompressed();
  return jac;
}

}  // namespace detail

namespace {

void require_state(const SteadyState& s) {
  if (!(s.u.grid() == s.v.grid())) {
    throw ValidationError("U and V live on different grids");
  }
  if (!std::isfinite(s.eta) || !std::isfinite(s.xi)) {
    throw ValidationError("fertility parameters must be finite");
  }
}

}  // namespace

StateResidual residual(const SteadyState& state, const ModelParams& params) {
  require_state(state);
  const Grid& grid = state.u.grid();
  const Eigen::VectorXd r = detail::residual_vector(
      dirichlet_laplacian(grid).matrix, detail::stack(state), state.eta, state.xi, params);
  return {Field(grid, r.head(grid.size())), Field(grid, r.tail(grid.size()))};
}

LinearOperator jacobian(const SteadyState& state, const ModelParams& params) {
  require_state(state);
  return {detail::jacobian_matrix(dirichlet_laplacian(state.u.grid()).matrix,
                                  detail::stack(state), state.eta, state.xi, params),
          false};
}

SteadyState newton_solve(const SteadyState& initial, const ModelParams& params,
                         const NewtonOptions& options) {
  require_state(initial);
  if (!(options.tol > 0.0)) throw ValidationError("Newton tolerance must be positive");
  const Grid& grid = initial.u.grid();
  const Eigen::Index n = grid.size();
  const auto lap = dirichlet_laplacian(grid).matrix;
  const double eta = initial.eta;
  const double xi = initial.xi;

  Eigen::VectorXd x = detail::stack(initial);
  if (!detail::holling_defined(x, n, params.m)) {
    throw SolverError(SolverFailure::negative_overshoot,
                      "initial guess has 1 + m U <= 0");
  }
  Eigen::VectorXd f = detail::residual_vector(lap, x, eta, xi, params);
  std::vector<double> trace;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

  for (int it = 0;; ++it) {
    const double norm = f.lpNorm<Eigen::Infinity>();
    trace.push_back(norm);
    if (!std::isfinite(norm)) {
      throw SolverError(SolverFailure::divergence, "residual is not finite", norm,
                        std::move(trace));
    }
    if (norm <= options.tol) break;
    if (it >= options.max_iterations) {
      throw SolverError(SolverFailure::iteration_limit,
                        "Newton did not converge in " +
                            std::to_string(options.max_iterations) + " iterations",
                        norm, std::move(trace));
    }
    lu.compute(detail::jacobian_matrix(lap, x, eta, xi, params));
    if (lu.info() != Eigen::Success) {
      throw SolverError(SolverFailure::divergence, "singular Jacobian", norm,
                        std::move(trace));
    }
    const Eigen::VectorXd step = lu.solve(-f);

    double t = 1.0;
    bool accepted = false;
    bool defined_somewhere = false;
    for (int k = 0; k < 40 && !accepted; ++k, t *= 0.5) {
      const Eigen::VectorXd trial = x + t * step;
      if (!detail::holling_defined(trial, n, params.m)) continue;
      defined_somewhere = true;
      const Eigen::VectorXd ftrial = detail::residual_vector(lap, trial, eta, xi, params);
      if (ftrial.norm() <= (1.0 - 1e-4 * t) * f.norm()) {
        x = trial;
        f = ftrial;
        accepted = true;
      }
    }
    if (!accepted) {
      if (!defined_somewhere) {
        throw SolverError(SolverFailure::negative_overshoot,
                          "every damped step leaves 1 + m U > 0", norm,
                          std::move(trace));
      }
      throw SolverError(SolverFailure::divergence, "line search failed", norm,
                        std::move(trace));
    }
  }
  if (x.minCoeff() < -options.negative_tolerance) {
    throw SolverError(SolverFailure::negative_overshoot,
                      "converged outside the nonnegative cone (min " +
                          std::to_string(x.minCoeff()) + ")",
                      trace.back(), std::move(trace));
  }
  return detail::unstack(grid, x, eta, xi);
}

KernelTangent kernel_tangent_xi(const Grid& grid, const ModelParams& params,
                                const Field& u_eta) {
  if (!(u_eta.grid() == grid)) throw ValidationError("U_eta lives on a different grid");
  const Field sat = holling_saturation(u_eta, params.m);
  const Field predator_potential(grid, params.s - params.beta2 * sat.values().array());
  EigenPair psi = principal_eigenpair(grid, predator_potential);

  const Field rhs(grid, params.alpha2 * sat.values().cwiseProduct(psi.phi.values()));
  Field phi = shifted_resolvent_apply(
      grid, Field(grid, 2.0 * params.alpha1 * u_eta.values()), params.r - params.eta, rhs);

  const auto lap = dirichlet_laplacian(grid).matrix;
  const Eigen::VectorXd& u = u_eta.values();
  const Eigen::VectorXd& p = sat.values();
  const Eigen::VectorXd prey =
      (params.r - params.eta) * phi.values() + lap * phi.values() +
      2.0 * params.alpha1 * u.cwiseProduct(phi.values()) -
      params.alpha2 * p.cwiseProduct(psi.phi.values());
  const Eigen::VectorXd predator =
      (params.s - psi.lambda) * psi.phi.values() + lap * psi.phi.values() -
      params.beta2 * p.cwiseProduct(psi.phi.values());

  KernelTangent k{ContinuationParameter::xi, std::move(phi), psi.phi, psi.lambda,
                  prey.lpNorm<Eigen::Infinity>(), predator.lpNorm<Eigen::Infinity>()};
  return k;
}

KernelTangent kernel_tangent_eta(const Grid& grid, const ModelParams& params,
                                 const Field& v_xi) {
  if (!(v_xi.grid() == grid)) throw ValidationError("V_xi lives on a different grid");
  if (v_xi.min() < 0.0) throw ValidationError("V_xi must be nonnegative");
  const Eigen::VectorXd& v = v_xi.values();
  const Field prey_potential(grid, params.r + params.alpha2 * v.array());
  EigenPair phi = principal_eigenpair(grid, prey_potential);

  const Field rhs(grid, params.beta2 * v.cwiseProduct(phi.phi.values()));
  Field psi = shifted_resolvent_apply(grid, Field(grid, 2.0 * params.beta1 * v),
                                      params.s - params.xi, rhs);

  const auto lap = dirichlet_laplacian(grid).matrix;
  const Eigen::VectorXd prey = lap * phi.phi.values() +
                               (params.r + params.alpha2 * v.array()).matrix().cwiseProduct(
                                   phi.phi.values()) -
                               phi.lambda * phi.phi.values();
  const Eigen::VectorXd predator =
      lap * psi.values() +
      (2.0 * params.beta1 * v.array() - params.xi + params.s).matrix().cwiseProduct(
          psi.values()) -
      params.beta2 * v.cwiseProduct(phi.phi.values());

  return KernelTangent{ContinuationParameter::eta, phi.phi, std::move(psi), phi.lambda,
                       prey.lpNorm<Eigen::Infinity>(), predator.lpNorm<Eigen::Infinity>()};
}

double detect_bifurcation(const Grid& grid, const ModelParams& params,
                          const Field& u_eta, ParameterWindow window, double tol) {
  if (!(window.lo < window.hi) || !std::isfinite(window.lo) || !std::isfinite(window.hi)) {
    throw ValidationError("bifurcation window must satisfy lo < hi");
  }
  if (!(tol > 0.0)) throw ValidationError("bisection tolerance must be positive");
  const Eigen::Index n = grid.size();
  const auto block_eigenvalue = [&](double xi) {
    const SteadyState at{u_eta, Field::zeros(grid), params.eta, xi};
    const Eigen::SparseMatrix<double> jac = jacobian(at, params).matrix;
    const Eigen::SparseMatrix<double> block = jac.bottomRightCorner(n, n);
    return principal_eigenpair(grid, block).lambda;
  };

  double lo = window.lo;
  double hi = window.hi;
  const double f_lo = block_eigenvalue(lo);
  const double f_hi = block_eigenvalue(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw SolverError(SolverFailure::no_sign_change,
                      "predator block eigenvalue keeps its sign on [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const bool lo_positive = f_lo > 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = block_eigenvalue(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Alignment tangent_alignment(const SteadyState& point, const KernelTangent& tangent,
                            const Field& base) {
  require_state(point);
  const bool xi_side = tangent.parameter == ContinuationParameter::xi;
  // xi: base is U_eta, emerging species V, tangent (-phi, psi).
  // eta: base is V_xi, emerging species U, tangent (phi, psi).
  const Eigen::VectorXd& emerging = xi_side ? point.v.values() : point.u.values();
  const double amplitude = emerging.lpNorm<Eigen::Infinity>();
  if (!(amplitude > 0.0)) {
    throw ValidationError("tangent alignment needs a point with nonzero amplitude");
  }
  Eigen::VectorXd secant;
  Eigen::VectorXd reference;
  if (xi_side) {
    secant = detail::stack(point.u.values() - base.values(), point.v.values()) / amplitude;
    reference = detail::stack(-tangent.phi.values(), tangent.psi.values());
  } else {
    secant = detail::stack(point.u.values(), point.v.values() - base.values()) / amplitude;
    reference = detail::stack(tangent.phi.values(), tangent.psi.values());
  }
  const double c = std::clamp(secant.dot(reference) / (secant.norm() * reference.norm()),
                              -1.0, 1.0);
  const Eigen::VectorXd& shape = xi_side ? tangent.psi.values() : tangent.phi.values();
  Alignment a;
  a.angle_deg = std::acos(c) * 180.0 / std::numbers::pi;
  a.amplitude = amplitude;
  a.shape_deviation = (emerging / amplitude - shape).lpNorm<Eigen::Infinity>();
  a.param = xi_side ? point.xi : point.eta;
  return a;
}

Alignment tangent_alignment(const Branch& branch, const KernelTangent& tangent,
                            const Field& base, double amplitude) {
  if (!(amplitude > 0.0)) throw ValidationError("target amplitude must be positive");
  const bool xi_side = tangent.parameter == ContinuationParameter::xi;
  const BranchPoint* best = nullptr;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& pt : branch.points) {
    const double a = xi_side ? pt.state.v.max_norm() : pt.state.u.max_norm();
    if (!(a > 0.0)) continue;
    const double gap = std::abs(std::log(a / amplitude));
    if (gap < best_gap) {
      best_gap = gap;
      best = &pt;
    }
  }
  if (best == nullptr) {
    throw ValidationError("no branch point with nonzero amplitude");
  }
  return tangent_alignment(best->state, tangent, base);
}

}  // namespace holltan
