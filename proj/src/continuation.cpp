#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "holltan/coexist.hpp"
#include "state_vector.hpp"

namespace holltan {
namespace {

struct Augmented {
  Eigen::VectorXd x;
  double param = 0.0;
};

enum class CorrectorStatus { converged, failed, left_cone };

struct Corrected {
  CorrectorStatus status = CorrectorStatus::failed;
  Augmented z;
  double residual = 0.0;
  int iterations = 0;
};

class Corrector {
 public:
  Corrector(const Grid& grid, const ModelParams& params, const ContinuationOptions& opts)
      : n_(grid.size()),
        weight_(1.0 / static_cast<double>(grid.size())),
        lap_(dirichlet_laplacian(grid).matrix),
        params_(params),
        opts_(opts) {}

  double weight() const { return weight_; }

  double eta(const Augmented& z, double fixed) const {
    return opts_.parameter == ContinuationParameter::eta ? z.param : fixed;
  }
  double xi(const Augmented& z, double fixed) const {
    return opts_.parameter == ContinuationParameter::xi ? z.param : fixed;
  }

  Eigen::VectorXd residual(const Augmented& z, double fixed) const {
    return detail::residual_vector(lap_, z.x, eta(z, fixed), xi(z, fixed), params_);
  }

  // Newton on [F(x, p); <t, z - anchor>_w - ds] = 0 starting from the predictor.
  Corrected correct(Augmented z, const Augmented& anchor, const Augmented& tangent,
                    double ds, double fixed) const {
    const Eigen::Index dim = 2 * n_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Corrected out;
    for (int it = 0; it <= opts_.max_newton_iterations; ++it) {
      if (!detail::holling_defined(z.x, n_, params_.m)) return out;
      const Eigen::VectorXd f = residual(z, fixed);
      const double arc = weight_ * tangent.x.dot(z.x - anchor.x) +
                         tangent.param * (z.param - anchor.param) - ds;
      const double norm = std::max(f.lpNorm<Eigen::Infinity>(), std::abs(arc));
      if (!std::isfinite(norm)) return out;
      if (norm <= opts_.newton_tol) {
        out.z = std::move(z);
        out.residual = f.lpNorm<Eigen::Infinity>();
        out.iterations = it;
        out.status = out.z.x.minCoeff() < -opts_.negative_tolerance
                         ? CorrectorStatus::left_cone
                         : CorrectorStatus::converged;
        return out;
      }
      if (it == opts_.max_newton_iterations) return out;

      const Eigen::SparseMatrix<double> jac = detail::jacobian_matrix(
          lap_, z.x, eta(z, fixed), xi(z, fixed), params_);
      std::vector<Eigen::Triplet<double>> t;
      t.reserve(jac.nonZeros() + 2 * dim + 1);
      for (int k = 0; k < jac.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator e(jac, k); e; ++e) {
          t.emplace_back(e.row(), e.col(), e.value());
        }
      }
      // dF/dp: (0, -V) for xi, (-U, 0) for eta.
      const bool on_xi = opts_.parameter == ContinuationParameter::xi;
      for (Eigen::Index i = 0; i < n_; ++i) {
        const Eigen::Index row = on_xi ? n_ + i : i;
        const double value = -z.x[row];
        if (value != 0.0) t.emplace_back(row, dim, value);
      }
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (tangent.x[i] != 0.0) t.emplace_back(dim, i, weight_ * tangent.x[i]);
      }
      if (tangent.param != 0.0) t.emplace_back(dim, dim, tangent.param);

      Eigen::SparseMatrix<double> bordered(dim + 1, dim + 1);
      bordered.setFromTriplets(t.begin(), t.end());
      bordered.makeCompressed();
      lu.compute(bordered);
      if (lu.info() != Eigen::Success) return out;

      Eigen::VectorXd rhs(dim + 1);
      rhs << -f, -arc;
      const Eigen::VectorXd step = lu.solve(rhs);
      if (!step.allFinite()) return out;
      z.x += step.head(dim);
      z.param += step[dim];
    }
    return out;
  }

  double norm(const Augmented& z) const {
    return std::sqrt(weight_ * z.x.squaredNorm() + z.param * z.param);
  }

 private:
  Eigen::Index n_;
  double weight_;
  Eigen::SparseMatrix<double> lap_;
  const ModelParams& params_;
  const ContinuationOptions& opts_;
};

void validate(const ContinuationOptions& o) {
  if (!(o.initial_step > 0.0) || !(o.min_step > 0.0) || !(o.max_step >= o.initial_step)) {
    throw ValidationError("continuation steps need 0 < min_step, 0 < initial_step <= max_step");
  }
  if (o.max_points < 1) throw ValidationError("max_points must be at least 1");
  if (!(o.window.lo < o.window.hi)) throw ValidationError("parameter window is empty");
  if (!(o.newton_tol > 0.0)) throw ValidationError("Newton tolerance must be positive");
}

}  // namespace

Branch continue_branch(const SteadyState& start, const ModelParams& params,
                       const Direction& direction, const ContinuationOptions& options) {
  validate(options);
  if (!(start.u.grid() == start.v.grid()) || !(direction.u.grid() == start.u.grid()) ||
      !(direction.v.grid() == start.u.grid())) {
    throw ValidationError("start state and direction live on different grids");
  }
  const Grid& grid = start.u.grid();
  const bool on_xi = options.parameter == ContinuationParameter::xi;
  const double fixed = on_xi ? start.eta : start.xi;
  const Corrector corrector(grid, params, options);

  Augmented current{detail::stack(start), on_xi ? start.xi : start.eta};
  Augmented tangent{detail::stack(direction.u.values(), direction.v.values()),
                    direction.param};
  const double tnorm = corrector.norm(tangent);
  if (!(tnorm > 0.0)) throw ValidationError("continuation direction is zero");
  tangent.x /= tnorm;
  tangent.param /= tnorm;

  Branch branch;
  branch.kind = options.kind;
  branch.parameter = options.parameter;
  if (options.include_start) {
    branch.points.push_back(
        {start, corrector.residual(current, fixed).lpNorm<Eigen::Infinity>(), 0});
  }

  double ds = options.initial_step;
  bool left_cone = false;
  double last_residual = 0.0;
  while (static_cast<int>(branch.points.size()) < options.max_points) {
    Augmented predicted{current.x + ds * tangent.x, current.param + ds * tangent.param};
    Corrected c = corrector.correct(std::move(predicted), current, tangent, ds, fixed);
    if (c.status != CorrectorStatus::converged) {
      left_cone = left_cone || c.status == CorrectorStatus::left_cone;
      ds *= 0.5;
      if (ds < options.min_step) {
        if (left_cone) {
          branch.stop = StopReason::positivity_lost;
          return branch;
        }
        throw ContinuationError("no corrector convergence down to the minimum step",
                                last_residual, std::move(branch));
      }
      continue;
    }
    left_cone = false;
    if (!options.window.contains(c.z.param)) {
      branch.stop = StopReason::window_edge;
      return branch;
    }
    last_residual = c.residual;
    const double eta = on_xi ? fixed : c.z.param;
    const double xi = on_xi ? c.z.param : fixed;
    branch.points.push_back({detail::unstack(grid, c.z.x, eta, xi), c.residual, c.iterations});

    Augmented secant{c.z.x - current.x, c.z.param - current.param};
    const double snorm = corrector.norm(secant);
    tangent = {secant.x / snorm, secant.param / snorm};
    current = std::move(c.z);

    if (c.iterations <= 3) {
      ds = std::min(1.5 * ds, options.max_step);
    } else if (c.iterations > 6) {
      ds = std::max(0.7 * ds, options.min_step);
    }
  }
  branch.stop = StopReason::max_points;
  return branch;
}

Branch trace_coexistence_xi(const ModelParams& params, const Field& u_eta,
                            const KernelTangent& tangent, ContinuationOptions options) {
  if (tangent.parameter != ContinuationParameter::xi) {
    throw ValidationError("trace_coexistence_xi needs an xi kernel tangent");
  }
  const Grid& grid = u_eta.grid();
  const SteadyState start{u_eta, Field::zeros(grid), params.eta, tangent.critical_param};
  const Direction dir{Field(grid, -tangent.phi.values()), tangent.psi, 0.0};
  options.parameter = ContinuationParameter::xi;
  options.kind = BranchKind::coexistence;
  options.include_start = false;
  return continue_branch(start, params, dir, options);
}

Branch trace_coexistence_eta(const ModelParams& params, const Field& v_xi,
                             const KernelTangent& tangent, ContinuationOptions options) {
  if (tangent.parameter != ContinuationParameter::eta) {
    throw ValidationError("trace_coexistence_eta needs an eta kernel tangent");
  }
  const Grid& grid = v_xi.grid();
  const SteadyState start{Field::zeros(grid), v_xi, tangent.critical_param, params.xi};
  const Direction dir{tangent.phi, tangent.psi, 0.0};
  options.parameter = ContinuationParameter::eta;
  options.kind = BranchKind::coexistence;
  options.include_start = false;
  return continue_branch(start, params, dir, options);
}

}  // namespace holltan
