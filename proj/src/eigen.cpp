#include "holltan/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "holltan/errors.hpp"
#include "spd.hpp"

namespace holltan {
namespace {

constexpr int kMaxInverseIterations = 5000;
constexpr int kStagnationWindow = 20;

Eigen::SparseMatrix<double> plus_diagonal(const Eigen::SparseMatrix<double>& m,
                                          const Eigen::VectorXd& d) {
  Eigen::SparseMatrix<double> out = m;
  for (Eigen::Index i = 0; i < d.size(); ++i) out.coeffRef(i, i) += d[i];
  out.makeCompressed();
  return out;
}

// Smallest sigma >= 0 making m + (sigma) I strictly diagonally dominant with
// margin 1, by Gershgorin.
double gershgorin_shift(const Eigen::SparseMatrix<double>& m) {
  Eigen::VectorXd off = Eigen::VectorXd::Zero(m.rows());
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      if (it.row() == it.col()) {
        diag[it.row()] += it.value();
      } else {
        off[it.row()] += std::abs(it.value());
      }
    }
  }
  return std::max(0.0, (off - diag).maxCoeff()) + 1.0;
}

double max_abs_row_sum(const Eigen::SparseMatrix<double>& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      rows[it.row()] += std::abs(it.value());
    }
  }
  return rows.maxCoeff();
}

}  // namespace

EigenPair principal_eigenpair(const Grid& grid,
                              const Eigen::SparseMatrix<double>& op, double tol) {
  if (!(tol > 0.0)) throw ValidationError("eigen tolerance must be positive");
  if (op.rows() != grid.size() || op.cols() != grid.size()) {
    throw ValidationError("operator size does not match the grid");
  }

  const double sigma = gershgorin_shift(op);
  Eigen::SparseMatrix<double> shifted =
      plus_diagonal(op, Eigen::VectorXd::Constant(op.rows(), sigma));
  const detail::SpdFactor factor(shifted, "shifted eigen operator");

  // Roundoff floor of the residual evaluation itself.
  const double floor =
      100.0 * std::numeric_limits<double>::epsilon() * max_abs_row_sum(op);

  Eigen::VectorXd x = Eigen::VectorXd::Ones(op.rows());
  double lambda = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  double best = residual;
  int since_best = 0;
  std::vector<double> trace;

  int it = 0;
  for (; it < kMaxInverseIterations; ++it) {
    Eigen::VectorXd y = factor.solve(x);
    const Eigen::Index imax = [&] {
      Eigen::Index i;
      y.cwiseAbs().maxCoeff(&i);
      return i;
    }();
    x = y / y[imax];
    const Eigen::VectorXd ox = op * x;
    lambda = x.dot(ox) / x.squaredNorm();
    residual = (ox - lambda * x).lpNorm<Eigen::Infinity>();
    trace.push_back(residual);
    if (residual <= tol) break;
    if (residual < 0.5 * best) {
      best = residual;
      since_best = 0;
    } else if (++since_best >= kStagnationWindow && best <= floor) {
      break;
    }
  }
  if (it == kMaxInverseIterations) {
    throw SolverError(SolverFailure::iteration_limit,
                      "inverse iteration did not reach tolerance", residual,
                      std::move(trace));
  }
  if (!(x.minCoeff() > 0.0)) {
    throw SolverError(SolverFailure::sign_change,
                      "principal eigenvector is not strictly positive", residual);
  }
  return EigenPair{lambda, Field(grid, std::move(x)), residual, it + 1};
}

EigenPair principal_eigenpair(const Grid& grid, const Field& potential, double tol) {
  if (!(potential.grid() == grid)) {
    throw ValidationError("potential lives on a different grid");
  }
  return principal_eigenpair(
      grid, plus_diagonal(dirichlet_laplacian(grid).matrix, potential.values()), tol);
}

double discrete_dirichlet_eigenvalue(const Grid& grid) {
  double lambda = 0.0;
  for (int axis = 0; axis < grid.dimension(); ++axis) {
    const double h = grid.h(axis);
    const auto [lo, hi] = grid.bounds(axis);
    lambda += 2.0 / (h * h) * (1.0 - std::cos(std::numbers::pi * h / (hi - lo)));
  }
  return lambda;
}

Field resolvent_apply(const Grid& grid, double shift, const Field& f) {
  if (!(shift > -discrete_dirichlet_eigenvalue(grid))) {
    throw ValidationError("resolvent shift " + std::to_string(shift) +
                          " does not exceed -lambda_1");
  }
  return shifted_resolvent_apply(grid, Field::zeros(grid), shift, f);
}

Field shifted_resolvent_apply(const Grid& grid, const Field& potential,
                              double shift, const Field& f) {
  if (!(potential.grid() == grid) || !(f.grid() == grid)) {
    throw ValidationError("resolvent arguments live on different grids");
  }
  if (!std::isfinite(shift)) throw ValidationError("resolvent shift must be finite");
  const Eigen::VectorXd diag = potential.values().array() + shift;
  const detail::SpdFactor factor(
      plus_diagonal(dirichlet_laplacian(grid).matrix, diag), "shifted resolvent operator");
  return Field(grid, factor.solve(f.values()));
}

}  // namespace holltan
