#pragma once

#include <Eigen/SparseCore>

#include "holltan/grid.hpp"

namespace holltan {

inline constexpr double kEigenTolerance = 1e-10;

/// Principal (smallest) eigenvalue of -Laplacian + diag(p) and its
/// eigenfunction, normalized to max-norm 1 and positive.
struct EigenPair {
  double lambda = 0.0;
  Field phi;
  double residual = 0.0;  // ||(A + diag(p)) phi - lambda phi||_inf
  int iterations = 0;
};

EigenPair principal_eigenpair(const Grid& grid, const Field& potential,
                              double tol = kEigenTolerance);

/// Same solver applied to an arbitrary symmetric operator with nonpositive
/// off-diagonal entries (e.g. a diagonal block of a Jacobian).
EigenPair principal_eigenpair(const Grid& grid,
                              const Eigen::SparseMatrix<double>& op,
                              double tol = kEigenTolerance);

/// Closed-form smallest eigenvalue of the discrete Dirichlet Laplacian on a box:
/// sum over axes of (2/h^2)(1 - cos(pi h / L)).
double discrete_dirichlet_eigenvalue(const Grid& grid);

/// Solves (shift I - Laplacian) x = f. Requires shift > -lambda_1(0).
Field resolvent_apply(const Grid& grid, double shift, const Field& f);

/// Solves (-Laplacian + diag(p) + shift I) x = f. Throws SolverError
/// (indefinite_operator) when the operator is not positive definite.
Field shifted_resolvent_apply(const Grid& grid, const Field& potential,
                              double shift, const Field& f);

}  // namespace holltan
