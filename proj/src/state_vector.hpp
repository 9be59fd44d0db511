#pragma once

#include <Eigen/Core>

#include "holltan/coexist.hpp"

namespace holltan::detail {

inline Eigen::VectorXd stack(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  Eigen::VectorXd x(u.size() + v.size());
  x << u, v;
  return x;
}

inline Eigen::VectorXd stack(const SteadyState& s) {
  return stack(s.u.values(), s.v.values());
}

inline SteadyState unstack(const Grid& grid, const Eigen::VectorXd& x, double eta,
                           double xi) {
  const Eigen::Index n = grid.size();
  return SteadyState{Field(grid, x.head(n)), Field(grid, x.tail(n)), eta, xi};
}

// Residual and Jacobian on raw stacked vectors; the public wrappers validate.
Eigen::VectorXd residual_vector(const Eigen::SparseMatrix<double>& lap,
                                const Eigen::VectorXd& x, double eta, double xi,
                                const ModelParams& p);

Eigen::SparseMatrix<double> jacobian_matrix(const Eigen::SparseMatrix<double>& lap,
                                            const Eigen::VectorXd& x, double eta,
                                            double xi, const ModelParams& p);

// Holling denominators 1 + m U stay positive.
inline bool holling_defined(const Eigen::VectorXd& x, Eigen::Index n, double m) {
  return (1.0 + m * x.head(n).array()).minCoeff() > 0.0;
}

}  // namespace holltan::detail
