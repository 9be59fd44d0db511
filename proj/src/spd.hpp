#pragma once

#include <string>

#include <Eigen/SparseCholesky>

#include "holltan/errors.hpp"

namespace holltan::detail {

// LDL^T factorization that doubles as a positive-definiteness test: a
// symmetric matrix is SPD iff every pivot of D is positive.
class SpdFactor {
 public:
  SpdFactor(const Eigen::SparseMatrix<double>& m, const std::string& what) {
    ldlt_.compute(m);
    if (ldlt_.info() != Eigen::Success || !(ldlt_.vectorD().minCoeff() > 0.0)) {
      throw SolverError(SolverFailure::indefinite_operator,
                        what + " is not positive definite");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return ldlt_.solve(rhs); }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace holltan::detail
