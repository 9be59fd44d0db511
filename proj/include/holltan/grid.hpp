#pragma once

#include <array>
#include <functional>
#include <span>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace holltan {

/// Uniform tensor grid over a 1D interval or 2D rectangle with homogeneous
/// Dirichlet boundary. Only interior nodes are stored; node index is
/// `i + n[0] * j` (x fastest).
class Grid {
 public:
  struct Interval {
    double lo;
    double hi;
    friend bool operator==(const Interval&, const Interval&) = default;
  };

  int dimension() const noexcept { return dimension_; }
  Interval bounds(int axis) const { return bounds_.at(axis); }
  int n(int axis) const { return n_.at(axis); }
  double h(int axis) const { return h_.at(axis); }

  /// Number of interior nodes (product over axes).
  Eigen::Index size() const noexcept;
  /// Area element of one node in the zero-extended trapezoidal rule.
  double cell_volume() const noexcept;

  /// Coordinate of interior node `index` along `axis`.
  double coordinate(Eigen::Index index, int axis) const;

  /// Samples `f` at every interior node; the 1D form ignores y.
  Eigen::VectorXd sample(const std::function<double(double, double)>& f) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  friend Grid build_grid(int, std::span<const Interval>, std::span<const int>);

  int dimension_ = 1;
  std::array<Interval, 2> bounds_{};
  std::array<int, 2> n_{1, 1};
  std::array<double, 2> h_{1.0, 1.0};
};

/// Rejects dimension outside {1,2}, fewer than 3 interior nodes per axis,
/// and degenerate or inverted bounds.
Grid build_grid(int dimension, std::span<const Grid::Interval> bounds,
                std::span<const int> n);

/// Convenience overloads for the unit interval / box cases.
Grid build_grid_1d(double lo, double hi, int n);
Grid build_grid_2d(Grid::Interval x, Grid::Interval y, int nx, int ny);

/// A real function sampled on the interior nodes of a grid.
class Field {
 public:
  Field(Grid grid, Eigen::VectorXd values);

  static Field zeros(const Grid& grid);
  static Field constant(const Grid& grid, double value);
  static Field sample(const Grid& grid,
                      const std::function<double(double, double)>& f);

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

  double max_norm() const { return values_.lpNorm<Eigen::Infinity>(); }
  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

/// Square sparse operator on the interior nodes.
struct LinearOperator {
  Eigen::SparseMatrix<double> matrix;
  bool symmetric = false;
};

/// Five-point (three-point in 1D) central-difference discretization of
/// -Laplacian with zero boundary values eliminated.
LinearOperator dirichlet_laplacian(const Grid& grid);

/// Zero-extended composite trapezoidal rule over the domain.
double integrate(const Field& field);
double integrate(const Grid& grid, const Eigen::VectorXd& values);

/// Quadrature-weighted L2 inner product.
double inner(const Grid& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Throws ValidationError unless `values` matches the grid size and is finite.
void require_on_grid(const Grid& grid, const Eigen::VectorXd& values,
                     const char* what);

}  // namespace holltan
