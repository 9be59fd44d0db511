#include "holltan/grid.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "holltan/errors.hpp"

namespace holltan {

Grid build_grid(int dimension, std::span<const Grid::Interval> bounds,
                std::span<const int> n) {
  if (dimension != 1 && dimension != 2) {
    throw ValidationError("grid dimension must be 1 or 2, got " +
                          std::to_string(dimension));
  }
  if (bounds.size() != static_cast<std::size_t>(dimension) ||
      n.size() != static_cast<std::size_t>(dimension)) {
    throw ValidationError("grid needs one interval and one node count per axis");
  }
  Grid g;
  g.dimension_ = dimension;
  for (int axis = 0; axis < dimension; ++axis) {
    const auto [lo, hi] = bounds[axis];
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw ValidationError("grid bounds on axis " + std::to_string(axis) +
                            " must satisfy lo < hi");
    }
    if (n[axis] < 3) {
      throw ValidationError("grid needs at least 3 interior nodes per axis, got " +
                            std::to_string(n[axis]));
    }
    g.bounds_[axis] = bounds[axis];
    g.n_[axis] = n[axis];
    g.h_[axis] = (hi - lo) / (n[axis] + 1);
  }
  return g;
}

Grid build_grid_1d(double lo, double hi, int n) {
  const Grid::Interval b[] = {{lo, hi}};
  const int counts[] = {n};
  return build_grid(1, b, counts);
}

Grid build_grid_2d(Grid::Interval x, Grid::Interval y, int nx, int ny) {
  const Grid::Interval b[] = {x, y};
  const int counts[] = {nx, ny};
  return build_grid(2, b, counts);
}

Eigen::Index Grid::size() const noexcept {
  return dimension_ == 1 ? Eigen::Index{n_[0]}
                         : Eigen::Index{n_[0]} * Eigen::Index{n_[1]};
}

double Grid::cell_volume() const noexcept {
  return dimension_ == 1 ? h_[0] : h_[0] * h_[1];
}

double Grid::coordinate(Eigen::Index index, int axis) const {
  if (axis >= dimension_) return 0.0;
  const Eigen::Index i = axis == 0 ? index % n_[0] : index / n_[0];
  return bounds_[axis].lo + static_cast<double>(i + 1) * h_[axis];
}

Eigen::VectorXd Grid::sample(const std::function<double(double, double)>& f) const {
  Eigen::VectorXd out(size());
  for (Eigen::Index k = 0; k < size(); ++k) {
    out[k] = f(coordinate(k, 0), coordinate(k, 1));
  }
  return out;
}

void require_on_grid(const Grid& grid, const Eigen::VectorXd& values,
                     const char* what) {
  if (values.size() != grid.size()) {
    throw ValidationError(std::string(what) + ": expected " +
                          std::to_string(grid.size()) + " values, got " +
                          std::to_string(values.size()));
  }
  if (!values.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite value");
  }
}

Field::Field(Grid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require_on_grid(grid_, values_, "field");
}

Field Field::zeros(const Grid& grid) {
  return Field(grid, Eigen::VectorXd::Zero(grid.size()));
}

Field Field::constant(const Grid& grid, double value) {
  return Field(grid, Eigen::VectorXd::Constant(grid.size(), value));
}

Field Field::sample(const Grid& grid,
                    const std::function<double(double, double)>& f) {
  return Field(grid, grid.sample(f));
}

LinearOperator dirichlet_laplacian(const Grid& grid) {
  const Eigen::Index size = grid.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(size) * (1 + 2 * grid.dimension()));

  const int nx = grid.n(0);
  const int ny = grid.dimension() == 2 ? grid.n(1) : 1;
  const double cx = 1.0 / (grid.h(0) * grid.h(0));
  const double cy = grid.dimension() == 2 ? 1.0 / (grid.h(1) * grid.h(1)) : 0.0;

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Eigen::Index k = i + Eigen::Index{nx} * j;
      triplets.emplace_back(k, k, 2.0 * cx + 2.0 * cy);
      if (i > 0) triplets.emplace_back(k, k - 1, -cx);
      if (i + 1 < nx) triplets.emplace_back(k, k + 1, -cx);
      if (grid.dimension() == 2) {
        if (j > 0) triplets.emplace_back(k, k - nx, -cy);
        if (j + 1 < ny) triplets.emplace_back(k, k + nx, -cy);
      }
    }
  }
  LinearOperator op;
  op.matrix.resize(size, size);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  op.symmetric = true;
  return op;
}

double integrate(const Grid& grid, const Eigen::VectorXd& values) {
  require_on_grid(grid, values, "integrand");
  // Boundary nodes carry zero, so the trapezoidal weights reduce to the cell volume.
  return grid.cell_volume() * values.sum();
}

double integrate(const Field& field) {
  return integrate(field.grid(), field.values());
}

double inner(const Grid& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return grid.cell_volume() * a.dot(b);
}

}  // namespace holltan
