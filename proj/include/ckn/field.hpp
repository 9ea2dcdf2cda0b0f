#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ckn/grid.hpp"

namespace ckn {

/// Nodal values of a function u(s, phi) on a CylinderGrid, s-major.
///
/// Fields are value types; the grid is shared and immutable.
class Field {
 public:
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<double> values);

  /// Samples f(s, phi) at every node.
  static Field sample(GridPtr grid, const std::function<double(double, double)>& f);

  const CylinderGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator()(int i, int j) const { return values_[grid_->index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_->index(i, j)]; }

  Field& operator*=(double c);
  Field scaled(double c) const;

  /// Zeroes the Dirichlet rows and copies the neighbouring column into the
  /// pole columns.
  void apply_boundary_conditions();

  double max_abs() const;
  double min_value() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

}  // namespace ckn
