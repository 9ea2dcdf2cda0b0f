#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ckn/params.hpp"

namespace ckn {

/// Node grading of the tensor grid. Zero means uniform spacing.
///
/// `s_grading` clusters nodes towards s = 0 through s = L sinh(a x)/sinh(a),
/// `phi_grading` clusters nodes towards the pole phi = 0 through
/// phi = pi sinh(g x)/sinh(g). Both maps are smooth, so the difference
/// scheme keeps its second order.
struct GridGrading {
  double s_grading = 0.0;
  double phi_grading = 0.0;
};

/// Truncated cylinder [-L, L] x [0, pi] with the weighted quadrature of the
/// measure ds x (normalized) sin^{d-2}(phi) dphi.
///
/// Rows i = 0 and i = n_s - 1 carry homogeneous Dirichlet data. The pole
/// columns j = 0 and j = n_phi - 1 carry zero quadrature weight; their
/// values are slaved to the neighbouring column (zero-flux condition).
/// Unknowns of the discrete operator are the remaining "active" nodes.
class CylinderGrid {
 public:
  CylinderGrid(double L, int n_s, int n_phi, const ProblemParams& params, GridGrading grading);

  const ProblemParams& params() const { return params_; }
  double half_length() const { return L_; }
  int n_s() const { return n_s_; }
  int n_phi() const { return n_phi_; }
  std::size_t size() const { return static_cast<std::size_t>(n_s_) * n_phi_; }
  const GridGrading& grading() const { return grading_; }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_phi_ + j; }

  std::span<const double> s_nodes() const { return s_; }
  std::span<const double> phi_nodes() const { return phi_; }
  /// Trapezoidal weights in s; they sum to 2L.
  std::span<const double> s_weights() const { return s_weight_; }
  /// Angular weights including sin^{d-2}(phi) and the sphere normalization;
  /// they sum to the sphere mass. Zero at both poles.
  std::span<const double> phi_weights() const { return phi_weight_; }
  /// Conductance of the angular edge (j, j+1), same normalization as the
  /// angular weights. Pole edges have zero conductance.
  std::span<const double> phi_conductance() const { return phi_conductance_; }
  /// Product weights, s-major.
  std::span<const double> quad_weights() const { return weight_; }

  double sphere_mass() const { return sphere_mass_; }

  /// Number of unknowns of the discrete operator.
  std::size_t active_count() const { return active_.size(); }
  /// Flat node index of each unknown.
  std::span<const std::size_t> active_nodes() const { return active_; }
  /// Unknown number of a node, or -1 for Dirichlet and pole nodes.
  long active_index(int i, int j) const { return active_index_[index(i, j)]; }

 private:
  ProblemParams params_;
  double L_;
  int n_s_;
  int n_phi_;
  GridGrading grading_;
  double sphere_mass_;
  std::vector<double> s_, phi_, s_weight_, phi_weight_, phi_conductance_, weight_;
  std::vector<std::size_t> active_;
  std::vector<long> active_index_;
};

using GridPtr = std::shared_ptr<const CylinderGrid>;

/// Builds the tensor grid. Requires L > 0, n_s >= 16, n_phi >= 8.
GridPtr build_grid(double L, int n_s, int n_phi, const ProblemParams& params,
                   GridGrading grading = {});

/// Default truncation: 12 / sqrt(mu_min), never below 8.
double default_half_length(double mu_min);

}  // namespace ckn
