#pragma once

#include <memory>
#include <optional>

#include <Eigen/Sparse>

#include "ckn/field.hpp"

namespace ckn {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Stiffness matrix of the Dirichlet form int |grad u|^2 on the active
/// unknowns of a grid (symmetric, positive semi-definite).
std::shared_ptr<const SparseMatrix> stiffness_matrix(const CylinderGrid& grid);

/// The weighted operator -Delta - kappa V restricted to the active unknowns.
///
/// Stored as the symmetric form matrix A = K - kappa M diag(V) together with
/// the diagonal mass M, so that <u, Hv>_w = u^T A v.
class DiscreteOperator {
 public:
  DiscreteOperator(GridPtr grid, std::shared_ptr<const SparseMatrix> stiffness,
                   const Vector& potential_diagonal);

  const CylinderGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const SparseMatrix& form() const { return form_; }
  const Vector& mass() const { return mass_; }
  std::size_t size() const { return static_cast<std::size_t>(mass_.size()); }

  /// Lower bound of the spectrum, -max(kappa V).
  double spectral_lower_bound() const { return lower_bound_; }

  Vector gather(const Field& u) const;
  Field scatter(const Vector& x) const;

  /// Hu as a field (zero on Dirichlet rows, pole columns copied).
  Field apply(const Field& u) const;
  /// <u, Hv> in the weighted inner product.
  double bilinear(const Field& u, const Field& v) const;

 private:
  GridPtr grid_;
  SparseMatrix form_;
  Vector mass_;
  double lower_bound_;
};

/// Assembles -Delta - kappa V. `stiffness` may be passed to reuse a
/// previously built Laplacian of the same grid.
DiscreteOperator assemble_operator(double kappa, const Field& V,
                                   std::shared_ptr<const SparseMatrix> stiffness = nullptr);

/// Operator -Delta + W for an arbitrary nodal multiplier W.
DiscreteOperator assemble_schrodinger(const Field& multiplier,
                                      std::shared_ptr<const SparseMatrix> stiffness = nullptr);

struct EigenOptions {
  double tol = 1e-9;
  int max_iter = 400;
  double shift_offset = 0.5;
  /// Tolerance on | ||V||_q - 1 |; negative disables the check.
  double potential_norm_tol = 1e-8;
};

struct EigenResult {
  double lambda = 0.0;
  Field u;
  int iterations = 0;
  double residual = 0.0;
};

/// Ground state of an assembled operator by shifted inverse iteration.
/// The shift is placed below the warm start's Rayleigh quotient and moved
/// further down until the LDL^T factorization is positive definite, so the
/// iteration always targets the lowest eigenvalue.
EigenResult lowest_eigenpair(const DiscreteOperator& op, const EigenOptions& options = {},
                             const Field* warm_start = nullptr);

/// Ground state of -Delta - kappa V; requires kappa >= 0, V >= 0, ||V||_q = 1.
EigenResult lowest_eigenpair(double kappa, const Field& V, const EigenOptions& options = {},
                             const Field* warm_start = nullptr,
                             std::shared_ptr<const SparseMatrix> stiffness = nullptr);

}  // namespace ckn
