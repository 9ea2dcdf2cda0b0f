#pragma once

#include <memory>
#include <vector>

#include "ckn/eigensolver.hpp"
#include "ckn/field.hpp"

namespace ckn {

struct FixedPointOptions {
  int max_iter = 200;
  /// Relative eigenvalue change |lambda_{i+1} - lambda_i| <= tol (1 + |lambda_i|).
  double lambda_tol = 1e-12;
  /// Potential change || V_{i+1} - V_i ||_q.
  double potential_tol = 1e-9;
  /// Linear mixing factor beta in (0, 1]; 1 is the plain update.
  double mixing = 1.0;
  /// Depth of Anderson acceleration on V -> |u|^{p-2} / ||u||_p^{p-2};
  /// 0 disables it. An accelerated potential is used only when its
  /// eigenvalue does not exceed the current one, so lambda stays monotone.
  int anderson_depth = 5;
  /// Slack of the monotonicity assertion, relative to max(1, |lambda|).
  double monotone_slack = 1e-12;
  EigenOptions eigen{};
};

struct FixedPointResult {
  explicit FixedPointResult(const GridPtr& grid) : u(grid), u_eq(grid), V(grid) {}

  double kappa = 0.0;
  double mu = 0.0;
  Field u;     ///< unit L^2 ground state of -Delta - kappa V
  Field u_eq;  ///< rescaled solution of -Delta u + mu u = u^{p-1}
  Field V;     ///< converged potential, ||V||_q = 1
  std::vector<double> lambda_history;
  bool converged = false;
  bool positive_mu = false;
  int iterations = 0;
  int eigen_iterations = 0;
  int accelerated_steps = 0;
  /// || V - u^{p-2} / ||u||_p^{p-2} ||_q at exit.
  double self_consistency = 0.0;
  /// Discrete L^2 residual of -Delta u_eq + mu u_eq - u_eq^{p-1}.
  double residual = 0.0;
};

/// |u|^{p-2} / ||u||_p^{p-2}, the potential that maximizes int V u^2 on the
/// unit sphere of L^q.
Field potential_from(const Field& u);

/// Alternating eigen-solve / potential update at fixed kappa until the
/// potential is self-consistent. Throws ConvergenceError after max_iter
/// iterations and SolverError if lambda ever increases.
FixedPointResult roothan_solve(double kappa, const Field& V0, const FixedPointOptions& options = {},
                               const Field* warm_start = nullptr,
                               std::shared_ptr<const SparseMatrix> stiffness = nullptr);

/// c u with c^{p-2} = kappa / ||u||_p^{p-2}.
Field rescale_to_eqmu(const Field& u, double kappa);

/// ||u_eq||_p^{p-2} = Z^{(p-2)/p}.
double critical_value(const Field& u_eq);

/// Discrete L^2 residual of -Delta u + mu u - |u|^{p-2} u on the active nodes.
double eqmu_residual(const Field& u, double mu,
                     std::shared_ptr<const SparseMatrix> stiffness = nullptr);

}  // namespace ckn
