#include "ckn/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/SparseCholesky>

#include "ckn/error.hpp"
#include "ckn/model.hpp"

namespace ckn {

std::shared_ptr<const SparseMatrix> stiffness_matrix(const CylinderGrid& g) {
  const auto s = g.s_nodes();
  const auto sw = g.s_weights();
  const auto pw = g.phi_weights();
  const auto cond = g.phi_conductance();
  const auto n = static_cast<Eigen::Index>(g.active_count());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * 5);
  auto couple = [&](long a, long b, double c) {
    // Edge energy c (u_a - u_b)^2; a Dirichlet or pole end contributes only
    // its diagonal part (pole values are slaved, so those edges are skipped).
    if (a >= 0) trips.emplace_back(a, a, c);
    if (b >= 0) trips.emplace_back(b, b, c);
    if (a >= 0 && b >= 0) {
      trips.emplace_back(a, b, -c);
      trips.emplace_back(b, a, -c);
    }
  };
  for (int i = 0; i + 1 < g.n_s(); ++i) {
    const double inv_h = 1.0 / (s[i + 1] - s[i]);
    for (int j = 1; j + 1 < g.n_phi(); ++j)
      couple(g.active_index(i, j), g.active_index(i + 1, j), pw[j] * inv_h);
  }
  for (int i = 1; i + 1 < g.n_s(); ++i)
    for (int j = 1; j + 2 < g.n_phi(); ++j)
      couple(g.active_index(i, j), g.active_index(i, j + 1), sw[i] * cond[j]);

  auto K = std::make_shared<SparseMatrix>(n, n);
  K->setFromTriplets(trips.begin(), trips.end());
  K->makeCompressed();
  return K;
}

DiscreteOperator::DiscreteOperator(GridPtr grid, std::shared_ptr<const SparseMatrix> stiffness,
                                   const Vector& potential_diagonal)
    : grid_(std::move(grid)) {
  const auto w = grid_->quad_weights();
  const auto nodes = grid_->active_nodes();
  const auto n = static_cast<Eigen::Index>(nodes.size());
  if (!stiffness) stiffness = stiffness_matrix(*grid_);
  if (potential_diagonal.size() != n) throw InvalidSizeError("potential size mismatch");

  mass_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) mass_[k] = w[nodes[k]];

  form_ = *stiffness;
  lower_bound_ = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    form_.coeffRef(k, k) += mass_[k] * potential_diagonal[k];
    lower_bound_ = std::min(lower_bound_, potential_diagonal[k]);
  }
}

Vector DiscreteOperator::gather(const Field& u) const {
  const auto nodes = grid_->active_nodes();
  Vector x(static_cast<Eigen::Index>(nodes.size()));
  const auto v = u.values();
  for (std::size_t k = 0; k < nodes.size(); ++k) x[static_cast<Eigen::Index>(k)] = v[nodes[k]];
  return x;
}

Field DiscreteOperator::scatter(const Vector& x) const {
  Field u(grid_);
  auto v = u.values();
  const auto nodes = grid_->active_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) v[nodes[k]] = x[static_cast<Eigen::Index>(k)];
  u.apply_boundary_conditions();
  return u;
}

Field DiscreteOperator::apply(const Field& u) const {
  const Vector y = form_ * gather(u);
  return scatter(y.cwiseQuotient(mass_));
}

double DiscreteOperator::bilinear(const Field& u, const Field& v) const {
  return gather(u).dot(form_ * gather(v));
}

DiscreteOperator assemble_schrodinger(const Field& multiplier,
                                      std::shared_ptr<const SparseMatrix> stiffness) {
  const auto nodes = multiplier.grid().active_nodes();
  const auto m = multiplier.values();
  Vector diag(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) diag[static_cast<Eigen::Index>(k)] = m[nodes[k]];
  return DiscreteOperator(multiplier.grid_ptr(), std::move(stiffness), diag);
}

DiscreteOperator assemble_operator(double kappa, const Field& V,
                                   std::shared_ptr<const SparseMatrix> stiffness) {
  const auto nodes = V.grid().active_nodes();
  const auto v = V.values();
  Vector diag(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k)
    diag[static_cast<Eigen::Index>(k)] = -kappa * v[nodes[k]];
  return DiscreteOperator(V.grid_ptr(), std::move(stiffness), diag);
}

namespace {

double mass_norm(const Vector& x, const Vector& mass) {
  return std::sqrt(x.cwiseProduct(x).dot(mass));
}

// Factorizes A - sigma M and reports whether it is positive definite, which
// by Sylvester's law of inertia means sigma lies below the whole spectrum.
bool factor_below_spectrum(Eigen::SimplicialLDLT<SparseMatrix>& ldlt, const DiscreteOperator& op,
                           double sigma) {
  SparseMatrix shifted = op.form();
  for (Eigen::Index k = 0; k < shifted.rows(); ++k) shifted.coeffRef(k, k) -= sigma * op.mass()[k];
  ldlt.compute(shifted);
  if (ldlt.info() != Eigen::Success) return false;
  return ldlt.vectorD().minCoeff() > 0.0;
}

}  // namespace

EigenResult lowest_eigenpair(const DiscreteOperator& op, const EigenOptions& options,
                             const Field* warm_start) {
  const Vector& mass = op.mass();
  const SparseMatrix& A = op.form();

  Vector x;
  if (warm_start != nullptr) {
    x = op.gather(*warm_start).cwiseAbs();
    if (!(x.maxCoeff() > 0.0)) x.setOnes();
  } else {
    x.setOnes(static_cast<Eigen::Index>(op.size()));
  }
  x /= mass_norm(x, mass);

  const double floor_shift = op.spectral_lower_bound() - options.shift_offset;
  double sigma = floor_shift;
  if (warm_start != nullptr) sigma = std::max(floor_shift, x.dot(A * x) - options.shift_offset);

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  if (!factor_below_spectrum(ldlt, op, sigma)) {
    sigma = floor_shift;
    if (!factor_below_spectrum(ldlt, op, sigma))
      throw SolverError("lowest_eigenpair: factorization of the shifted operator failed");
  }

  EigenResult result{0.0, Field(op.grid_ptr()), 0, 0.0};
  for (int it = 1; it <= options.max_iter; ++it) {
    Vector y = ldlt.solve(mass.cwiseProduct(x));
    y /= mass_norm(y, mass);
    if (y.dot(mass) < 0.0) y = -y;
    const Vector Ay = A * y;
    const double lambda = y.dot(Ay);
    const Vector r = Ay - lambda * mass.cwiseProduct(y);
    const double res = std::sqrt(r.cwiseProduct(r).cwiseQuotient(mass).sum());
    x = std::move(y);
    result.lambda = lambda;
    result.iterations = it;
    result.residual = res;
    if (res <= options.tol) break;
  }
  if (result.residual > options.tol) {
    std::ostringstream os;
    os << "lowest_eigenpair: no convergence after " << options.max_iter
       << " iterations (residual " << result.residual << ")";
    throw ConvergenceError(os.str());
  }

  result.u = op.scatter(x);
  const double umax = result.u.max_abs();
  if (result.u.min_value() < -1e-8 * umax)
    throw SolverError("lowest_eigenpair: ground state changes sign");
  return result;
}

EigenResult lowest_eigenpair(double kappa, const Field& V, const EigenOptions& options,
                             const Field* warm_start,
                             std::shared_ptr<const SparseMatrix> stiffness) {
  if (kappa < 0.0) throw DomainError("lowest_eigenpair: kappa must be non-negative");
  if (V.min_value() < 0.0) throw DomainError("lowest_eigenpair: potential must be non-negative");
  if (options.potential_norm_tol >= 0.0 && kappa > 0.0) {
    const double nq = lp_norm(V, V.grid().params().q());
    if (std::abs(nq - 1.0) > options.potential_norm_tol) {
      std::ostringstream os;
      os << "lowest_eigenpair: potential not normalized (||V||_q = " << nq << ")";
      throw DomainError(os.str());
    }
  }
  const DiscreteOperator op = assemble_operator(kappa, V, std::move(stiffness));
  return lowest_eigenpair(op, options, warm_start);
}

}  // namespace ckn
