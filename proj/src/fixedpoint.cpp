#include "ckn/fixedpoint.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <deque>
#include <sstream>

#include "ckn/error.hpp"
#include "ckn/model.hpp"

namespace ckn {
namespace {

Field difference(const Field& a, const Field& b) {
  Field out(a);
  auto o = out.values();
  const auto y = b.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] -= y[k];
  return out;
}

// a + c b, clamped at zero and renormalized in L^q.
Field clamped_combination(const Field& a, double c, const Field& b, double q) {
  Field out(a);
  auto o = out.values();
  const auto y = b.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = std::max(0.0, o[k] + c * y[k]);
  const double n = lp_norm(out, q);
  if (!(n > 0.0)) throw SolverError("potential combination vanished");
  out *= 1.0 / n;
  return out;
}

}  // namespace

Field potential_from(const Field& u) {
  const double p = u.grid().params().p;
  const double np = lp_norm(u, p);
  if (!(np > 0.0)) throw SolverError("potential_from: zero field");
  const double scale = std::pow(np, -(p - 2.0));
  Field V(u.grid_ptr());
  auto v = V.values();
  const auto x = u.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = scale * std::pow(std::abs(x[k]), p - 2.0);
  return V;
}

Field rescale_to_eqmu(const Field& u, double kappa) {
  const double p = u.grid().params().p;
  const double np = lp_norm(u, p);
  if (!(np > 0.0)) throw SolverError("rescale_to_eqmu: zero field");
  const double c = std::pow(kappa, 1.0 / (p - 2.0)) / np;
  return u.scaled(c);
}

double critical_value(const Field& u_eq) {
  const double p = u_eq.grid().params().p;
  return std::pow(lp_norm(u_eq, p), p - 2.0);
}

double eqmu_residual(const Field& u, double mu, std::shared_ptr<const SparseMatrix> stiffness) {
  const double p = u.grid().params().p;
  Field multiplier(u.grid_ptr());
  auto m = multiplier.values();
  const auto x = u.values();
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = mu - std::pow(std::abs(x[k]), p - 2.0);
  const DiscreteOperator op = assemble_schrodinger(multiplier, std::move(stiffness));
  const Vector ux = op.gather(u);
  const Vector r = op.form() * ux;
  return std::sqrt(r.cwiseProduct(r).cwiseQuotient(op.mass()).sum());
}

FixedPointResult roothan_solve(double kappa, const Field& V0, const FixedPointOptions& options,
                               const Field* warm_start,
                               std::shared_ptr<const SparseMatrix> stiffness) {
  if (!(kappa > 0.0)) throw DomainError("roothan_solve: kappa must be positive");
  if (!(options.mixing > 0.0 && options.mixing <= 1.0))
    throw DomainError("roothan_solve: mixing must lie in (0, 1]");
  if (options.anderson_depth < 0) throw DomainError("roothan_solve: negative Anderson depth");
  const GridPtr& grid = V0.grid_ptr();
  const double q = grid->params().q();
  if (!stiffness) stiffness = stiffness_matrix(*grid);

  FixedPointResult res(grid);
  res.kappa = kappa;

  auto solve = [&](const Field& V, const Field& warm) {
    EigenResult e = lowest_eigenpair(kappa, V, options.eigen, &warm, stiffness);
    res.eigen_iterations += e.iterations;
    return e;
  };

  // Anderson history in the weighted L^2 geometry: iterates V_k and their
  // images T(V_k), stored as sqrt(w)-scaled vectors.
  const auto w = grid->quad_weights();
  Vector sqrt_w(static_cast<Eigen::Index>(w.size()));
  for (std::size_t k = 0; k < w.size(); ++k) sqrt_w[static_cast<Eigen::Index>(k)] = std::sqrt(w[k]);
  auto as_vector = [&](const Field& f) {
    return Vector(Eigen::Map<const Vector>(f.values().data(), sqrt_w.size()).cwiseProduct(sqrt_w));
  };
  std::deque<Vector> hist_f;
  std::deque<Vector> hist_g;
  std::deque<Field> hist_image;

  Field V = V0;
  std::optional<EigenResult> pending;
  Field warm = warm_start != nullptr ? *warm_start : V0;
  double lambda_prev = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= options.max_iter; ++it) {
    EigenResult eig = pending ? std::move(*pending) : solve(V, warm);
    pending.reset();
    const double lambda = eig.lambda;
    if (lambda > lambda_prev + options.monotone_slack * std::max(1.0, std::abs(lambda_prev))) {
      std::ostringstream os;
      os.precision(17);
      os << "roothan_solve: lambda increased from " << lambda_prev << " to " << lambda
         << " at iteration " << it;
      throw SolverError(os.str());
    }
    res.lambda_history.push_back(lambda);
    res.iterations = it;

    Field image = potential_from(eig.u);
    const double dv = lp_norm(difference(image, V), q);
    const bool lambda_ok =
        std::abs(lambda - lambda_prev) <= options.lambda_tol * (1.0 + std::abs(lambda_prev));
    warm = eig.u;
    res.u = std::move(eig.u);
    res.self_consistency = dv;
    if (lambda_ok && dv <= options.potential_tol) {
      res.converged = true;
      break;
    }
    lambda_prev = lambda;

    Field plain = options.mixing < 1.0
                      ? clamped_combination(V, options.mixing, difference(image, V), q)
                      : image;
    if (options.anderson_depth == 0) {
      V = std::move(plain);
      continue;
    }

    const Vector g = as_vector(plain);
    const Vector f = g - as_vector(V);
    std::optional<Field> accelerated;
    if (!hist_f.empty()) {
      const auto m = static_cast<Eigen::Index>(hist_f.size());
      Eigen::MatrixXd dF(f.size(), m);
      Eigen::MatrixXd dG(g.size(), m);
      for (Eigen::Index c = 0; c < m; ++c) {
        dF.col(c) = f - hist_f[static_cast<std::size_t>(c)];
        dG.col(c) = g - hist_g[static_cast<std::size_t>(c)];
      }
      const Vector gamma = dF.colPivHouseholderQr().solve(f);
      if (gamma.allFinite()) {
        Field cand(grid);
        auto cv = cand.values();
        const Vector mixed = g - dG * gamma;
        for (Eigen::Index k = 0; k < mixed.size(); ++k)
          cv[static_cast<std::size_t>(k)] = sqrt_w[k] > 0.0 ? mixed[k] / sqrt_w[k] : plain.values()[static_cast<std::size_t>(k)];
        accelerated = clamped_combination(cand, 0.0, cand, q);
      }
    }
    hist_f.push_front(f);
    hist_g.push_front(g);
    if (static_cast<int>(hist_f.size()) > options.anderson_depth) {
      hist_f.pop_back();
      hist_g.pop_back();
    }

    if (accelerated) {
      EigenResult trial = solve(*accelerated, warm);
      if (trial.lambda <= lambda) {
        V = std::move(*accelerated);
        pending = std::move(trial);
        ++res.accelerated_steps;
        continue;
      }
      hist_f.clear();
      hist_g.clear();
    }
    V = std::move(plain);
  }

  res.V = V;
  res.mu = -res.lambda_history.back();
  res.positive_mu = res.mu > 0.0;
  if (!res.converged) {
    std::ostringstream os;
    os << "roothan_solve: no self-consistent potential after " << options.max_iter
       << " iterations at kappa=" << kappa << " (||dV||_q = " << res.self_consistency << ")";
    throw ConvergenceError(os.str());
  }
  res.u_eq = rescale_to_eqmu(res.u, kappa);
  res.residual = res.positive_mu ? eqmu_residual(res.u_eq, res.mu, stiffness) : INFINITY;
  return res;
}

}  // namespace ckn
