#include "ckn/symmetric.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ckn/eigensolver.hpp"
#include "ckn/error.hpp"
#include "ckn/model.hpp"

namespace ckn {

double SymmetricSolution::value(double s) const {
  return A * std::pow(std::cosh(b * s), -2.0 / (p - 2.0));
}

double SymmetricSolution::derivative(double s) const {
  return -2.0 / (p - 2.0) * b * std::tanh(b * s) * value(s);
}

double SymmetricSolution::second_derivative(double s) const {
  const double k = 2.0 / (p - 2.0);
  const double th = std::tanh(b * s);
  // u = A sech^k(bs): u'' = b^2 k (k th^2 - sech^2) u.
  return b * b * k * (k * th * th - (1.0 - th * th)) * value(s);
}

double SymmetricSolution::residual(double s) const {
  const double u = value(s);
  return -second_derivative(s) + mu * u - std::pow(u, p - 1.0);
}

SymmetricSolution soliton(double mu, double p) {
  if (!(mu > 0.0)) throw DomainError("soliton: mu must be positive");
  if (!(p > 2.0)) throw DomainError("soliton: p must exceed 2");
  return {mu, p, std::pow(0.5 * mu * p, 1.0 / (p - 2.0)), std::sqrt(mu) * (p - 2.0) / 2.0};
}

Norms soliton_norms(double mu, double p, int d, MeasureMode mode) {
  const SymmetricSolution u = soliton(mu, p);
  const double m = 2.0 * p / (p - 2.0);
  // int sech^m = sqrt(pi) Gamma(m/2) / Gamma((m+1)/2), in logs since m blows
  // up as p -> 2.
  const double log_im =
      0.5 * std::log(std::numbers::pi) + std::lgamma(0.5 * m) - std::lgamma(0.5 * (m + 1.0));
  const double mass = sphere_mass(d, mode);
  Norms n;
  n.Z = mass * std::exp(p * std::log(u.A) + log_im - std::log(u.b));
  n.X = n.Z * (p - 2.0) / (2.0 * p);
  n.Y = n.Z * (p + 2.0) / (2.0 * p * mu);
  return n;
}

double lambda1_H(double mu, double p, int d) { return d - 1.0 + mu - 0.25 * mu * p * p; }

double mu_FS(double p, int d) {
  if (!(p > 2.0)) throw DomainError("mu_FS: p must exceed 2");
  return 4.0 * (d - 1.0) / (p * p - 4.0);
}

double lambda_star(double p, int d) {
  if (!(p > 2.0)) throw DomainError("lambda_star: p must exceed 2");
  return (d - 1.0) * (6.0 - p) / (4.0 * (p - 2.0));
}

double soliton_t(double mu, double p) { return mu * (p - 2.0) / (p + 2.0); }

std::vector<SymmetricCurvePoint> symmetric_curve(std::span<const double> mus, double theta,
                                                 const ProblemParams& params) {
  std::vector<SymmetricCurvePoint> out;
  out.reserve(mus.size());
  for (double mu : mus) {
    if (!(mu > 0.0)) throw DomainError("symmetric_curve: mu must be positive");
    SymmetricCurvePoint pt;
    pt.mu = mu;
    pt.norms = soliton_norms(mu, params.p, params.d, params.measure_mode);
    pt.t = pt.norms.X / pt.norms.Y;
    pt.Lambda = theta * mu - (1.0 - theta) * pt.t;
    pt.J = std::pow(theta, theta) *
           quotient_from_norms(pt.norms, mu, theta, params.p);
    out.push_back(pt);
  }
  return out;
}

std::vector<double> log_grid(double mu_min, double mu_max, int count) {
  if (!(mu_min > 0.0) || !(mu_max > mu_min) || count < 2)
    throw DomainError("log_grid: need 0 < mu_min < mu_max and count >= 2");
  std::vector<double> mus(count);
  const double a = std::log(mu_min);
  const double b = std::log(mu_max);
  for (int k = 0; k < count; ++k) mus[k] = std::exp(a + (b - a) * k / (count - 1));
  mus.front() = mu_min;
  mus.back() = mu_max;
  return mus;
}

Field sample_soliton(double mu, const GridPtr& grid) {
  const SymmetricSolution u = soliton(mu, grid->params().p);
  Field f = Field::sample(grid, [&](double s, double) { return u.value(s); });
  f.apply_boundary_conditions();
  return f;
}

namespace {

// Interior tridiagonal stiffness of -d^2/ds^2 with Dirichlet ends, plus the
// trapezoidal mass, both on unknowns 1..n-2.
struct Line {
  SparseMatrix stiffness;
  Vector mass;
};

Line line_operator(std::span<const double> s) {
  const auto n = static_cast<Eigen::Index>(s.size()) - 2;
  std::vector<Eigen::Triplet<double>> trips;
  Vector mass(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double hl = s[k + 1] - s[k];
    const double hr = s[k + 2] - s[k + 1];
    mass[k] = 0.5 * (hl + hr);
    trips.emplace_back(k, k, 1.0 / hl + 1.0 / hr);
    if (k > 0) trips.emplace_back(k, k - 1, -1.0 / hl);
    if (k + 1 < n) trips.emplace_back(k, k + 1, -1.0 / hr);
  }
  Line line{SparseMatrix(n, n), mass};
  line.stiffness.setFromTriplets(trips.begin(), trips.end());
  return line;
}

}  // namespace

GroundState1d ground_state_1d(std::span<const double> s, std::span<const double> multiplier,
                              double tol) {
  if (s.size() < 4 || multiplier.size() != s.size())
    throw InvalidSizeError("ground_state_1d: size mismatch");
  Line line = line_operator(s);
  const Eigen::Index n = line.mass.size();
  SparseMatrix A = line.stiffness;
  double lower = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    A.coeffRef(k, k) += line.mass[k] * multiplier[k + 1];
    lower = std::min(lower, multiplier[k + 1]);
  }
  SparseMatrix shifted = A;
  const double sigma = lower - 1.0;
  for (Eigen::Index k = 0; k < n; ++k) shifted.coeffRef(k, k) -= sigma * line.mass[k];
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw SolverError("ground_state_1d: factorization failed");

  auto mnorm = [&](const Vector& x) { return std::sqrt(x.cwiseProduct(x).dot(line.mass)); };
  Vector x = Vector::Ones(n);
  x /= mnorm(x);
  double lambda = 0.0;
  double res = INFINITY;
  for (int it = 0; it < 5000 && res > tol; ++it) {
    Vector y = ldlt.solve(line.mass.cwiseProduct(x));
    y /= mnorm(y);
    const Vector Ay = A * y;
    lambda = y.dot(Ay);
    const Vector r = Ay - lambda * line.mass.cwiseProduct(y);
    res = std::sqrt(r.cwiseProduct(r).cwiseQuotient(line.mass).sum());
    x = std::move(y);
  }
  if (res > tol) throw ConvergenceError("ground_state_1d: inverse iteration did not converge");
  GroundState1d out{lambda, std::vector<double>(s.size(), 0.0)};
  for (Eigen::Index k = 0; k < n; ++k) out.profile[k + 1] = x[k];
  return out;
}

GroundState1d hamiltonian_ground_state(double mu, const ProblemParams& params,
                                       std::span<const double> s_nodes) {
  const SymmetricSolution u = soliton(mu, params.p);
  std::vector<double> w(s_nodes.size());
  for (std::size_t k = 0; k < s_nodes.size(); ++k)
    w[k] = mu + params.d - 1.0 - (params.p - 1.0) * std::pow(u.value(s_nodes[k]), params.p - 2.0);
  return ground_state_1d(s_nodes, w);
}

Field discrete_soliton(double mu, const GridPtr& grid, double tol) {
  const double p = grid->params().p;
  const auto s = grid->s_nodes();
  Line line = line_operator(s);
  const Eigen::Index n = line.mass.size();
  const SymmetricSolution exact = soliton(mu, p);
  Vector u(n);
  for (Eigen::Index k = 0; k < n; ++k) u[k] = exact.value(s[k + 1]);

  // Newton on K u + mu M u - M u^{p-1} = 0 restricted to even vectors
  // u = E v, which removes the odd translation mode from the Jacobian.
  const Eigen::Index m = (n + 1) / 2;
  SparseMatrix E(n, m);
  {
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index k = 0; k < n; ++k) t.emplace_back(k, std::min(k, n - 1 - k), 1.0);
    E.setFromTriplets(t.begin(), t.end());
  }
  for (int it = 0; it < 50; ++it) {
    Vector F = line.stiffness * u + mu * line.mass.cwiseProduct(u);
    SparseMatrix Jac = line.stiffness;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double a = std::abs(u[k]);
      F[k] -= line.mass[k] * std::pow(a, p - 2.0) * u[k];
      Jac.coeffRef(k, k) += line.mass[k] * (mu - (p - 1.0) * std::pow(a, p - 2.0));
    }
    const SparseMatrix Je = SparseMatrix(E.transpose()) * Jac * E;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(Je);
    if (ldlt.info() != Eigen::Success) throw SolverError("discrete_soliton: singular Jacobian");
    const Vector du = E * ldlt.solve(E.transpose() * F);
    u -= du;
    if (du.cwiseAbs().maxCoeff() <= tol * u.cwiseAbs().maxCoeff()) {
      Field f(grid);
      for (int i = 1; i + 1 < grid->n_s(); ++i)
        for (int j = 0; j < grid->n_phi(); ++j) f(i, j) = u[i - 1];
      return f;
    }
  }
  throw ConvergenceError("discrete_soliton: Newton iteration did not converge");
}

DescentDirection first_harmonic_mode(double mu, const GridPtr& grid) {
  const ProblemParams& params = grid->params();
  const GroundState1d g = hamiltonian_ground_state(mu, params, grid->s_nodes());
  Field w(grid);
  const auto phi = grid->phi_nodes();
  for (int i = 0; i < grid->n_s(); ++i)
    for (int j = 0; j < grid->n_phi(); ++j) w(i, j) = g.profile[i] * std::cos(phi[j]);
  w *= 1.0 / std::sqrt(inner(w, w));

  const SymmetricSolution u = soliton(mu, params.p);
  const Field multiplier = Field::sample(grid, [&](double s, double) {
    return mu - (params.p - 1.0) * std::pow(u.value(s), params.p - 2.0);
  });
  const double form = assemble_schrodinger(multiplier).bilinear(w, w);
  return {std::move(w), g.eigenvalue, form};
}

double discrete_angular_eigenvalue(const CylinderGrid& grid) {
  const auto pw = grid.phi_weights();
  const auto cond = grid.phi_conductance();
  const int n = grid.n_phi() - 2;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) M(j, j) = pw[j + 1];
  for (int j = 0; j + 1 < n; ++j) {
    const double c = cond[j + 1];
    K(j, j) += c;
    K(j + 1, j + 1) += c;
    K(j, j + 1) -= c;
    K(j + 1, j) -= c;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  if (es.info() != Eigen::Success) throw SolverError("discrete_angular_eigenvalue: eigensolver failed");
  return es.eigenvalues()[1];
}

double discrete_bifurcation_point(const GridPtr& grid, double tol) {
  const ProblemParams& params = grid->params();
  const double p = params.p;
  const double nu = discrete_angular_eigenvalue(*grid);
  const auto s = grid->s_nodes();
  auto lowest = [&](double mu) {
    const Field u = discrete_soliton(mu, grid);
    std::vector<double> w(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      w[i] = mu + nu - (p - 1.0) * std::pow(std::abs(u(static_cast<int>(i), 1)), p - 2.0);
    return ground_state_1d(s, w).eigenvalue;
  };
  const double mfs = mu_FS(p, params.d);
  double lo = 0.8 * mfs;
  double hi = 1.25 * mfs;
  double flo = lowest(lo);
  double fhi = lowest(hi);
  if (!(flo > 0.0 && fhi < 0.0))
    throw SolverError("discrete_bifurcation_point: no sign change near mu_FS");
  // Regula falsi with the Illinois modification.
  int side = 0;
  for (int it = 0; it < 200 && hi - lo > tol * mfs; ++it) {
    const double mid = (lo * fhi - hi * flo) / (fhi - flo);
    const double fm = lowest(mid);
    if (fm > 0.0) {
      lo = mid;
      flo = fm;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      fhi = fm;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (std::abs(fm) < 1e-14) return mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<SymmetricCurvePoint> discrete_symmetric_curve(std::span<const double> mus, double theta,
                                                          const GridPtr& grid) {
  const double p = grid->params().p;
  std::vector<SymmetricCurvePoint> out;
  out.reserve(mus.size());
  for (double mu : mus) {
    SymmetricCurvePoint pt;
    pt.mu = mu;
    pt.norms = evaluate_norms(discrete_soliton(mu, grid));
    pt.t = pt.norms.X / pt.norms.Y;
    pt.Lambda = theta * mu - (1.0 - theta) * pt.t;
    pt.J = std::pow(theta, theta) * quotient_from_norms(pt.norms, mu, theta, p);
    out.push_back(pt);
  }
  return out;
}

DescentDirection descent_direction(double mu, const GridPtr& grid) {
  DescentDirection dir = first_harmonic_mode(mu, grid);
  if (!(dir.eigenvalue < 0.0)) {
    std::ostringstream os;
    os << "descent_direction: H is non-negative at mu=" << mu << " (ground-state eigenvalue "
       << dir.eigenvalue << "); no descent direction for mu <= mu_FS";
    throw SolverError(os.str());
  }
  return dir;
}

}  // namespace ckn
