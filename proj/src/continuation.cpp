#include "ckn/continuation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "ckn/error.hpp"
#include "ckn/model.hpp"
#include "ckn/symmetric.hpp"

namespace ckn {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double l2_distance(const Field& a, const Field& b) {
  const auto w = a.grid().quad_weights();
  const auto x = a.values();
  const auto y = b.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) sum += w[k] * (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(sum);
}

// prev + c (prev - older), clamped at zero and renormalized in L^q.
Field secant_potential(const Field& prev, const Field& older, double c) {
  Field out(prev);
  auto o = out.values();
  const auto a = prev.values();
  const auto b = older.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = std::max(0.0, a[k] + c * (a[k] - b[k]));
  out *= 1.0 / lp_norm(out, prev.grid().params().q());
  return out;
}

void accumulate(BranchStats& stats, const FixedPointResult& fp) {
  stats.roothan_iterations += fp.iterations;
  stats.eigen_iterations += fp.eigen_iterations;
  stats.accelerated_steps += fp.accelerated_steps;
}

// Q^1_mu on active vectors, with its gradient in coefficient space.
struct RayleighQuotient {
  const SparseMatrix& B;
  const Vector& mass;
  double p;

  double operator()(const Vector& x, Vector* grad) const {
    const Vector Bx = B * x;
    const double N = x.dot(Bx);
    Vector mp(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k)
      mp[k] = mass[k] * std::pow(std::abs(x[k]), p - 2.0) * x[k];
    const double Z = x.dot(mp);
    const double Zs = std::pow(Z, 2.0 / p);
    if (grad != nullptr) *grad = (2.0 / Zs) * (Bx - (N / Z) * mp);
    return N / Zs;
  }
};

}  // namespace

double asymmetry(const Field& u) {
  const CylinderGrid& g = u.grid();
  const std::vector<double> avg = angular_average(u);
  const auto w = g.quad_weights();
  double dev = 0.0;
  double tot = 0.0;
  for (int i = 0; i < g.n_s(); ++i)
    for (int j = 0; j < g.n_phi(); ++j) {
      const double wk = w[g.index(i, j)];
      const double v = u(i, j);
      dev += wk * (v - avg[i]) * (v - avg[i]);
      tot += wk * v * v;
    }
  if (!(tot > 0.0)) throw SolverError("asymmetry: zero field");
  return std::min(1.0, std::sqrt(dev / tot));
}

BranchPoint make_branch_point(const FixedPointResult& fp) {
  const Norms n = evaluate_norms(fp.u_eq);
  BranchPoint pt;
  pt.kappa = fp.kappa;
  pt.mu = fp.mu;
  pt.X = n.X;
  pt.Y = n.Y;
  pt.Z = n.Z;
  pt.t = n.X / n.Y;
  pt.asymmetry = asymmetry(fp.u_eq);
  pt.iterations = fp.iterations;
  return pt;
}

SeedPoint initialize(double mu0, double eps, const GridPtr& grid, const InitOptions& options) {
  const ProblemParams& params = grid->params();
  const double p = params.p;
  if (!(mu0 > 0.0)) throw DomainError("initialize: mu0 must be positive");

  const Field us = discrete_soliton(mu0, grid);
  if (eps < 0.0) eps = 0.05 * std::sqrt(inner(us, us));
  const auto K = stiffness_matrix(*grid);

  InitRecord record;
  record.mu0 = mu0;
  record.eps = eps;
  record.q_symmetric = std::pow(soliton_norms(mu0, p, params.d, params.measure_mode).Z, (p - 2.0) / p);

  auto finish = [&](const FixedPointResult& fp) {
    return SeedPoint{make_branch_point(fp), fp.u, fp.u_eq, fp.V, record};
  };

  if (eps == 0.0) {
    record.degenerate = true;
    record.q_start = record.q_descent = critical_value(us);
    const FixedPointResult fp =
        roothan_solve(critical_value(us), potential_from(us), options.fixed_point, &us, K);
    return finish(fp);
  }

  const DescentDirection dir = first_harmonic_mode(mu0, grid);
  Field start(us);
  {
    auto v = start.values();
    const auto w = dir.w.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += eps * w[k];
  }

  const DiscreteOperator B =
      assemble_schrodinger(Field::sample(grid, [mu0](double, double) { return mu0; }), K);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(B.form());
  if (ldlt.info() != Eigen::Success) throw SolverError("initialize: factorization failed");
  const Vector& mass = B.mass();
  const RayleighQuotient Q{B.form(), mass, p};
  auto normalize = [&](Vector& x) { x /= std::sqrt(x.cwiseProduct(x).dot(mass)); };

  Vector x = B.gather(start);
  normalize(x);
  Vector g;
  double q = Q(x, &g);
  record.q_start = q;
  Vector G = ldlt.solve(g);
  double gG = g.dot(G);
  Vector d = -G;
  // The step alpha = Z^{2/p} / 2 maps x to the normalized iterate
  // B^{-1} |x|^{p-2} x, a natural first trial.
  double alpha = 0.5 * std::pow(x.cwiseAbs().array().pow(p).matrix().dot(mass), 2.0 / p);
  std::vector<double> history{q};

  int step = 0;
  for (; step < options.max_descent_steps; ++step) {
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -G;
      slope = -gG;
    }
    double a = alpha;
    Vector xt;
    double qt = q;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      xt = x + a * d;
      normalize(xt);
      qt = Q(xt, nullptr);
      if (qt <= q + options.armijo * a * slope) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) break;
    x = std::move(xt);
    Vector gn;
    q = Q(x, &gn);
    Vector Gn = ldlt.solve(gn);
    double beta = std::max(0.0, Gn.dot(gn - g) / gG);
    if ((step + 1) % options.restart_every == 0) beta = 0.0;
    d = -Gn + beta * d;
    g = std::move(gn);
    G = std::move(Gn);
    gG = g.dot(G);
    alpha = 2.0 * a;
    history.push_back(q);
    if (history.size() > 5) {
      const double old = history[history.size() - 6];
      if ((old - q) <= options.stall_tol * q) {
        ++step;
        break;
      }
    }
  }
  record.descent_steps = step;
  record.q_descent = q;

  const Field u = B.scatter(x);
  const FixedPointResult fp = roothan_solve(q, potential_from(u), options.fixed_point, &u, K);
  SeedPoint seed = finish(fp);
  if (seed.point.asymmetry < options.min_asymmetry) {
    std::ostringstream os;
    os << "initialize: descent from mu0=" << mu0 << " returned to the symmetric solution"
       << " (asymmetry " << seed.point.asymmetry << ")";
    throw FellBackToSymmetricError(os.str());
  }
  return seed;
}

Branch continue_branch(const SeedPoint& start, double eta, Direction direction, double kappa_stop,
                       const ContinuationOptions& options, const CheckpointSink& sink) {
  if (!(eta > 0.0)) throw DomainError("continue_branch: eta must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const GridPtr& grid = start.V.grid_ptr();
  const ProblemParams& params = grid->params();
  const auto K = stiffness_matrix(*grid);
  const double mu_c = direction == Direction::down ? discrete_bifurcation_point(grid) : 0.0;
  const double sign = direction == Direction::down ? -1.0 : 1.0;
  const double eta_min = eta / options.min_eta_divisor;

  Branch branch{params, {}, start.record, {}};
  branch.provenance.eta = eta;

  struct State {
    double kappa;
    Field u;
    Field V;
  };
  State prev{start.point.kappa, start.u, start.V};
  std::optional<State> older;
  double h = eta;
  int successes = 0;
  double last_slope = 0.0;

  if (direction == Direction::up && start.point.kappa >= kappa_stop) return branch;

  for (int n = 0; n < options.max_steps; ++n) {
    double kappa = prev.kappa + sign * h;
    // snap to kappa_stop so rounding in the accumulated steps cannot leave a sliver step
    if (direction == Direction::up && kappa_stop - kappa < 1e-6 * h) kappa = kappa_stop;
    if (direction == Direction::down && !(kappa > 0.0)) break;

    Field V0 = prev.V;
    if (options.secant_predictor && older)
      V0 = secant_potential(prev.V, older->V, (kappa - prev.kappa) / (prev.kappa - older->kappa));

    auto halve = [&](const std::string& why) {
      h *= 0.5;
      successes = 0;
      ++branch.stats.eta_halvings;
      if (h < eta_min) {
        std::ostringstream os;
        os << "continue_branch: step failure at kappa=" << prev.kappa << " (" << why
           << ", eta below eta/" << options.min_eta_divisor << ")";
        throw ConvergenceError(os.str());
      }
    };

    std::optional<FixedPointResult> solved;
    try {
      solved.emplace(roothan_solve(kappa, V0, options.fixed_point, &prev.u, K));
    } catch (const ConvergenceError& e) {
      halve(e.what());
      continue;
    }
    const FixedPointResult& fp = *solved;
    accumulate(branch.stats, fp);
    if (!fp.positive_mu) throw SolverError("continue_branch: fixed point with mu <= 0");

    BranchPoint pt = make_branch_point(fp);
    const bool terminal = direction == Direction::down &&
                          (pt.asymmetry < options.terminal_asymmetry || pt.mu <= mu_c);
    const double du = l2_distance(fp.u, prev.u);
    // A steep but continuous branch keeps du / h close to its previous
    // value; only a jump in that ratio triggers a halving. Accepted
    // violations are counted.
    const double slope = du / h;
    if (du > options.continuity_factor * h / kappa) {
      // Merging into the symmetric branch is refined down to the smallest step.
      const bool jump = terminal || !(last_slope > 0.0) || slope > 2.0 * last_slope;
      if (jump && h * 0.5 >= eta_min) {
        halve("continuity");
        continue;
      }
      ++branch.stats.continuity_flags;
    }
    last_slope = slope;

    ++branch.stats.steps;
    if (sink) pt.field_ref = sink(pt, fp.u_eq);
    branch.points.push_back(pt);
    if (terminal) break;
    older = std::move(prev);
    prev = State{kappa, fp.u, fp.V};
    if (direction == Direction::up && kappa >= kappa_stop) break;
    if (++successes >= 2 && h < eta) {
      h = std::min(eta, 2.0 * h);
      successes = 0;
    }
  }

  std::sort(branch.points.begin(), branch.points.end(),
            [](const BranchPoint& a, const BranchPoint& b) { return a.kappa < b.kappa; });
  branch.stats.seconds = seconds_since(t0);
  return branch;
}

Branch merge_branches(const SeedPoint& seed, const Branch& down, const Branch& up) {
  Branch out{seed.V.grid().params(), {}, seed.record, {}};
  out.provenance.eta = std::max(down.provenance.eta, up.provenance.eta);
  out.points = down.points;
  out.points.push_back(seed.point);
  out.points.insert(out.points.end(), up.points.begin(), up.points.end());
  std::sort(out.points.begin(), out.points.end(),
            [](const BranchPoint& a, const BranchPoint& b) { return a.kappa < b.kappa; });
  for (const Branch* b : {&down, &up}) {
    out.stats.steps += b->stats.steps;
    out.stats.eta_halvings += b->stats.eta_halvings;
    out.stats.continuity_flags += b->stats.continuity_flags;
    out.stats.roothan_iterations += b->stats.roothan_iterations;
    out.stats.eigen_iterations += b->stats.eigen_iterations;
    out.stats.accelerated_steps += b->stats.accelerated_steps;
    out.stats.seconds += b->stats.seconds;
  }
  return out;
}

void extend_with_symmetric(Branch& branch, double mu_min, double mu_max, int count) {
  const ProblemParams& params = branch.params;
  const double p = params.p;
  const double kappa_floor =
      branch.points.empty() ? INFINITY : branch.points.front().kappa;
  std::vector<BranchPoint> ext;
  for (double mu : log_grid(mu_min, mu_max, count + 1)) {
    if (mu >= mu_max) continue;
    const Norms n = soliton_norms(mu, p, params.d, params.measure_mode);
    BranchPoint pt;
    pt.mu = mu;
    pt.kappa = std::pow(n.Z, (p - 2.0) / p);
    if (!(pt.kappa < kappa_floor)) continue;
    pt.X = n.X;
    pt.Y = n.Y;
    pt.Z = n.Z;
    pt.t = n.X / n.Y;
    pt.closed_form = true;
    ext.push_back(pt);
  }
  branch.points.insert(branch.points.begin(), ext.begin(), ext.end());
}

}  // namespace ckn
