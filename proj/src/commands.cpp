#include "ckn/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "ckn/error.hpp"
#include "ckn/gn_ground_state.hpp"
#include "ckn/symmetric.hpp"

namespace ckn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FixedPointOptions fixed_point_options(const RunConfig& c) {
  FixedPointOptions o;
  o.potential_tol = c.tolerances.potential_tol;
  o.lambda_tol = c.tolerances.lambda_tol;
  o.max_iter = c.tolerances.max_iter;
  o.eigen.tol = c.tolerances.eigen_tol;
  return o;
}

double sym_mu_min(const RunConfig& c) { return c.sym_mu_min.value_or(0.1 * mu_FS(c.p, c.d)); }
double sym_mu_max(const RunConfig& c) { return c.sym_mu_max.value_or(5.0 * mu_FS(c.p, c.d)); }

json stats_json(const BranchStats& s) {
  return {{"steps", s.steps},
          {"eta_halvings", s.eta_halvings},
          {"continuity_flags", s.continuity_flags},
          {"roothan_iterations", s.roothan_iterations},
          {"eigen_iterations", s.eigen_iterations},
          {"accelerated_steps", s.accelerated_steps},
          {"seconds", s.seconds}};
}

json versions_json() {
  std::ostringstream eigen, boost, cxx;
  eigen << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION;
  boost << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000 << "." << BOOST_VERSION % 100;
#if defined(__clang__)
  cxx << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  cxx << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
  cxx << "unknown";
#endif
  return {{"ckn", std::string(kVersion)},
          {"format", kFormatVersion},
          {"eigen", eigen.str()},
          {"boost", boost.str()},
          {"compiler", cxx.str()}};
}

std::string num(double x) { return format_number(x); }

}  // namespace

std::string theta_tag(double theta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", theta);
  return buf;
}

GridPtr grid_for(const RunConfig& c) {
  return build_grid(c.L, c.n_s, c.n_phi, c.params(), GridGrading{c.s_grading, c.phi_grading});
}

// --- symmetric-curve -----------------------------------------------------------

void cmd_symmetric_curve(const RunConfig& c, std::ostream& log) {
  c.validate();
  const ProblemParams params = c.params();
  auto mus = log_grid(sym_mu_min(c), sym_mu_max(c), c.sym_count);
  const double mf = mu_FS(c.p, c.d);
  if (auto it = std::lower_bound(mus.begin(), mus.end(), mf); it != mus.end() && *it != mf && it != mus.begin())
    mus.insert(it, mf);
  for (double theta : c.theta_list) {
    std::vector<std::vector<std::string>> rows;
    for (const SymmetricCurvePoint& q : symmetric_curve(mus, theta, params))
      rows.push_back({num(q.mu), num(q.Lambda), num(q.J), num(q.t), num(q.norms.X), num(q.norms.Y), num(q.norms.Z)});
    const fs::path path = c.out_dir / ("sym_curve_" + theta_tag(theta) + ".csv");
    atomic_write(path, format_csv(csv_preamble(c, "# curve: symmetric closed form, theta=" + num(theta) + "\n"),
                                  {"mu", "Lambda", "J", "t", "X", "Y", "Z"}, rows));
    log << "wrote " << path.string() << "\n";
  }
}

// --- branch --------------------------------------------------------------------

namespace {

std::vector<std::string> branch_columns(const RunConfig& c) {
  std::vector<std::string> cols{"kappa", "mu"};
  for (double th : c.theta_list) cols.push_back("Lambda_" + theta_tag(th));
  for (double th : c.theta_list) cols.push_back("J_" + theta_tag(th));
  for (const char* k : {"t", "asymmetry", "X", "Y", "Z", "closed_form", "iterations", "checkpoint"}) cols.emplace_back(k);
  return cols;
}

std::vector<std::string> branch_row(const RunConfig& c, const BranchPoint& bp) {
  const Norms n{bp.X, bp.Y, bp.Z};
  std::vector<std::string> row{num(bp.kappa), num(bp.mu)};
  for (double th : c.theta_list) row.push_back(num(theta_lambda(n, bp.mu, th)));
  for (double th : c.theta_list) row.push_back(num(theta_energy(n, bp.mu, th, c.p)));
  row.push_back(num(bp.t));
  row.push_back(num(bp.asymmetry));
  row.push_back(num(bp.X));
  row.push_back(num(bp.Y));
  row.push_back(num(bp.Z));
  row.push_back(bp.closed_form ? "1" : "0");
  row.push_back(std::to_string(bp.iterations));
  row.push_back(bp.field_ref);
  return row;
}

}  // namespace

Branch cmd_branch(const RunConfig& c, std::ostream& log) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const GridPtr grid = grid_for(c);
  const double mufs = mu_FS(c.p, c.d);
  const double mu0 = c.mu0_factor * mufs;
  const fs::path ckdir = c.out_dir / "checkpoints";

  InitOptions io;
  io.max_descent_steps = c.tolerances.max_descent_steps;
  io.fixed_point = fixed_point_options(c);
  SeedPoint seed = initialize(mu0, c.eps.value_or(-1.0), grid, io);
  const double t_init = elapsed(t0);
  seed.point.field_ref = "seed";
  save_checkpoint(ckdir / "seed.ckpt", Checkpoint::from_field(seed.u_eq));
  log << "seed: mu=" << seed.point.mu << " kappa=" << seed.point.kappa << " asymmetry=" << seed.point.asymmetry
      << " descent steps=" << seed.record.descent_steps << "\n";

  const double eta = c.eta.value_or(seed.point.kappa / 200.0);
  const double kstop = c.kappa_stop.value_or(1.75 * seed.point.kappa);
  ContinuationOptions co;
  co.fixed_point = fixed_point_options(c);

  auto sink_for = [&](const std::string& prefix) {
    auto counter = std::make_shared<int>(0);
    return CheckpointSink([&, prefix, counter](const BranchPoint&, const Field& u) {
      char id[32];
      std::snprintf(id, sizeof id, "%s_%04d", prefix.c_str(), ++*counter);
      save_checkpoint(ckdir / (std::string(id) + ".ckpt"), Checkpoint::from_field(u));
      return std::string(id);
    });
  };
  const Branch down = continue_branch(seed, eta, Direction::down, 0.0, co, sink_for("down"));
  log << "down: " << down.points.size() << " points, " << down.stats.eta_halvings << " halvings, "
      << down.stats.seconds << " s\n";
  const Branch up = continue_branch(seed, eta, Direction::up, kstop, co, sink_for("up"));
  log << "up: " << up.points.size() << " points to kappa=" << kstop << ", " << up.stats.seconds << " s\n";

  Branch branch = merge_branches(seed, down, up);
  branch.provenance.eta = eta;
  const double mu_low = branch.points.empty() ? mufs : branch.points.front().mu;
  const double ext_min = std::min(sym_mu_min(c), 0.5 * mu_low);
  extend_with_symmetric(branch, ext_min, mu_low, 40);

  std::vector<std::vector<std::string>> rows;
  for (const BranchPoint& bp : branch.points) rows.push_back(branch_row(c, bp));
  std::ostringstream extra;
  extra << "# mu_FS: " << num(mufs) << "\n# mu0: " << num(mu0) << "\n# eta: " << num(eta)
        << "\n# kappa_stop: " << num(kstop) << "\n";
  atomic_write(c.out_dir / "branch.csv", format_csv(csv_preamble(c, extra.str()), branch_columns(c), rows));

  const InitRecord& r = branch.provenance;
  json manifest{{"run_id", c.effective_run_id()},
                {"command", "branch"},
                {"config", to_json(c)},
                {"versions", versions_json()},
                {"grid", {{"L", c.L}, {"n_s", c.n_s}, {"n_phi", c.n_phi}, {"s_grading", c.s_grading}, {"phi_grading", c.phi_grading}}},
                {"initialization",
                 {{"mu0", r.mu0},
                  {"eps", r.eps},
                  {"eta", r.eta},
                  {"seed_direction", r.seed_direction},
                  {"descent_steps", r.descent_steps},
                  {"q_start", r.q_start},
                  {"q_descent", r.q_descent},
                  {"q_symmetric", r.q_symmetric},
                  {"degenerate", r.degenerate},
                  {"seed_mu", seed.point.mu},
                  {"seed_kappa", seed.point.kappa},
                  {"seed_asymmetry", seed.point.asymmetry}}},
                {"kappa_stop", kstop},
                {"mu_FS", mufs},
                {"mu_bifurcation_grid", discrete_bifurcation_point(grid)},
                {"points", branch.points.size()},
                {"stats", {{"down", stats_json(down.stats)}, {"up", stats_json(up.stats)}, {"total", stats_json(branch.stats)}}},
                {"eta_halvings", branch.stats.eta_halvings},
                {"timings", {{"initialize", t_init}, {"down", down.stats.seconds}, {"up", up.stats.seconds}, {"total", elapsed(t0)}}},
                {"files", {"branch.csv", "checkpoints/"}}};
  atomic_write(c.out_dir / "manifest.json", manifest.dump(2) + "\n");
  log << "wrote " << (c.out_dir / "branch.csv").string() << " (" << branch.points.size() << " rows)\n";
  return branch;
}

Branch read_branch_csv(const fs::path& path, const ProblemParams& params) {
  if (!fs::exists(path)) throw IoError("missing input " + path.string() + " (run the branch command first)");
  const CsvTable t = parse_csv(read_file(path));
  Branch b;
  b.params = params;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    BranchPoint bp;
    bp.kappa = t.number(i, "kappa");
    bp.mu = t.number(i, "mu");
    bp.t = t.number(i, "t");
    bp.asymmetry = t.number(i, "asymmetry");
    bp.X = t.number(i, "X");
    bp.Y = t.number(i, "Y");
    bp.Z = t.number(i, "Z");
    bp.closed_form = t.rows[i][t.column("closed_form")] == "1";
    bp.iterations = static_cast<int>(t.number(i, "iterations"));
    bp.field_ref = t.rows[i][t.column("checkpoint")];
    b.points.push_back(bp);
  }
  return b;
}

// --- analyze -------------------------------------------------------------------

ThetaCurve discrete_symmetric_theta_curve(const Branch& branch, double theta, const GridPtr& grid, int coarse_count) {
  const ProblemParams& params = grid->params();
  const double p = params.p;
  const double slope = theta - (1.0 - theta) * (p - 2.0) / (p + 2.0);
  double lmin = INFINITY, lmax = -INFINITY, mu_hi = 0.0, mu_lo = INFINITY;
  for (const BranchPoint& bp : branch.points) {
    mu_hi = std::max(mu_hi, bp.mu);
    mu_lo = std::min(mu_lo, bp.mu);
    if (bp.closed_form) continue;
    const double L = theta_lambda({bp.X, bp.Y, bp.Z}, bp.mu, theta);
    lmin = std::min(lmin, L);
    lmax = std::max(lmax, L);
  }
  if (!(mu_hi > 0.0)) throw DomainError("discrete_symmetric_theta_curve: empty branch");
  std::vector<double> mus = log_grid(mu_lo, 1.05 * mu_hi, coarse_count);
  // Lambda_*^theta = slope mu is positive; under-resolved points can have Lambda <= 0
  if (lmax > 0.0 && lmax >= lmin && slope > 0.0) {
    const double lo = lmin > 0.0 ? 0.9 * lmin / slope : mu_lo;
    const auto dense = log_grid(lo, 1.1 * lmax / slope, 1500);
    mus.insert(mus.end(), dense.begin(), dense.end());
  }
  std::sort(mus.begin(), mus.end());
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());
  return map_to_theta(discrete_symmetric_curve(mus, theta, grid), theta, params, "symmetric");
}

namespace {

struct Solved {
  double Lambda = 0.0;
  double J = 0.0;
  double asymmetry = 0.0;
  double mu = 0.0;
  Field u_eq;
};

// Secant on x so that Lambda^theta of solve(x) equals target.
template <class Solve>
Solved match_lambda(double x0, double x1, double target, Solve&& solve) {
  Solved a = solve(x0);
  if (std::abs(a.Lambda - target) < 1e-12) return a;
  Solved b = solve(x1);
  for (int it = 0; it < 12 && std::abs(b.Lambda - target) > 1e-11 * std::abs(target); ++it) {
    const double denom = b.Lambda - a.Lambda;
    if (denom == 0.0) break;
    const double x2 = x1 - (b.Lambda - target) * (x1 - x0) / denom;
    x0 = x1;
    a = std::move(b);
    x1 = x2;
    b = solve(x1);
  }
  return b;
}

}  // namespace

ThetaAnalysis analyze_theta(const RunConfig& c, const Branch& branch, double theta, const GridPtr& grid,
                            std::ostream& log) {
  ThetaAnalysis a;
  a.theta = theta;
  a.sym = discrete_symmetric_theta_curve(branch, theta, grid, std::max(c.sym_count, 200));
  a.nonsym = map_to_theta(branch, theta, "branch");
  a.crossing = detect_crossing(a.sym, a.nonsym);

  double l0 = INFINITY, l1 = -INFINITY;
  for (const ThetaPoint& q : a.nonsym.points)
    if (!q.symmetric) {
      l0 = std::min(l0, q.Lambda);
      l1 = std::max(l1, q.Lambda);
    }
  if (!(l1 > l0)) {
    l0 = a.sym.points.front().Lambda;
    l1 = a.sym.points.back().Lambda;
  }
  const double pad = 0.15 * (l1 - l0);
  std::vector<double> grid_L(801);
  for (std::size_t k = 0; k < grid_L.size(); ++k) grid_L[k] = l0 - pad + (l1 - l0 + 2 * pad) * k / (grid_L.size() - 1);
  const std::vector<ThetaCurve> curves{a.sym, a.nonsym};
  a.envelope = min_envelope(curves, grid_L);

  if (!a.crossing.found()) return a;
  const Crossing& x = a.crossing.crossings.front();
  const double p = c.p;

  // Symmetric solution at the crossing.
  auto sym_solve = [&](double mu) {
    Field u = discrete_soliton(mu, grid);
    const Norms n = evaluate_norms(u);
    return Solved{theta_lambda(n, mu, theta), theta_energy(n, mu, theta, p), asymmetry(u), mu, std::move(u)};
  };
  const Solved s = match_lambda(x.mu1_star, x.mu1_star * (1.0 + 1e-4), x.Lambda1, sym_solve);

  // Non-symmetric solution: kappa interpolated between the stored points
  // around mu1, warm-started from the nearer checkpoint.
  std::vector<const BranchPoint*> ns;
  for (const BranchPoint& bp : branch.points)
    if (!bp.closed_form && bp.asymmetry > kSymmetricAsymmetry) ns.push_back(&bp);
  std::sort(ns.begin(), ns.end(), [](auto* u, auto* v) { return u->mu < v->mu; });
  const BranchPoint* lo = nullptr;
  const BranchPoint* hi = nullptr;
  for (std::size_t k = 0; k + 1 < ns.size(); ++k)
    if (ns[k]->mu <= x.mu1 && x.mu1 <= ns[k + 1]->mu) {
      lo = ns[k];
      hi = ns[k + 1];
      break;
    }
  if (!lo) return a;
  const BranchPoint* nearer = (x.mu1 - lo->mu < hi->mu - x.mu1) ? lo : hi;
  const fs::path ck = c.out_dir / "checkpoints" / (nearer->field_ref + ".ckpt");
  if (!fs::exists(ck)) {
    log << "analyze: no checkpoint " << ck.string() << ", skipping the field at mu1\n";
    return a;
  }
  const Field start = load_checkpoint(ck).to_field(grid);
  const double kappa1 = lo->kappa + (x.mu1 - lo->mu) / (hi->mu - lo->mu) * (hi->kappa - lo->kappa);
  const FixedPointOptions fo = fixed_point_options(c);
  Field V = potential_from(start);
  auto ns_solve = [&](double kappa) {
    FixedPointResult fp = roothan_solve(kappa, V, fo, nullptr);
    V = fp.V;
    const Norms n = evaluate_norms(fp.u_eq);
    return Solved{theta_lambda(n, fp.mu, theta), theta_energy(n, fp.mu, theta, p), asymmetry(fp.u_eq), fp.mu,
                  std::move(fp.u_eq)};
  };
  const Solved n = match_lambda(kappa1, kappa1 * (1.0 + 1e-4), x.Lambda1, ns_solve);

  a.coexisting = ThetaAnalysis::Coexisting{s.J, n.J, s.Lambda, n.Lambda, s.asymmetry, n.asymmetry};
  const std::string tag = theta_tag(theta);
  const std::string pre = csv_preamble(c);
  atomic_write(c.out_dir / ("contour_" + tag + "_mu1star.csv"),
               field_csv(pre + "# field: symmetric, mu=" + num(s.mu) + "\n", s.u_eq));
  atomic_write(c.out_dir / ("contour_" + tag + "_mu1.csv"),
               field_csv(pre + "# field: non-symmetric, mu=" + num(n.mu) + "\n", n.u_eq));
  save_checkpoint(c.out_dir / "checkpoints" / ("crossing_" + tag + "_mu1star.ckpt"), Checkpoint::from_field(s.u_eq));
  save_checkpoint(c.out_dir / "checkpoints" / ("crossing_" + tag + "_mu1.ckpt"), Checkpoint::from_field(n.u_eq));
  return a;
}

std::vector<ThetaAnalysis> cmd_analyze(const RunConfig& c, std::ostream& log) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemParams params = c.params();
  const Branch branch = read_branch_csv(c.out_dir / "branch.csv", params);
  const GridPtr grid = grid_for(c);

  std::vector<ThetaAnalysis> out;
  std::vector<std::vector<std::string>> crows;
  const std::string nan = num(std::nan(""));
  for (double theta : c.theta_list) {
    ThetaAnalysis a = analyze_theta(c, branch, theta, grid, log);
    const std::string tag = theta_tag(theta);

    std::vector<std::vector<std::string>> erows;
    static const char* names[] = {"symmetric", "non-symmetric"};
    for (const EnvelopePoint& e : a.envelope.points) erows.push_back({num(e.Lambda), num(e.J), names[e.source]});
    std::string jumps;
    for (const EnvelopeJump& j : a.envelope.jumps)
      jumps += "# jump: Lambda=" + num(j.Lambda) + " " + names[j.from] + " -> " + names[j.to] + "\n";
    atomic_write(c.out_dir / ("envelope_" + tag + ".csv"),
                 format_csv(csv_preamble(c, "# theta: " + num(theta) + "\n" + jumps), {"Lambda", "J_min", "source"}, erows));

    std::optional<Crossing> first;
    if (a.crossing.found()) first = a.crossing.crossings.front();
    std::ostringstream title;
    title << "d=" << c.d << " p=" << num(c.p) << " theta=" << tag;
    atomic_write(c.out_dir / ("diagram_" + tag + ".svg"), render_diagram(a.sym, a.nonsym, a.envelope, first, title.str()));

    const auto& co = a.coexisting;
    crows.push_back({num(theta), a.crossing.found() ? "1" : "0", a.crossing.ambiguous ? "1" : "0",
                     std::to_string(a.crossing.crossings.size()), first ? num(first->Lambda1) : nan,
                     first ? num(first->J1) : nan, first ? num(first->mu1_star) : nan, first ? num(first->mu1) : nan,
                     num(lambda_FS(c.p, theta, c.d)), a.nonsym.non_monotone ? "1" : "0",
                     co ? num(co->J_sym) : nan, co ? num(co->J_nonsym) : nan, co ? num(co->asym_sym) : nan,
                     co ? num(co->asym_nonsym) : nan});
    log << "theta=" << tag << ": crossing " << (a.crossing.found() ? "found" : "absent");
    if (first) log << " Lambda1=" << first->Lambda1 << " mu1*=" << first->mu1_star << " mu1=" << first->mu1;
    log << "\n";
    out.push_back(std::move(a));
  }
  atomic_write(c.out_dir / "crossings.csv",
               format_csv(csv_preamble(c),
                          {"theta", "found", "ambiguous", "count", "Lambda1", "J1", "mu1_star", "mu1", "Lambda_FS",
                           "non_monotone", "J_sym_field", "J_nonsym_field", "asymmetry_sym", "asymmetry_nonsym"},
                          crows));
  cmd_gn_limit(c, log);
  json summary{{"run_id", c.effective_run_id()}, {"command", "analyze"}, {"config", to_json(c)},
               {"versions", versions_json()}, {"seconds", elapsed(t0)}};
  atomic_write(c.out_dir / "analysis.json", summary.dump(2) + "\n");
  return out;
}

// --- gn-limit ------------------------------------------------------------------

GNResult cmd_gn_limit(const RunConfig& c, std::ostream& log) {
  c.validate();
  const RadialProfile prof = radial_ground_state(c.p, c.d);
  GNResult r;
  r.Theta = theta_critical(c.p, c.d);
  r.J_inf = J_infinity(prof, c.measure_mode);
  r.level = lambda_GN(c.p, c.d, r.J_inf, c.measure_mode);
  r.pohozaev = prof.pohozaev_residual();
  r.u0 = prof.u0;

  std::vector<std::string> cols{"Theta", "J_inf", "Lambda_GN", "mu_GN", "residual", "pohozaev", "u0"};
  std::vector<std::string> row{num(r.Theta), num(r.J_inf), num(r.level.Lambda), num(r.level.mu),
                               num(r.level.residual), num(r.pohozaev), num(r.u0)};
  // The branch limit, when a branch is available.
  const fs::path bpath = c.out_dir / "branch.csv";
  if (fs::exists(bpath)) {
    const Branch b = read_branch_csv(bpath, c.params());
    const BranchPoint* top = nullptr;
    for (const BranchPoint& bp : b.points)
      if (!bp.closed_form && (!top || bp.mu > top->mu)) top = &bp;
    if (top) {
      cols.insert(cols.end(), {"mu_max_branch", "J_branch"});
      row.push_back(num(top->mu));
      row.push_back(num(theta_energy({top->X, top->Y, top->Z}, top->mu, r.Theta, c.p)));
    }
  }
  atomic_write(c.out_dir / "gn.csv", format_csv(csv_preamble(c), cols, {row}));
  log << "J_inf=" << r.J_inf << " Lambda_GN=" << r.level.Lambda << "\n";
  return r;
}

// --- reproduce-figures -----------------------------------------------------------

void cmd_reproduce_figures(const RunConfig& c, std::ostream& log) {
  const double Th = theta_critical(2.8, 5);
  struct Job {
    double p;
    std::vector<double> thetas;
  };
  const std::vector<Job> jobs{
      {2.8, {Th, 0.7213, 0.72, 0.7283, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0}},
      {2.78, {Th}},
      {2.7, {Th}},
  };
  json index = json::array();
  for (const Job& job : jobs) {
    RunConfig rc = c;
    rc.d = 5;
    rc.p = job.p;
    rc.theta_list = job.thetas;
    rc.out_dir = c.out_dir / ("p" + theta_tag(job.p));
    rc.run_id.clear();
    rc.validate();
    log << "== p=" << job.p << " -> " << rc.out_dir.string() << "\n";
    cmd_symmetric_curve(rc, log);
    cmd_branch(rc, log);
    cmd_analyze(rc, log);
    index.push_back({{"p", job.p}, {"theta_list", job.thetas}, {"dir", rc.out_dir.filename().string()},
                     {"run_id", rc.effective_run_id()}});
  }
  atomic_write(c.out_dir / "figures.json", json{{"runs", index}, {"versions", versions_json()}}.dump(2) + "\n");
}

}  // namespace ckn
