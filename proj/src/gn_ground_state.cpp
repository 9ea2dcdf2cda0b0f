#include "ckn/gn_ground_state.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "ckn/error.hpp"

namespace ckn {

namespace {

namespace odeint = boost::numeric::odeint;

// u, u', and the three radial integrals.
using State = std::array<double, 5>;

struct Radial {
  double p;
  int d;
  void operator()(const State& x, State& dx, double r) const {
    const double u = x[0];
    const double v = x[1];
    const double a = std::abs(u);
    const double w = std::pow(r, d - 1);
    dx[0] = v;
    dx[1] = -(d - 1) / r * v + u - std::pow(a, p - 2.0) * u;
    dx[2] = v * v * w;
    dx[3] = u * u * w;
    dx[4] = std::pow(a, p) * w;
  }
};

struct Shot {
  ShotOutcome outcome;
  State last_good;  ///< state before the solution left the ground-state regime
  double r_last;
  std::vector<double> r;
  std::vector<double> u;
};

Shot integrate(double u0, double p, int d, const RadialOptions& o, bool record) {
  const double c = (u0 - std::pow(u0, p - 1.0)) / (2.0 * d);
  const double r0 = o.r0;
  State x{u0 + c * r0 * r0, 2.0 * c * r0, 0.0, 0.0, 0.0};
  const Radial sys{p, d};
  auto stepper = odeint::make_dense_output(o.abs_tol, o.rel_tol, o.max_step, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(x, r0, 1e-4);

  Shot shot{ShotOutcome::reached_cap, x, r0, {}, {}};
  if (record) {
    shot.r.push_back(0.0);
    shot.u.push_back(u0);
  }
  while (stepper.current_time() < o.R) {
    stepper.do_step(sys);
    const State& s = stepper.current_state();
    if (s[0] < 0.0) {
      shot.outcome = ShotOutcome::overshoot;
      return shot;
    }
    if (s[1] > 0.0) {
      shot.outcome = ShotOutcome::undershoot;
      return shot;
    }
    shot.last_good = s;
    shot.r_last = stepper.current_time();
    if (record) {
      shot.r.push_back(shot.r_last);
      shot.u.push_back(s[0]);
    }
  }
  return shot;
}

}  // namespace

Norms RadialProfile::norms(MeasureMode mode) const {
  const double m = mode == MeasureMode::surface ? sphere_area(d) : 1.0;
  return {radial.X * m, radial.Y * m, radial.Z * m};
}

double RadialProfile::pohozaev_residual() const {
  const double th = theta_critical(p, d);
  const Norms& n = radial;
  const double r1 = std::abs(n.X + n.Y - n.Z);
  const double r2 = std::abs(n.X - th * n.Z);
  const double r3 = std::abs(n.Y - (1.0 - th) * n.Z);
  return std::max({r1, r2, r3}) / n.Z;
}

ShotOutcome shoot(double u0, double p, int d, const RadialOptions& options) {
  return integrate(u0, p, d, options, false).outcome;
}

RadialProfile radial_ground_state(double p, int d, const RadialOptions& options) {
  if (d < 1) throw DomainError("radial_ground_state: d must be positive");
  if (!(p > 2.0) || (d > 2 && !(p < 2.0 * d / (d - 2.0)))) {
    std::ostringstream os;
    os << "radial_ground_state: p=" << p << " outside (2, 2d/(d-2)) for d=" << d;
    throw DomainError(os.str());
  }
  // u(0) <= 1 never overshoots; grow the upper end until it does.
  double lo = 1.0;
  double hi = 2.0;
  while (shoot(hi, p, d, options) != ShotOutcome::overshoot) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) throw SolverError("radial_ground_state: no overshooting u(0) found");
  }
  int steps = 0;
  while (hi - lo > options.bisection_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const ShotOutcome o = shoot(mid, p, d, options);
    if (o == ShotOutcome::overshoot)
      hi = mid;
    else
      lo = mid;
    ++steps;
  }

  const Shot shot = integrate(lo, p, d, options, true);
  RadialProfile prof;
  prof.p = p;
  prof.d = d;
  prof.u0 = lo;
  prof.r_nodes = shot.r;
  prof.u_values = shot.u;
  prof.radial = {shot.last_good[2], shot.last_good[3], shot.last_good[4]};
  prof.bisection_steps = steps;
  prof.r_truncation = shot.r_last;

  const Norms& n = prof.radial;
  const double pairing = std::abs(n.X + n.Y - n.Z) / n.Z;
  const double poho = prof.pohozaev_residual();
  if (pairing > 1e-6 || poho > 1e-5) {
    std::ostringstream os;
    os << "radial_ground_state: tolerance not reached (X+Y-Z " << pairing << ", Pohozaev " << poho << ")";
    throw ConvergenceError(os.str());
  }
  return prof;
}

double gn_prefactor(double p, int d) {
  const double th = theta_critical(p, d);
  return std::pow(th, th) * std::pow(1.0 - th, 1.0 - th);
}

double J_infinity(const RadialProfile& profile, MeasureMode mode) {
  const Norms n = profile.norms(mode);
  return gn_prefactor(profile.p, profile.d) * (n.X + n.Y) / std::pow(n.Z, 2.0 / profile.p);
}

double J_infinity(double p, int d, MeasureMode mode) { return J_infinity(radial_ground_state(p, d), mode); }

}  // namespace ckn
