#pragma once

#include <vector>

#include "ckn/model.hpp"
#include "ckn/params.hpp"

namespace ckn {

struct RadialOptions {
  double R = 50.0;              ///< radius cap
  double bisection_tol = 1e-12;  ///< relative width of the final u(0) bracket
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  double max_step = 0.05;
  double r0 = 1e-6;  ///< series start away from the origin
};

/// Positive radial solution of u'' + (d-1)/r u' - u + u^{p-1} = 0 with
/// u'(0) = 0 and u -> 0. Norms are integrals over the unit sphere's
/// directions with probability normalization; `norms(mode)` rescales.
struct RadialProfile {
  double p = 0.0;
  int d = 0;
  double u0 = 0.0;
  std::vector<double> r_nodes;
  std::vector<double> u_values;
  Norms radial;  ///< int_0^inf (u'^2, u^2, u^p) r^{d-1} dr
  int bisection_steps = 0;
  double r_truncation = 0.0;  ///< where the shot leaves the ground state

  Norms norms(MeasureMode mode) const;
  /// max(|X + Y - Z|, |X - Theta Z|, |Y - (1 - Theta) Z|) / Z.
  double pohozaev_residual() const;
};

enum class ShotOutcome { overshoot, undershoot, reached_cap };

/// Integrates from u(0) = u0 and classifies the shot: overshoot if u crosses
/// zero, undershoot if u' turns positive first.
ShotOutcome shoot(double u0, double p, int d, const RadialOptions& options = {});

/// Shooting plus bisection on u(0). Requires 2 < p < 2d/(d-2) (any p > 2 for
/// d <= 2). Throws SolverError when no overshooting value is found and
/// ConvergenceError when the Pohozaev pair misses 1e-5 or X + Y = Z misses
/// 1e-6.
RadialProfile radial_ground_state(double p, int d, const RadialOptions& options = {});

/// theta^theta (1 - theta)^(1 - theta) at theta = Theta(p, d).
double gn_prefactor(double p, int d);

/// k (X_e + Y_e) / Z_e^{2/p}.
double J_infinity(const RadialProfile& profile, MeasureMode mode);
double J_infinity(double p, int d, MeasureMode mode = MeasureMode::surface);

}  // namespace ckn
