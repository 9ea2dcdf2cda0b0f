#pragma once

#include <span>
#include <vector>

#include "ckn/field.hpp"
#include "ckn/model.hpp"

namespace ckn {

/// The positive even solution u(s) = A cosh(b s)^{-2/(p-2)} of
/// -u'' + mu u = u^{p-1} on the real line, maximal at s = 0.
struct SymmetricSolution {
  double mu = 0.0;
  double p = 0.0;
  double A = 0.0;  ///< amplitude (mu p / 2)^{1/(p-2)}
  double b = 0.0;  ///< rate sqrt(mu) (p - 2) / 2

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
  /// -u'' + mu u - u^{p-1} evaluated with exact derivatives.
  double residual(double s) const;
};

SymmetricSolution soliton(double mu, double p);

/// Exact norms of the soliton on R x S^{d-1} in the given measure mode.
Norms soliton_norms(double mu, double p, int d, MeasureMode mode);

/// Lowest eigenvalue d - 1 + mu - mu p^2 / 4 of the linearization in the
/// first angular harmonic.
double lambda1_H(double mu, double p, int d);

/// Value of mu where lambda1_H vanishes: 4 (d - 1) / (p^2 - 4).
double mu_FS(double p, int d);

/// (d - 1)(6 - p) / (4 (p - 2)); reference value only.
double lambda_star(double p, int d);

/// Dirichlet-to-mass ratio X/Y of the soliton, mu (p - 2)/(p + 2).
double soliton_t(double mu, double p);

struct SymmetricCurvePoint {
  double mu = 0.0;
  double Lambda = 0.0;
  double J = 0.0;
  double t = 0.0;
  Norms norms;
};

/// The image mu -> (theta mu - (1 - theta) t, J) of the soliton family,
/// from closed-form norms.
std::vector<SymmetricCurvePoint> symmetric_curve(std::span<const double> mus, double theta,
                                                 const ProblemParams& params);

/// Log-spaced mu grid on [mu_min, mu_max].
std::vector<double> log_grid(double mu_min, double mu_max, int count);

/// The soliton sampled on a grid (constant in phi, Dirichlet rows zeroed).
Field sample_soliton(double mu, const GridPtr& grid);

/// Soliton of the discrete problem on the grid's s-nodes, obtained by Newton
/// iteration from the closed form. Constant in phi.
Field discrete_soliton(double mu, const GridPtr& grid, double tol = 1e-12);

/// Ground state of -d^2/ds^2 + W(s) on the grid's s-nodes with Dirichlet ends.
struct GroundState1d {
  double eigenvalue = 0.0;
  std::vector<double> profile;  ///< including the zero end values
};
GroundState1d ground_state_1d(std::span<const double> s_nodes, std::span<const double> multiplier,
                              double tol = 1e-12);

/// Ground state of H = -d^2/ds^2 + mu + d - 1 - (p - 1) u^{p-2} for the
/// soliton u at mu.
GroundState1d hamiltonian_ground_state(double mu, const ProblemParams& params,
                                       std::span<const double> s_nodes);

struct DescentDirection {
  Field w;                      ///< g(s) cos(phi), unit L^2 norm
  double eigenvalue = 0.0;      ///< ground-state eigenvalue of H
  double quadratic_form = 0.0;  ///< (w, (-Delta + mu - (p-1) u^{p-2}) w)
};

/// g(s) cos(phi) with g the ground state of H, without any sign check.
DescentDirection first_harmonic_mode(double mu, const GridPtr& grid);

/// Lowest non-zero eigenvalue of the grid's discrete Laplace-Beltrami
/// operator on the sphere (d - 1 up to O(h^2)).
double discrete_angular_eigenvalue(const CylinderGrid& grid);

/// The mu at which the grid's discrete soliton loses stability in the
/// first angular harmonic; converges to mu_FS under refinement.
double discrete_bifurcation_point(const GridPtr& grid, double tol = 1e-10);

/// Symmetric curve from the discrete soliton on the grid's s-nodes instead of
/// closed-form norms.
std::vector<SymmetricCurvePoint> discrete_symmetric_curve(std::span<const double> mus, double theta,
                                                          const GridPtr& grid);

/// Unstable direction of the soliton at mu > mu_FS. Throws SolverError when
/// the ground-state eigenvalue of H is not negative.
DescentDirection descent_direction(double mu, const GridPtr& grid);

}  // namespace ckn
