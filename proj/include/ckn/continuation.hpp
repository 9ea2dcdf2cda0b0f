#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ckn/fixedpoint.hpp"

namespace ckn {

/// ||u - ubar||_2 / ||u||_2 with ubar the angular average at each s.
double asymmetry(const Field& u);

struct BranchPoint {
  double kappa = 0.0;
  double mu = 0.0;
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;
  double t = 0.0;
  double asymmetry = 0.0;
  std::string field_ref;
  /// Closed-form symmetric point appended below the bifurcation.
  bool closed_form = false;
  int iterations = 0;
};

/// Branch point data of a converged fixed point.
BranchPoint make_branch_point(const FixedPointResult& fp);

struct InitRecord {
  double mu0 = 0.0;
  double eps = 0.0;
  double eta = 0.0;
  std::string seed_direction = "g(s) cos(phi), ground state of H";
  int descent_steps = 0;
  double q_start = 0.0;      ///< Q^1_{mu0} of the perturbed start
  double q_descent = 0.0;    ///< Q^1_{mu0} after descent
  double q_symmetric = 0.0;  ///< closed-form symmetric value at mu0
  bool degenerate = false;   ///< eps = 0: the symmetric fixed point was returned
};

struct BranchStats {
  int steps = 0;
  int eta_halvings = 0;
  int continuity_flags = 0;
  int roothan_iterations = 0;
  int eigen_iterations = 0;
  int accelerated_steps = 0;
  double seconds = 0.0;
};

struct Branch {
  ProblemParams params;
  std::vector<BranchPoint> points;  ///< increasing kappa
  InitRecord provenance;
  BranchStats stats;
};

/// Converged point together with the state needed to continue from it.
struct SeedPoint {
  BranchPoint point;
  Field u;
  Field u_eq;
  Field V;
  InitRecord record;
};

struct InitOptions {
  int max_descent_steps = 400;
  int restart_every = 20;
  double armijo = 1e-4;
  /// Descent stops once the relative decrease of Q over five steps is below this.
  double stall_tol = 1e-11;
  double min_asymmetry = 1e-3;
  FixedPointOptions fixed_point{};
};

/// Nonlinear conjugate gradient on Q^1_{mu0} over the unit L^2 sphere,
/// started from the discrete soliton plus eps times the unstable direction
/// and polished by roothan_solve. A negative eps selects the default
/// 0.05 ||u_{mu0,*}||_2. Throws FellBackToSymmetricError when the result is
/// symmetric; eps = 0 returns the symmetric fixed point flagged degenerate.
SeedPoint initialize(double mu0, double eps, const GridPtr& grid, const InitOptions& options = {});

enum class Direction { down, up };

struct ContinuationOptions {
  int min_eta_divisor = 64;
  double terminal_asymmetry = 1e-4;
  /// Continuity bound ||du||_2 <= factor eta / kappa for unit eigenfunctions.
  double continuity_factor = 5.0;
  /// Linear extrapolation of the potential from the last two points.
  bool secant_predictor = true;
  int max_steps = 100000;
  FixedPointOptions fixed_point{};
};

/// Called for every accepted point with the (eqmu)-normalized field;
/// returns the checkpoint id recorded in the point.
using CheckpointSink = std::function<std::string(const BranchPoint&, const Field&)>;

/// kappa-stepping from a seed. Down stops at the symmetric branch (asymmetry
/// below the terminal level or mu at or below the grid's bifurcation point); up stops at kappa_stop. The
/// returned points exclude the seed and are sorted by increasing kappa.
Branch continue_branch(const SeedPoint& start, double eta, Direction direction, double kappa_stop,
                       const ContinuationOptions& options = {}, const CheckpointSink& sink = {});

/// Seed plus both directions, sorted by kappa.
Branch merge_branches(const SeedPoint& seed, const Branch& down, const Branch& up);

/// Appends closed-form symmetric points for mu in [mu_min, mu_max) below the
/// smallest kappa present.
void extend_with_symmetric(Branch& branch, double mu_min, double mu_max, int count);

}  // namespace ckn
