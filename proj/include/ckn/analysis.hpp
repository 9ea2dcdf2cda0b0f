#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ckn/continuation.hpp"
#include "ckn/symmetric.hpp"

namespace ckn {

struct ThetaPoint {
  double mu = 0.0;
  double Lambda = 0.0;
  double J = 0.0;
  bool symmetric = false;
};

/// A branch seen through the theta-parametrization mu -> (Lambda^theta, J^theta).
struct ThetaCurve {
  double theta = 1.0;
  std::vector<ThetaPoint> points;  ///< increasing mu
  std::string source;
  /// Lambda is not monotone in mu along the curve.
  bool non_monotone = false;
};

/// theta^theta (X + mu Y)^theta Y^(1-theta) / Z^(2/p).
double theta_energy(const Norms& n, double mu, double theta, double p);

/// theta mu - (1 - theta) X / Y.
double theta_lambda(const Norms& n, double mu, double theta);

/// Branch points with asymmetry at or below this are treated as symmetric.
inline constexpr double kSymmetricAsymmetry = 1e-3;

/// Maps a branch to the theta-plane. Throws DomainError unless
/// Theta(p, d) <= theta <= 1.
ThetaCurve map_to_theta(const Branch& branch, double theta, std::string source = "branch",
                        double symmetric_asymmetry = kSymmetricAsymmetry);

/// Same for a sampled symmetric family; every point is flagged symmetric.
ThetaCurve map_to_theta(std::span<const SymmetricCurvePoint> curve, double theta, const ProblemParams& params,
                        std::string source = "symmetric");

/// 4 (d-1)/(p^2-4) ((2 theta - 1) p + 2)/(p + 2).
double lambda_FS(double p, double theta, int d);

/// Maximal sub-polylines on which Lambda is strictly monotone; the
/// extremum is shared by the adjacent pieces.
std::vector<std::vector<ThetaPoint>> monotone_pieces(std::span<const ThetaPoint> points);

struct Crossing {
  double Lambda1 = 0.0;
  double J1 = 0.0;
  double mu1_star = 0.0;  ///< preimage on the symmetric curve
  double mu1 = 0.0;       ///< preimage on the non-symmetric curve
};

struct CrossingResult {
  std::vector<Crossing> crossings;
  /// More than one crossing, or the curves coincide over a whole segment.
  bool ambiguous = false;

  bool found() const { return !crossings.empty(); }
  /// The unique crossing; throws SolverError when ambiguous or absent.
  const Crossing& unique() const;
};

/// Equal-energy points of the two curves on the parts where both are graphs
/// over Lambda. Points of `nonsym` flagged symmetric are ignored, so the
/// bifurcation itself is not reported. Energy gaps below rel_tol J count as
/// zero; curves that agree to that level over their whole overlap are
/// reported as one ambiguous crossing.
CrossingResult detect_crossing(const ThetaCurve& sym, const ThetaCurve& nonsym, double rel_tol = 1e-6);

struct EnvelopePoint {
  double Lambda = 0.0;
  double J = 0.0;
  int source = -1;  ///< index into the curve list
};

struct EnvelopeJump {
  double Lambda = 0.0;  ///< midpoint of the grid cell where the argmin changes
  int from = -1;
  int to = -1;
};

struct Envelope {
  std::vector<EnvelopePoint> points;
  std::vector<EnvelopeJump> jumps;
};

/// Pointwise minimum of J over the curves on Lambda_grid. Curves not defined
/// at a Lambda are skipped there; a change of argmin counts as a jump only
/// when both curves are defined on both sides of it. Throws DomainError if
/// no curve covers any grid point.
Envelope min_envelope(std::span<const ThetaCurve> curves, std::span<const double> Lambda_grid);

/// Largest Lambda_*^Theta(mu) with J_*^Theta(mu) < J_inf on the closed-form
/// symmetric curve at theta = Theta(p, d). Throws SolverError when the level
/// is never crossed on mu in [1e-6, 1e6].
struct GNLevel {
  double Lambda = 0.0;
  double mu = 0.0;
  double residual = 0.0;  ///< |J_*^Theta(mu) - J_inf|
};
GNLevel lambda_GN(double p, int d, double J_inf, MeasureMode mode = MeasureMode::surface);

/// 1 / J. Throws DomainError unless J > 0.
double best_constant(double J);

}  // namespace ckn
