#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ckn/analysis.hpp"
#include "ckn/continuation.hpp"
#include "ckn/io.hpp"

namespace ckn {

/// File-name form of theta, e.g. "0.714286".
std::string theta_tag(double theta);

GridPtr grid_for(const RunConfig& c);

/// sym_curve_<theta>.csv for every theta: closed-form mu, Lambda, J, t, X, Y, Z.
void cmd_symmetric_curve(const RunConfig& c, std::ostream& log);

/// Initialization, continuation in both directions, symmetric extension
/// below the bifurcation; writes branch.csv, checkpoints/ and manifest.json.
Branch cmd_branch(const RunConfig& c, std::ostream& log);

/// Branch read back from branch.csv.
Branch read_branch_csv(const std::filesystem::path& path, const ProblemParams& params);

/// Per-theta analysis of an existing branch.csv.
struct ThetaAnalysis {
  double theta = 0.0;
  ThetaCurve sym;
  ThetaCurve nonsym;
  CrossingResult crossing;
  Envelope envelope;
  /// Fields re-solved at the crossing: J^theta, Lambda^theta and asymmetry
  /// of the symmetric solution at mu1* and the non-symmetric one at mu1.
  struct Coexisting {
    double J_sym = 0.0, J_nonsym = 0.0;
    double Lambda_sym = 0.0, Lambda_nonsym = 0.0;
    double asym_sym = 0.0, asym_nonsym = 0.0;
  };
  std::optional<Coexisting> coexisting;
};

/// Symmetric curve of the grid's discrete soliton covering the Lambda range
/// of the branch densely.
ThetaCurve discrete_symmetric_theta_curve(const Branch& branch, double theta, const GridPtr& grid, int coarse_count);

ThetaAnalysis analyze_theta(const RunConfig& c, const Branch& branch, double theta, const GridPtr& grid,
                            std::ostream& log);

/// crossings.csv, envelope_<theta>.csv, gn.csv, diagram_<theta>.svg and
/// contour data at the crossing.
std::vector<ThetaAnalysis> cmd_analyze(const RunConfig& c, std::ostream& log);

struct GNResult {
  double Theta = 0.0;
  double J_inf = 0.0;
  GNLevel level;
  double pohozaev = 0.0;
  double u0 = 0.0;
};

/// gn.csv: Theta, J_inf, Lambda_GN.
GNResult cmd_gn_limit(const RunConfig& c, std::ostream& log);

/// Figure sweep: p = 2.8 with the theta list of the figures, and
/// p in {2.78, 2.7} at theta = Theta(2.8, 5), each in its own subdirectory.
void cmd_reproduce_figures(const RunConfig& c, std::ostream& log);

}  // namespace ckn
