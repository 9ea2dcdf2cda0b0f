#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ckn/analysis.hpp"
#include "ckn/field.hpp"
#include "ckn/params.hpp"

namespace ckn {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kVersion = "0.1.0";

// --- files -----------------------------------------------------------------

/// Writes to a temporary sibling and renames it over `path`. Throws IoError.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// --- configuration -----------------------------------------------------------

struct Tolerances {
  double potential_tol = 1e-9;
  double lambda_tol = 1e-12;
  double eigen_tol = 1e-9;
  int max_iter = 200;
  int max_descent_steps = 400;

  bool operator==(const Tolerances&) const = default;
};

struct RunConfig {
  int d = 5;
  double p = 2.8;
  std::vector<double> theta_list{1.0};
  MeasureMode measure_mode = MeasureMode::surface;
  double L = 10.0;
  int n_s = 241;
  int n_phi = 49;
  double s_grading = 0.0;
  double phi_grading = 0.0;
  double mu0_factor = 1.2;
  std::optional<double> eps;         ///< unset: 0.05 ||u_{mu0,*}||_2
  std::optional<double> eta;         ///< unset: kappa_0 / 200
  std::optional<double> kappa_stop;  ///< unset: 1.75 kappa_0
  std::optional<double> sym_mu_min;  ///< unset: 0.1 mu_FS
  std::optional<double> sym_mu_max;  ///< unset: 5 mu_FS
  int sym_count = 400;
  Tolerances tolerances;
  std::filesystem::path out_dir = "out";
  std::string run_id;  ///< empty: derived from the configuration

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  ProblemParams params() const;
  /// Stable id "run-xxxxxxxx" from a checksum of the configuration.
  std::string effective_run_id() const;

  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// --- checkpoints -------------------------------------------------------------

/// Binary field dump: magic, version, d, p, measure mode, L, n_s, n_phi,
/// n_s n_phi little-endian doubles (s-major) and a CRC-32 trailer.
struct Checkpoint {
  int d = 0;
  double p = 0.0;
  MeasureMode measure_mode = MeasureMode::surface;
  double L = 0.0;
  int n_s = 0;
  int n_phi = 0;
  std::vector<double> values;

  static Checkpoint from_field(const Field& u);
  /// Field on `grid`; throws InvalidSizeError when the header does not match.
  Field to_field(const GridPtr& grid) const;
};

std::string encode_checkpoint(const Checkpoint& c);
/// Throws IoError on a bad magic, version, size or checksum.
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// --- CSV -----------------------------------------------------------------------

/// Shortest representation that parses back to the same double.
std::string format_number(double x);

struct CsvTable {
  std::vector<std::string> comments;        ///< "#" lines in file order
  std::map<std::string, std::string> meta;  ///< from "# key: value" lines, last one wins
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  ///< throws IoError
  double number(std::size_t row, std::string_view name) const;
};

/// Header comment: format version, run id and parameter echo.
std::string csv_preamble(const RunConfig& c, std::string_view extra = {});
std::string format_csv(const std::string& preamble, const std::vector<std::string>& columns,
                       const std::vector<std::vector<std::string>>& rows);
CsvTable parse_csv(std::string_view text);
/// Inverse of parse_csv: comments, header and rows in order.
std::string format_csv(const CsvTable& table);

/// One row per node: s, phi, u.
std::string field_csv(const std::string& preamble, const Field& u);

// --- SVG -----------------------------------------------------------------------

/// (Lambda, J) diagram: the symmetric curve dashed, the non-symmetric part of
/// `nonsym` solid, the envelope as a dark overlay path and the crossing, if
/// any, as a marker.
std::string render_diagram(const ThetaCurve& sym, const ThetaCurve& nonsym, const Envelope& env,
                           const std::optional<Crossing>& crossing, std::string_view title);

}  // namespace ckn
