#pragma once

#include <string>
#include <string_view>

namespace ckn {

/// Normalization of the measure on the unit sphere S^{d-1}.
///
/// In `probability` mode the sphere has total mass one; in `surface` mode it
/// carries its Euclidean area |S^{d-1}|.
enum class MeasureMode { probability, surface };

std::string to_string(MeasureMode mode);
MeasureMode measure_mode_from_string(std::string_view name);

/// Area of the unit sphere S^{d-1} in R^d.
double sphere_area(int d);

/// Mass of the sphere under the given normalization (1 or |S^{d-1}|).
double sphere_mass(int d, MeasureMode mode);

/// Critical interpolation exponent d (p - 2) / (2 p).
double theta_critical(double p, int d);

/// Sobolev exponent 2d / (d - 2) for d >= 3.
double sobolev_exponent(int d);

/// Problem data: dimension, exponent, interpolation parameter and measure
/// normalization, together with the derived constants.
///
/// Construct through `make_params`, which validates 2 < p < 2d/(d-2) and
/// theta_critical(p, d) <= theta <= 1.
struct ProblemParams {
  int d = 5;
  double p = 2.8;
  double theta = 1.0;
  MeasureMode measure_mode = MeasureMode::surface;

  /// Theta(p, d).
  double theta_c() const { return theta_critical(p, d); }
  /// Hoelder conjugate exponent of the potential, p / (p - 2).
  double q() const { return p / (p - 2.0); }
  /// (d - 2) / 2.
  double a_c() const { return 0.5 * (d - 2); }
  /// p^*(theta, d) = 2d / (d - 2 theta).
  double p_star() const { return 2.0 * d / (d - 2.0 * theta); }
  double sphere_mass() const { return ckn::sphere_mass(d, measure_mode); }
};

ProblemParams make_params(int d, double p, double theta = 1.0,
                          MeasureMode mode = MeasureMode::surface);

}  // namespace ckn
