#include "ckn/params.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ckn/error.hpp"

namespace ckn {

std::string to_string(MeasureMode mode) {
  return mode == MeasureMode::surface ? "surface" : "probability";
}

MeasureMode measure_mode_from_string(std::string_view name) {
  if (name == "surface") return MeasureMode::surface;
  if (name == "probability") return MeasureMode::probability;
  throw ConfigError("unknown measure mode '" + std::string(name) + "'");
}

double sphere_area(int d) {
  if (d < 1) throw DomainError("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double sphere_mass(int d, MeasureMode mode) {
  return mode == MeasureMode::surface ? sphere_area(d) : 1.0;
}

double theta_critical(double p, int d) {
  if (!(p > 2.0)) throw DomainError("theta_critical: requires p > 2");
  return d * (p - 2.0) / (2.0 * p);
}

double sobolev_exponent(int d) {
  if (d < 3) throw DomainError("sobolev_exponent: requires d >= 3");
  return 2.0 * d / (d - 2.0);
}

ProblemParams make_params(int d, double p, double theta, MeasureMode mode) {
  if (d < 3) throw DomainError("dimension must be >= 3");
  if (!(p > 2.0) || !(p < sobolev_exponent(d))) {
    std::ostringstream os;
    os << "exponent p=" << p << " outside (2, " << sobolev_exponent(d) << ")";
    throw DomainError(os.str());
  }
  const double tc = theta_critical(p, d);
  // Theta(p, d) is compared with a little slack so that theta = Theta(p, d)
  // computed through a different arithmetic path is accepted.
  if (!(theta <= 1.0) || theta < tc - 1e-12) {
    std::ostringstream os;
    os << "theta=" << theta << " outside [" << tc << ", 1]";
    throw DomainError(os.str());
  }
  return ProblemParams{d, p, theta, mode};
}

}  // namespace ckn
