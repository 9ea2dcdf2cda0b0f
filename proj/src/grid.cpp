#include "ckn/grid.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ckn/error.hpp"

namespace ckn {
namespace {

constexpr double kPi = std::numbers::pi;

double sinh_map(double x, double strength) {
  if (strength <= 0.0) return x;
  return std::sinh(strength * x) / std::sinh(strength);
}

}  // namespace

CylinderGrid::CylinderGrid(double L, int n_s, int n_phi, const ProblemParams& params,
                           GridGrading grading)
    : params_(params), L_(L), n_s_(n_s), n_phi_(n_phi), grading_(grading) {
  if (!(L > 0.0)) throw InvalidSizeError("grid half-length must be positive");
  if (n_s < 16 || n_phi < 8) {
    std::ostringstream os;
    os << "grid needs n_s >= 16 and n_phi >= 8 (got " << n_s << " x " << n_phi << ")";
    throw InvalidSizeError(os.str());
  }
  if (grading.s_grading < 0.0 || grading.phi_grading < 0.0)
    throw InvalidSizeError("grid grading must be non-negative");

  sphere_mass_ = params.sphere_mass();

  s_.resize(n_s);
  for (int i = 0; i < n_s; ++i) {
    const double x = -1.0 + 2.0 * i / (n_s - 1);
    s_[i] = L * sinh_map(x, grading.s_grading);
  }
  s_.front() = -L;
  s_.back() = L;

  s_weight_.assign(n_s, 0.0);
  for (int i = 0; i + 1 < n_s; ++i) {
    const double h = s_[i + 1] - s_[i];
    s_weight_[i] += 0.5 * h;
    s_weight_[i + 1] += 0.5 * h;
  }

  // Angular nodes and the half-way faces, both through the same map.
  auto phi_of = [&](double x) { return kPi * sinh_map(x, grading.phi_grading); };
  phi_.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) phi_[j] = phi_of(static_cast<double>(j) / (n_phi - 1));
  phi_.front() = 0.0;
  phi_.back() = kPi;

  const int dim = params.d;
  auto density = [dim](double phi) { return std::pow(std::abs(std::sin(phi)), dim - 2); };

  std::vector<double> raw_weight(n_phi, 0.0);
  for (int j = 1; j + 1 < n_phi; ++j)
    raw_weight[j] = density(phi_[j]) * 0.5 * (phi_[j + 1] - phi_[j - 1]);
  const double raw_total = std::accumulate(raw_weight.begin(), raw_weight.end(), 0.0);
  const double scale = sphere_mass_ / raw_total;

  phi_weight_.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) phi_weight_[j] = scale * raw_weight[j];

  phi_conductance_.assign(n_phi - 1, 0.0);
  for (int j = 1; j + 2 < n_phi; ++j) {
    const double face = phi_of((j + 0.5) / (n_phi - 1));
    phi_conductance_[j] = scale * density(face) / (phi_[j + 1] - phi_[j]);
  }

  weight_.resize(size());
  for (int i = 0; i < n_s; ++i)
    for (int j = 0; j < n_phi; ++j) weight_[index(i, j)] = s_weight_[i] * phi_weight_[j];

  active_index_.assign(size(), -1);
  for (int i = 1; i + 1 < n_s; ++i)
    for (int j = 1; j + 1 < n_phi; ++j) {
      active_index_[index(i, j)] = static_cast<long>(active_.size());
      active_.push_back(index(i, j));
    }
}

GridPtr build_grid(double L, int n_s, int n_phi, const ProblemParams& params,
                   GridGrading grading) {
  return std::make_shared<const CylinderGrid>(L, n_s, n_phi, params, grading);
}

double default_half_length(double mu_min) {
  if (!(mu_min > 0.0)) throw DomainError("default_half_length: mu_min must be positive");
  return std::max(8.0, 12.0 / std::sqrt(mu_min));
}

}  // namespace ckn
