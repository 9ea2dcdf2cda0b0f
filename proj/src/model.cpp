#include "ckn/model.hpp"

#include <cmath>

#include "ckn/error.hpp"

namespace ckn {

Norms evaluate_norms(const Field& u) {
  const CylinderGrid& g = u.grid();
  const double p = g.params().p;
  const auto s = g.s_nodes();
  const auto sw = g.s_weights();
  const auto pw = g.phi_weights();
  const auto cond = g.phi_conductance();
  const auto w = g.quad_weights();
  const auto v = u.values();
  const int ns = g.n_s();
  const int np = g.n_phi();

  Norms n;
  for (int i = 0; i + 1 < ns; ++i) {
    const double inv_h = 1.0 / (s[i + 1] - s[i]);
    for (int j = 1; j + 1 < np; ++j) {
      const double d = u(i + 1, j) - u(i, j);
      n.X += pw[j] * d * d * inv_h;
    }
  }
  for (int i = 0; i < ns; ++i)
    for (int j = 1; j + 2 < np; ++j) {
      const double d = u(i, j + 1) - u(i, j);
      n.X += sw[i] * cond[j] * d * d;
    }
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double a = std::abs(v[k]);
    n.Y += w[k] * a * a;
    n.Z += w[k] * std::pow(a, p);
  }
  if (!(n.Y > 0.0)) throw SolverError("evaluate_norms: zero field");
  return n;
}

double quotient_from_norms(const Norms& n, double Lambda, double theta, double p) {
  const double base = n.X + Lambda * n.Y;
  double head;
  if (theta == 1.0) {
    head = base;
  } else {
    if (!(base > 0.0)) throw DomainError("evaluate_Q: X + Lambda Y must be positive for theta < 1");
    head = std::pow(base, theta);
  }
  return head * std::pow(n.Y, 1.0 - theta) / std::pow(n.Z, 2.0 / p);
}

double evaluate_Q(const Field& u, double Lambda, double theta) {
  return quotient_from_norms(evaluate_norms(u), Lambda, theta, u.grid().params().p);
}

double integrate(const Field& u) {
  const auto w = u.grid().quad_weights();
  const auto v = u.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) sum += w[k] * v[k];
  return sum;
}

double inner(const Field& a, const Field& b) {
  if (a.grid_ptr() != b.grid_ptr()) throw InvalidSizeError("inner: fields live on different grids");
  const auto w = a.grid().quad_weights();
  const auto x = a.values();
  const auto y = b.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) sum += w[k] * x[k] * y[k];
  return sum;
}

double lp_norm(const Field& u, double r) {
  const auto w = u.grid().quad_weights();
  const auto v = u.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) sum += w[k] * std::pow(std::abs(v[k]), r);
  return std::pow(sum, 1.0 / r);
}

std::vector<double> angular_average(const Field& u) {
  const CylinderGrid& g = u.grid();
  const auto pw = g.phi_weights();
  std::vector<double> avg(g.n_s(), 0.0);
  for (int i = 0; i < g.n_s(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < g.n_phi(); ++j) sum += pw[j] * u(i, j);
    avg[i] = sum / g.sphere_mass();
  }
  return avg;
}

}  // namespace ckn
