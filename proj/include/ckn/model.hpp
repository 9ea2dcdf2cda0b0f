#pragma once

#include <vector>

#include "ckn/field.hpp"

namespace ckn {

/// Dirichlet energy X = int |grad u|^2, mass Y = int u^2 and Z = int |u|^p.
struct Norms {
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;
};

/// Discrete X, Y, Z over the truncated weighted cylinder. X uses staggered
/// first differences in s and phi; pole edges carry no weight.
/// Throws SolverError on a zero field.
Norms evaluate_norms(const Field& u);

/// (X + Lambda Y)^theta Y^(1-theta) / Z^(2/p).
double quotient_from_norms(const Norms& n, double Lambda, double theta, double p);

/// Q^theta_Lambda[u] for the exponent of the field's grid.
double evaluate_Q(const Field& u, double Lambda, double theta);

/// Weighted integral of u.
double integrate(const Field& u);

/// Weighted inner product of two fields on the same grid.
double inner(const Field& a, const Field& b);

/// (int |u|^r)^(1/r).
double lp_norm(const Field& u, double r);

/// Angular average of u at every s node, using the sphere measure.
std::vector<double> angular_average(const Field& u);

}  // namespace ckn
