#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ckn/eigensolver.hpp"
#include "ckn/error.hpp"
#include "ckn/fixedpoint.hpp"
#include "ckn/model.hpp"
#include "ckn/symmetric.hpp"

using namespace ckn;
using doctest::Approx;

namespace {

GridPtr grid(int n_s = 241, int n_phi = 49, MeasureMode mode = MeasureMode::probability) {
  return build_grid(10.0, n_s, n_phi, make_params(5, 2.8, 1.0, mode));
}

Field random_field(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Field f(g);
  for (double& v : f.values()) v = U(rng);
  f.apply_boundary_conditions();
  return f;
}

// V = u^{p-2} / ||u||_p^{p-2} and kappa = ||u||_p^{p-2} for the soliton at mu.
std::pair<Field, double> soliton_potential(double mu, const GridPtr& g) {
  auto u = sample_soliton(mu, g);
  return {potential_from(u), critical_value(u)};
}

}  // namespace

TEST_CASE("free Dirichlet ground state") {
  auto g = grid();
  Field V = Field::sample(g, [](double, double) { return 1.0; });
  V *= 1.0 / lp_norm(V, 2.8 / 0.8);
  auto r = lowest_eigenpair(0.0, V);
  const double exact = std::pow(std::numbers::pi / 20.0, 2);
  CHECK(r.lambda == Approx(exact).epsilon(0.02));
  CHECK(inner(r.u, r.u) == Approx(1.0).epsilon(1e-12));
  CHECK(r.residual <= 1e-9);
  CHECK(r.u.min_value() >= -1e-8 * r.u.max_abs());
}

TEST_CASE("soliton potential gives -mu") {
  auto g = grid();
  const double mf = mu_FS(2.8, 5);
  auto [V, kappa] = soliton_potential(mf, g);
  CHECK(kappa == Approx(6.149).epsilon(2e-3));
  auto r = lowest_eigenpair(kappa, V);
  CHECK(r.lambda == Approx(-mf).epsilon(1e-3));

  auto lo = lowest_eigenpair(0.9 * kappa, V);
  auto hi = lowest_eigenpair(1.1 * kappa, V);
  CHECK(hi.lambda <= r.lambda);
  CHECK(r.lambda <= lo.lambda);
}

TEST_CASE("operator is self-adjoint in the weighted product") {
  auto g = grid(65, 17);
  auto [V, kappa] = soliton_potential(3.0, g);
  auto op = assemble_operator(kappa, V);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10; ++k) {
    auto u = random_field(g, rng), v = random_field(g, rng);
    const double a = inner(op.apply(u), v), b = inner(u, op.apply(v));
    CHECK(std::abs(a - b) <= 1e-10 * (std::abs(a) + std::abs(b)));
    CHECK(op.bilinear(u, v) == Approx(a).epsilon(1e-10));
  }
}

TEST_CASE("angular part of the operator") {
  auto gs = [](double s) { return std::exp(-0.5 * s * s); };
  std::vector<double> err;
  for (int n_phi : {49, 97, 193}) {
    auto g = grid(121, n_phi);
    auto op = assemble_schrodinger(Field(g));
    auto radial = Field::sample(g, [&](double s, double) { return gs(s); });
    auto first = Field::sample(g, [&](double s, double phi) { return gs(s) * std::cos(phi); });
    radial.apply_boundary_conditions();
    first.apply_boundary_conditions();
    auto hr = op.apply(radial), h1 = op.apply(first);

    // constants in phi see only the s part
    double worst = 0.0;
    const auto s = g->s_nodes();
    for (int i = 1; i + 1 < g->n_s(); ++i) {
      const double h = s[i + 1] - s[i];
      const double d2 = (gs(s[i + 1]) - 2 * gs(s[i]) + gs(s[i - 1])) / (h * h);
      for (int j = 1; j + 1 < g->n_phi(); ++j) worst = std::max(worst, std::abs(hr(i, j) + d2));
    }
    CHECK(worst < 1e-10);

    // the first harmonic picks up d - 1
    Field e(g);
    for (int i = 1; i + 1 < g->n_s(); ++i)
      for (int j = 1; j + 1 < g->n_phi(); ++j)
        e(i, j) = h1(i, j) - std::cos(g->phi_nodes()[j]) * hr(i, j) - 4.0 * first(i, j);
    err.push_back(std::sqrt(inner(e, e) / inner(first, first)));
  }
  CHECK(err[1] < 6e-3);
  CHECK(std::log2(err[1] / err[2]) > 1.8);
}

TEST_CASE("Rayleigh quotient optimality") {
  auto g = grid(121, 25);
  auto [V, kappa] = soliton_potential(5.0, g);
  auto r = lowest_eigenpair(kappa, V);
  auto op = assemble_operator(kappa, V);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    auto v = random_field(g, rng);
    if (k % 2) {  // random perturbations of the ground state probe the minimum closely
      for (std::size_t n = 0; n < v.values().size(); ++n) v.values()[n] = r.u.values()[n] + 1e-3 * v.values()[n];
    }
    CHECK(op.bilinear(v, v) / inner(v, v) >= r.lambda - 1e-9);
  }
}

TEST_CASE("symmetric potential gives a phi-independent ground state") {
  auto g = grid();
  auto [V, kappa] = soliton_potential(3.0, g);
  auto r = lowest_eigenpair(kappa, V);
  auto avg = angular_average(r.u);
  double var = 0.0;
  for (int i = 0; i < g->n_s(); ++i)
    for (int j = 0; j < g->n_phi(); ++j) var += g->quad_weights()[g->index(i, j)] * std::pow(r.u(i, j) - avg[i], 2);
  CHECK(var <= 1e-8);
}

TEST_CASE("eigensolver preconditions") {
  auto g = grid(65, 17);
  auto [V, kappa] = soliton_potential(3.0, g);
  CHECK_THROWS_AS(lowest_eigenpair(-1.0, V), DomainError);
  CHECK_THROWS_AS(lowest_eigenpair(kappa, V.scaled(2.0)), DomainError);
  CHECK_THROWS_AS(lowest_eigenpair(kappa, V.scaled(-1.0)), DomainError);
}
