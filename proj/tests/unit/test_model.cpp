#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ckn/error.hpp"
#include "ckn/model.hpp"
#include "ckn/symmetric.hpp"

using namespace ckn;
using doctest::Approx;

namespace {

GridPtr grid5(MeasureMode mode, int n_s = 241, int n_phi = 49) {
  return build_grid(10.0, n_s, n_phi, make_params(5, 2.8, 1.0, mode));
}

}  // namespace

TEST_CASE("theta_critical") {
  CHECK(theta_critical(2.8, 5) == Approx(5.0 / 7.0).epsilon(1e-14));
  CHECK(std::abs(theta_critical(2.8, 5) - 0.714286) < 1e-6);
  CHECK(theta_critical(10.0 / 3.0, 5) == Approx(1.0).epsilon(1e-14));
  CHECK(theta_critical(2.0 + 1e-12, 7) < 1e-11);
  CHECK_THROWS_AS(theta_critical(2.0, 5), DomainError);
}

TEST_CASE("problem parameters are validated") {
  auto pr = make_params(5, 2.8, 0.8);
  CHECK(pr.q() == Approx(3.5));
  CHECK(pr.a_c() == Approx(1.5));
  CHECK_THROWS_AS(make_params(5, 10.0 / 3.0), DomainError);
  CHECK_THROWS_AS(make_params(5, 2.0), DomainError);
  CHECK_THROWS_AS(make_params(5, 2.8, 0.7), DomainError);
  CHECK_THROWS_AS(make_params(5, 2.8, 1.01), DomainError);
  CHECK_THROWS_AS(make_params(2, 2.8), DomainError);
  CHECK_THROWS_AS(measure_mode_from_string("lebesgue"), ConfigError);
}

TEST_CASE("grid quadrature") {
  auto g = grid5(MeasureMode::probability);
  auto one = Field::sample(g, [](double, double) { return 1.0; });
  CHECK(integrate(one) == Approx(20.0).epsilon(1e-12));

  auto gs = grid5(MeasureMode::surface);
  auto ones = Field::sample(gs, [](double, double) { return 1.0; });
  CHECK(integrate(ones) == Approx(20.0 * 8.0 * std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-10));

  for (int j : {0, g->n_phi() - 1}) CHECK(g->phi_weights()[j] == 0.0);
  for (std::size_t k = 1; k < g->s_nodes().size(); ++k) CHECK(g->s_nodes()[k] > g->s_nodes()[k - 1]);
  for (std::size_t k = 1; k < g->phi_nodes().size(); ++k) CHECK(g->phi_nodes()[k] > g->phi_nodes()[k - 1]);
}

TEST_CASE("second angular moment converges to 1/d at second order") {
  double err[2];
  int k = 0;
  for (int n_phi : {49, 97}) {
    auto g = grid5(MeasureMode::probability, 33, n_phi);
    auto c2 = Field::sample(g, [](double, double phi) { return std::cos(phi) * std::cos(phi); });
    err[k++] = std::abs(integrate(c2) - 4.0);
  }
  CHECK(err[0] < 2e-3);
  CHECK(std::log2(err[0] / err[1]) > 1.8);
}

TEST_CASE("grid sizes are checked") {
  auto pr = make_params(5, 2.8);
  CHECK_THROWS_AS(build_grid(0.0, 33, 9, pr), InvalidSizeError);
  CHECK_THROWS_AS(build_grid(10.0, 15, 9, pr), InvalidSizeError);
  CHECK_THROWS_AS(build_grid(10.0, 33, 7, pr), InvalidSizeError);
  CHECK(default_half_length(4.0) == Approx(8.0));
  CHECK(default_half_length(1.0) == Approx(12.0));
}

TEST_CASE("norms of the sampled soliton") {
  auto g = grid5(MeasureMode::surface);
  const double mu = mu_FS(2.8, 5);
  auto n = evaluate_norms(sample_soliton(mu, g));
  auto exact = soliton_norms(mu, 2.8, 5, MeasureMode::surface);
  CHECK(exact.Z == Approx(26.319 * 576.6).epsilon(1e-3));
  CHECK(n.Z == Approx(exact.Z).epsilon(5e-3));
  CHECK(n.X == Approx(exact.X).epsilon(5e-3));
  CHECK(n.Y == Approx(exact.Y).epsilon(5e-3));
}

TEST_CASE("norms of constants and scaled fields") {
  auto g = grid5(MeasureMode::surface, 65, 17);
  auto c = Field::sample(g, [](double, double) { return 2.5; });
  CHECK(evaluate_norms(c).X == 0.0);

  auto u = Field::sample(g, [](double s, double phi) { return std::exp(-s * s) * (1.2 + std::cos(phi)); });
  u.apply_boundary_conditions();
  auto a = evaluate_norms(u);
  auto b = evaluate_norms(u.scaled(-3.0));
  CHECK(b.X == Approx(9.0 * a.X).epsilon(1e-13));
  CHECK(b.Y == Approx(9.0 * a.Y).epsilon(1e-13));
  CHECK(b.Z == Approx(std::pow(3.0, 2.8) * a.Z).epsilon(1e-13));

  CHECK_THROWS_AS(evaluate_norms(Field(g)), SolverError);
}

TEST_CASE("quotient at the bifurcation point") {
  const double mu = mu_FS(2.8, 5);
  auto us = sample_soliton(mu, grid5(MeasureMode::surface));
  auto up = sample_soliton(mu, grid5(MeasureMode::probability));
  const double qs = evaluate_Q(us, mu, 1.0);
  const double qp = evaluate_Q(up, mu, 1.0);
  CHECK(qs == Approx(15.65).epsilon(0.05 / 15.65));
  CHECK(qp == Approx(6.149).epsilon(0.02 / 6.149));
  CHECK(qs == Approx(qp * std::pow(sphere_area(5), 0.8 / 2.8)).epsilon(1e-10));

  for (double theta : {0.72, 0.85, 1.0})
    CHECK(evaluate_Q(us.scaled(3.0), 2.0, theta) == Approx(evaluate_Q(us, 2.0, theta)).epsilon(1e-12));

  CHECK_THROWS_AS(evaluate_Q(us, -1e6, 0.8), DomainError);
}

TEST_CASE("pairing identity for the discrete soliton") {
  auto g = grid5(MeasureMode::surface);
  for (double mu : {1.0, 4.0, 9.0}) {
    auto n = evaluate_norms(discrete_soliton(mu, g));
    CHECK(n.X + mu * n.Y == Approx(n.Z).epsilon(1e-8));
  }
}
