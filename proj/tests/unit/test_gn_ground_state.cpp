#include <doctest.h>

#include <cmath>

#include "ckn/error.hpp"
#include "ckn/gn_ground_state.hpp"
#include "ckn/params.hpp"

using namespace ckn;
using doctest::Approx;

TEST_CASE("one-dimensional reduction") {
  for (double p : {2.8, 4.0}) {
    auto prof = radial_ground_state(p, 1);
    CHECK(prof.u0 == Approx(std::pow(p / 2.0, 1.0 / (p - 2.0))).epsilon(1e-9));
  }
}

TEST_CASE("ground state in dimension five") {
  auto prof = radial_ground_state(2.8, 5);
  CHECK(prof.pohozaev_residual() <= 1e-5);
  auto n = prof.norms(MeasureMode::surface);
  CHECK(n.X + n.Y == Approx(n.Z).epsilon(1e-6));
  CHECK(n.X == Approx(theta_critical(2.8, 5) * n.Z).epsilon(1e-5));
  REQUIRE(prof.u_values.size() > 10);
  CHECK(prof.u_values.front() == Approx(prof.u0).epsilon(1e-6));
  for (std::size_t k = 1; k < prof.u_values.size(); ++k) {
    CHECK(prof.u_values[k] > 0.0);
    CHECK(prof.u_values[k] < prof.u_values[k - 1]);
  }
  CHECK(prof.u_values.back() < 1e-3 * prof.u0);

  SUBCASE("shooting dichotomy") {
    CHECK(shoot(prof.u0 * 1.01, 2.8, 5) == ShotOutcome::overshoot);
    CHECK(shoot(prof.u0 * 0.99, 2.8, 5) == ShotOutcome::undershoot);
    CHECK(shoot(prof.u0 * 1.5, 2.8, 5) == ShotOutcome::overshoot);
    CHECK(shoot(prof.u0 * 0.5, 2.8, 5) == ShotOutcome::undershoot);
  }

  SUBCASE("limit level") {
    const double J = J_infinity(prof, MeasureMode::surface);
    const double k = gn_prefactor(2.8, 5);
    const double Th = 5.0 / 7.0;
    CHECK(k == Approx(std::pow(Th, Th) * std::pow(1 - Th, 1 - Th)).epsilon(1e-14));
    CHECK(J == Approx(k * std::pow(n.Z, 1.0 - 2.0 / 2.8)).epsilon(1e-6));
    CHECK(J == Approx(J_infinity(prof, MeasureMode::probability) * std::pow(sphere_area(5), 0.8 / 2.8)).epsilon(1e-12));
    CHECK(std::isfinite(J));
    CHECK(J > 0.0);
  }
}

TEST_CASE("other admissible exponents") {
  for (auto [p, d] : {std::pair{2.5, 4}, {3.0, 3}, {2.3, 6}}) {
    auto prof = radial_ground_state(p, d);
    CHECK(prof.pohozaev_residual() <= 1e-5);
  }
}

TEST_CASE("limit level is insensitive to the radial domain") {
  const double a = J_infinity(2.8, 5);
  RadialOptions fine;
  fine.R = 100.0;
  fine.max_step = 0.025;
  const double b = J_infinity(radial_ground_state(2.8, 5, fine), MeasureMode::surface);
  CHECK(std::abs(a - b) <= 1e-3 * a);
}

TEST_CASE("exponent range") {
  CHECK_THROWS_AS(radial_ground_state(10.0 / 3.0, 5), DomainError);
  CHECK_THROWS_AS(radial_ground_state(2.0, 5), DomainError);
}
