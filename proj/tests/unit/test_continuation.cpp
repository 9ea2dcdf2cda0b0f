#include <doctest.h>

#include <cmath>
#include <string>

#include "ckn/continuation.hpp"
#include "ckn/error.hpp"
#include "ckn/fixedpoint.hpp"
#include "ckn/model.hpp"
#include "ckn/symmetric.hpp"

using namespace ckn;
using doctest::Approx;

namespace {

GridPtr grid() { return build_grid(10.0, 241, 49, make_params(5, 2.8)); }

double symmetric_Q(double mu) { return std::pow(soliton_norms(mu, 2.8, 5, MeasureMode::surface).Z, 0.8 / 2.8); }

}  // namespace

TEST_CASE("asymmetry of simple fields") {
  auto g = build_grid(10.0, 121, 97, make_params(5, 2.8));
  auto gs = [](double s) { return std::exp(-s * s); };
  auto flat = Field::sample(g, [&](double s, double) { return gs(s); });
  auto odd = Field::sample(g, [&](double s, double phi) { return gs(s) * std::cos(phi); });
  auto mixed = Field::sample(g, [&](double s, double phi) { return gs(s) * (1.0 + 0.1 * std::cos(phi)); });
  CHECK(asymmetry(flat) < 1e-14);
  CHECK(asymmetry(odd) == Approx(1.0).epsilon(1e-12));
  CHECK(asymmetry(mixed) == Approx(0.1 * std::sqrt(0.2) / std::sqrt(1.0 + 0.01 / 5.0)).epsilon(1e-3));
  CHECK(asymmetry(mixed) == Approx(0.04468).epsilon(1e-3));
  CHECK_THROWS_AS(asymmetry(Field(g)), SolverError);
}

TEST_CASE("initialization above the threshold breaks symmetry") {
  auto g = grid();
  const double mu0 = 1.2 * mu_FS(2.8, 5);
  auto seed = initialize(mu0, -1.0, g);
  CHECK(seed.point.asymmetry > 1e-3);
  CHECK(seed.record.q_descent < seed.record.q_start);
  CHECK(std::pow(seed.point.Z, 0.8 / 2.8) < symmetric_Q(seed.point.mu));
  CHECK(seed.point.X + seed.point.mu * seed.point.Y == Approx(seed.point.Z).epsilon(1e-5));
  CHECK(seed.point.kappa == Approx(std::pow(seed.point.Z, 0.8 / 2.8)).epsilon(1e-6));
  CHECK(seed.point.asymmetry <= 1.0);
  CHECK_FALSE(seed.record.degenerate);

  SUBCASE("upward continuation") {
    const double eta = seed.point.kappa / 200.0;
    int stored = 0;
    auto sink = [&](const BranchPoint&, const Field& u) {
      CHECK(u.all_finite());
      return "pt" + std::to_string(stored++);
    };
    auto up = continue_branch(seed, eta, Direction::up, seed.point.kappa + 4.5 * eta, {}, sink);
    REQUIRE(up.points.size() >= 4);
    CHECK(stored == static_cast<int>(up.points.size()));
    CHECK(up.points.back().kappa == seed.point.kappa + 4.5 * eta);
    double prev = seed.point.kappa;
    for (const auto& pt : up.points) {
      CHECK(pt.kappa - prev > 0.1 * eta);
      prev = pt.kappa;
      CHECK(pt.mu > seed.point.mu);
      CHECK(pt.asymmetry > seed.point.asymmetry);
      CHECK(pt.kappa < symmetric_Q(pt.mu));
      CHECK(pt.X + pt.mu * pt.Y == Approx(pt.Z).epsilon(1e-5));
      CHECK_FALSE(pt.field_ref.empty());
    }
    // a whole number of steps ends exactly at kappa_stop, without a sliver step
    const double stop = seed.point.kappa * 1.03;
    auto whole = continue_branch(seed, seed.point.kappa * 0.01, Direction::up, stop);
    REQUIRE(whole.points.size() == 3);
    CHECK(whole.points.back().kappa == stop);

    auto merged = merge_branches(seed, Branch{}, up);
    CHECK(merged.points.size() == up.points.size() + 1);

    extend_with_symmetric(merged, 0.5, 3.0, 10);
    CHECK(merged.points.size() == up.points.size() + 11);
    for (std::size_t k = 1; k < merged.points.size(); ++k) CHECK(merged.points[k].kappa > merged.points[k - 1].kappa);
    CHECK(merged.points.front().closed_form);
    CHECK(merged.points.front().asymmetry == 0.0);
  }
}

TEST_CASE("initialization below the threshold falls back") {
  auto g = grid();
  const double mf = mu_FS(2.8, 5);
  CHECK_THROWS_AS(initialize(0.9 * mf, -1.0, g), FellBackToSymmetricError);

  auto degenerate = initialize(1.2 * mf, 0.0, g);
  CHECK(degenerate.record.degenerate);
  CHECK(degenerate.point.asymmetry < 1e-8);
  CHECK(degenerate.point.mu == Approx(1.2 * mf).epsilon(1e-8));
}
