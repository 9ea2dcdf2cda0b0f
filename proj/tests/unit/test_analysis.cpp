#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ckn/analysis.hpp"
#include "ckn/error.hpp"
#include "ckn/model.hpp"
#include "ckn/symmetric.hpp"

using namespace ckn;
using doctest::Approx;

namespace {

ThetaCurve line(double mu_lo, double mu_hi, int n, double (*lambda)(double), double (*J)(double), bool sym) {
  ThetaCurve c;
  for (int k = 0; k < n; ++k) {
    const double mu = mu_lo + (mu_hi - mu_lo) * k / (n - 1);
    c.points.push_back({mu, lambda(mu), J(mu), sym});
  }
  return c;
}

BranchPoint point_from(const Norms& n, double mu, double kappa, double asym) {
  BranchPoint b;
  b.kappa = kappa;
  b.mu = mu;
  b.X = n.X;
  b.Y = n.Y;
  b.Z = n.Z;
  b.t = n.X / n.Y;
  b.asymmetry = asym;
  return b;
}

}  // namespace

TEST_CASE("Lambda_FS") {
  CHECK(lambda_FS(2.8, 1.0, 5) == Approx(mu_FS(2.8, 5)).epsilon(1e-14));
  CHECK(lambda_FS(2.8, 5.0 / 7.0, 5) == Approx(2.7778).epsilon(1e-4));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const int d = 3 + static_cast<int>(4 * U(rng));
    const double p = 2.0 + (2.0 * d / (d - 2.0) - 2.0) * (0.01 + 0.98 * U(rng));
    const double theta = theta_critical(p, d) + (1.0 - theta_critical(p, d)) * U(rng);
    const double m = mu_FS(p, d);
    const double other = theta * m - (1.0 - theta) * m * (p - 2) / (p + 2);
    CHECK(std::abs(lambda_FS(p, theta, d) - other) <= 1e-12 * std::abs(other));
  }
  CHECK_THROWS_AS(lambda_FS(2.0, 0.9, 5), DomainError);
}

TEST_CASE("theta map of a symmetric family") {
  auto pr = make_params(5, 2.8);
  auto mus = log_grid(0.1, 50.0, 40);
  auto one = map_to_theta(symmetric_curve(mus, 1.0, pr), 1.0, pr);
  for (const auto& pt : one.points) {
    CHECK(pt.Lambda == Approx(pt.mu).epsilon(1e-14));
    CHECK(pt.J == Approx(std::pow(soliton_norms(pt.mu, 2.8, 5, pr.measure_mode).Z, 0.8 / 2.8)).epsilon(1e-13));
  }
  for (double theta : {5.0 / 7.0, 0.8, 0.95}) {
    auto c = map_to_theta(symmetric_curve(mus, theta, pr), theta, pr);
    CHECK_FALSE(c.non_monotone);
    for (const auto& pt : c.points) {
      CHECK(pt.symmetric);
      CHECK(pt.J > 0.0);
      CHECK(pt.Lambda == Approx(pt.mu * (theta - (1 - theta) * 0.8 / 4.8)).epsilon(1e-13));
    }
  }
}

TEST_CASE("theta map of a branch agrees with direct evaluation") {
  auto g = build_grid(10.0, 121, 25, make_params(5, 2.8));
  Branch b;
  b.params = g->params();
  std::vector<Field> fields;
  for (int k = 0; k < 5; ++k) {
    const double mu = 3.0 + k;
    auto u = Field::sample(g, [&](double s, double phi) {
      return soliton(mu, 2.8).value(s) * (1.0 + 0.1 * k * std::cos(phi));
    });
    u.apply_boundary_conditions();
    b.points.push_back(point_from(evaluate_norms(u), mu, 1.0 + k, asymmetry(u)));
    fields.push_back(u);
  }
  for (double theta : {5.0 / 7.0, 0.8, 1.0}) {
    auto c = map_to_theta(b, theta);
    REQUIRE(c.points.size() == fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto& pt = c.points[k];
      CHECK(pt.J == Approx(evaluate_Q(fields[k], pt.Lambda, theta)).epsilon(1e-10));
      CHECK(pt.symmetric == (k == 0));
      if (theta == 1.0) CHECK(pt.Lambda == pt.mu);
    }
  }
  CHECK_THROWS_AS(map_to_theta(b, 0.7), DomainError);
  CHECK_THROWS_AS(map_to_theta(b, 1.01), DomainError);
}

TEST_CASE("monotone pieces") {
  auto c = line(0.0, 4.0, 9, [](double m) { return (m - 2.0) * (m - 2.0); }, [](double m) { return 1.0 + m; }, false);
  auto pieces = monotone_pieces(c.points);
  REQUIRE(pieces.size() == 2);
  CHECK(pieces[0].back().mu == pieces[1].front().mu);
}

TEST_CASE("crossing of two straight curves") {
  auto sym = line(0.0, 10.0, 11, [](double m) { return m; }, [](double m) { return m; }, true);
  auto ns = line(2.0, 11.0, 10, [](double m) { return m - 1.0; }, [](double m) { return 5.0 + 0.5 * (m - 6.0); }, false);
  auto r = detect_crossing(sym, ns);
  REQUIRE(r.found());
  CHECK_FALSE(r.ambiguous);
  const auto& x = r.unique();
  CHECK(x.Lambda1 == Approx(5.0).epsilon(1e-12));
  CHECK(x.J1 == Approx(5.0).epsilon(1e-12));
  CHECK(x.mu1_star == Approx(5.0).epsilon(1e-12));
  CHECK(x.mu1 == Approx(6.0).epsilon(1e-12));

  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(k * 0.05);
  std::vector<ThetaCurve> both{sym, ns};
  auto env = min_envelope(both, grid);
  REQUIRE(env.jumps.size() == 1);
  CHECK(std::abs(env.jumps[0].Lambda - x.Lambda1) <= 0.05);
  CHECK(env.jumps[0].from == 0);
  CHECK(env.jumps[0].to == 1);
  for (const auto& e : env.points) {
    CHECK(e.J <= e.Lambda + 1e-12);
    if (e.Lambda >= 1.0) CHECK(e.J <= 5.0 + 0.5 * (e.Lambda - 5.0) + 1e-12);
  }
}

TEST_CASE("no crossing when one curve stays below") {
  auto sym = line(0.0, 10.0, 11, [](double m) { return m; }, [](double m) { return m; }, true);
  auto ns = line(4.0, 10.0, 7, [](double m) { return m; }, [](double m) { return m - 0.5 - 0.1 * m; }, false);
  auto r = detect_crossing(sym, ns);
  CHECK_FALSE(r.found());
  CHECK_FALSE(r.ambiguous);
  CHECK_THROWS_AS(r.unique(), SolverError);
}

TEST_CASE("identical curves are ambiguous") {
  auto sym = line(1.0, 10.0, 10, [](double m) { return m; }, [](double m) { return std::sqrt(m); }, true);
  auto ns = sym;
  for (auto& pt : ns.points) pt.symmetric = false;
  auto r = detect_crossing(sym, ns);
  CHECK(r.ambiguous);
  CHECK_THROWS_AS(r.unique(), SolverError);
}

TEST_CASE("envelope of a single curve is the curve") {
  auto c = line(1.0, 5.0, 5, [](double m) { return m; }, [](double m) { return m * m; }, true);
  std::vector<double> grid{1.0, 2.0, 3.0, 4.0, 5.0, 7.0};
  std::vector<ThetaCurve> one{c};
  auto env = min_envelope(one, grid);
  REQUIRE(env.points.size() == 5);
  for (const auto& e : env.points) {
    CHECK(e.J == Approx(e.Lambda * e.Lambda));
    CHECK(e.source == 0);
  }
  CHECK(env.jumps.empty());
  std::vector<double> outside{20.0, 30.0};
  CHECK_THROWS_AS(min_envelope(one, outside), DomainError);
  CHECK_THROWS_AS(min_envelope(std::span<const ThetaCurve>{}, grid), DomainError);
}

TEST_CASE("GN level on the symmetric curve") {
  const double p = 2.8, Th = theta_critical(p, 5);
  const double J_inf = 7.71937;
  auto lv = lambda_GN(p, 5, J_inf);
  CHECK(lv.residual <= 1e-8);
  CHECK(lv.Lambda > 0.0);
  auto pr = make_params(5, p, Th);
  std::vector<double> m{lv.mu};
  auto pt = symmetric_curve(m, Th, pr)[0];
  CHECK(pt.J == Approx(J_inf).epsilon(1e-8));
  CHECK(pt.Lambda == Approx(lv.Lambda).epsilon(1e-12));

  const double factor = std::pow(sphere_area(5), (p - 2) / p);
  auto lp = lambda_GN(p, 5, J_inf / factor, MeasureMode::probability);
  CHECK(std::abs(lp.Lambda - lv.Lambda) <= 1e-8 * lv.Lambda);

  CHECK_THROWS_AS(lambda_GN(p, 5, -1.0), DomainError);
}

TEST_CASE("best constant") {
  CHECK(best_constant(1.0) == 1.0);
  CHECK(best_constant(15.65) == Approx(0.0639).epsilon(1e-3));
  CHECK(best_constant(2.0) > best_constant(3.0));
  CHECK_THROWS_AS(best_constant(0.0), DomainError);
}
