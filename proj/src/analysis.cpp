#include "ckn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ckn/error.hpp"

namespace ckn {

namespace {

void check_theta(double theta, const ProblemParams& params) {
  const double tc = params.theta_c();
  if (!(theta >= tc - 1e-12 && theta <= 1.0)) {
    std::ostringstream os;
    os << "map_to_theta: theta=" << theta << " outside [" << tc << ", 1]";
    throw DomainError(os.str());
  }
}

bool lambda_non_monotone(const std::vector<ThetaPoint>& pts) {
  int dir = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = pts[i].Lambda - pts[i - 1].Lambda;
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (dir != 0 && s != dir) return true;
    dir = s;
  }
  return false;
}

// Linear interpolation of a monotone piece in Lambda; nullopt outside.
std::optional<ThetaPoint> interpolate(const std::vector<ThetaPoint>& piece, double Lambda) {
  if (piece.empty()) return std::nullopt;
  if (piece.size() == 1) {
    if (piece[0].Lambda == Lambda) return piece[0];
    return std::nullopt;
  }
  const bool inc = piece.back().Lambda > piece.front().Lambda;
  const double lo = inc ? piece.front().Lambda : piece.back().Lambda;
  const double hi = inc ? piece.back().Lambda : piece.front().Lambda;
  if (Lambda < lo || Lambda > hi) return std::nullopt;
  auto it = inc ? std::lower_bound(piece.begin(), piece.end(), Lambda,
                                   [](const ThetaPoint& a, double v) { return a.Lambda < v; })
                : std::lower_bound(piece.begin(), piece.end(), Lambda,
                                   [](const ThetaPoint& a, double v) { return a.Lambda > v; });
  if (it == piece.begin()) return *it;
  if (it == piece.end()) return piece.back();
  const ThetaPoint& b = *it;
  const ThetaPoint& a = *(it - 1);
  const double w = (Lambda - a.Lambda) / (b.Lambda - a.Lambda);
  ThetaPoint out;
  out.Lambda = Lambda;
  out.mu = a.mu + w * (b.mu - a.mu);
  out.J = a.J + w * (b.J - a.J);
  out.symmetric = a.symmetric && b.symmetric;
  return out;
}

std::pair<double, double> lambda_range(const std::vector<ThetaPoint>& piece) {
  const double a = piece.front().Lambda;
  const double b = piece.back().Lambda;
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace

double theta_energy(const Norms& n, double mu, double theta, double p) {
  return std::pow(theta, theta) * quotient_from_norms(n, mu, theta, p);
}

double theta_lambda(const Norms& n, double mu, double theta) {
  return theta * mu - (1.0 - theta) * n.X / n.Y;
}

ThetaCurve map_to_theta(const Branch& branch, double theta, std::string source, double symmetric_asymmetry) {
  check_theta(theta, branch.params);
  ThetaCurve c{theta, {}, std::move(source), false};
  c.points.reserve(branch.points.size());
  for (const BranchPoint& bp : branch.points) {
    const Norms n{bp.X, bp.Y, bp.Z};
    c.points.push_back({bp.mu, theta_lambda(n, bp.mu, theta), theta_energy(n, bp.mu, theta, branch.params.p),
                        bp.closed_form || bp.asymmetry <= symmetric_asymmetry});
  }
  std::stable_sort(c.points.begin(), c.points.end(),
                   [](const ThetaPoint& a, const ThetaPoint& b) { return a.mu < b.mu; });
  c.non_monotone = lambda_non_monotone(c.points);
  return c;
}

ThetaCurve map_to_theta(std::span<const SymmetricCurvePoint> curve, double theta, const ProblemParams& params,
                        std::string source) {
  check_theta(theta, params);
  ThetaCurve c{theta, {}, std::move(source), false};
  for (const SymmetricCurvePoint& sp : curve)
    c.points.push_back(
        {sp.mu, theta_lambda(sp.norms, sp.mu, theta), theta_energy(sp.norms, sp.mu, theta, params.p), true});
  std::stable_sort(c.points.begin(), c.points.end(),
                   [](const ThetaPoint& a, const ThetaPoint& b) { return a.mu < b.mu; });
  c.non_monotone = lambda_non_monotone(c.points);
  return c;
}

double lambda_FS(double p, double theta, int d) {
  if (!(p > 2.0)) throw DomainError("lambda_FS: p must exceed 2");
  if (d < 2) throw DomainError("lambda_FS: d must be at least 2");
  return 4.0 * (d - 1) / (p * p - 4.0) * ((2.0 * theta - 1.0) * p + 2.0) / (p + 2.0);
}

std::vector<std::vector<ThetaPoint>> monotone_pieces(std::span<const ThetaPoint> points) {
  std::vector<std::vector<ThetaPoint>> out;
  std::vector<ThetaPoint> cur;
  int dir = 0;
  for (const ThetaPoint& pt : points) {
    if (cur.empty()) {
      cur.push_back(pt);
      continue;
    }
    const double d = pt.Lambda - cur.back().Lambda;
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (dir == 0 || s == dir) {
      dir = s;
      cur.push_back(pt);
      continue;
    }
    const ThetaPoint turn = cur.back();
    out.push_back(std::move(cur));
    cur = {turn, pt};
    dir = s;
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

const Crossing& CrossingResult::unique() const {
  if (crossings.empty()) throw SolverError("detect_crossing: no crossing");
  if (ambiguous) throw SolverError("detect_crossing: ambiguous crossing");
  return crossings.front();
}

CrossingResult detect_crossing(const ThetaCurve& sym, const ThetaCurve& nonsym, double rel_tol) {
  // Runs of consecutive non-symmetric points.
  std::vector<std::vector<ThetaPoint>> runs;
  for (const ThetaPoint& pt : nonsym.points) {
    if (pt.symmetric) {
      if (!runs.empty() && !runs.back().empty()) runs.emplace_back();
      continue;
    }
    if (runs.empty()) runs.emplace_back();
    runs.back().push_back(pt);
  }
  std::vector<std::vector<ThetaPoint>> npieces;
  for (const auto& r : runs) {
    if (r.size() < 2) continue;
    for (auto& pc : monotone_pieces(r)) npieces.push_back(std::move(pc));
  }
  const auto spieces = monotone_pieces(sym.points);

  CrossingResult res;
  for (const auto& sp : spieces) {
    if (sp.size() < 2) continue;
    for (const auto& np : npieces) {
      if (np.size() < 2) continue;
      const auto [sa, sb] = lambda_range(sp);
      const auto [na, nb] = lambda_range(np);
      const double a = std::max(sa, na);
      const double b = std::min(sb, nb);
      if (!(a < b)) continue;
      std::vector<double> knots{a, b};
      for (const auto* pc : {&sp, &np})
        for (const ThetaPoint& q : *pc)
          if (q.Lambda > a && q.Lambda < b) knots.push_back(q.Lambda);
      std::sort(knots.begin(), knots.end());
      knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

      std::vector<double> D(knots.size());
      for (std::size_t i = 0; i < knots.size(); ++i)
        D[i] = interpolate(sp, knots[i])->J - interpolate(np, knots[i])->J;

      auto record = [&](double L) {
        const ThetaPoint s = *interpolate(sp, L);
        const ThetaPoint n = *interpolate(np, L);
        res.crossings.push_back({L, 0.5 * (s.J + n.J), s.mu, n.mu});
      };
      // Knots inside the noise band carry no sign; a crossing is a sign
      // change between consecutive signed knots.
      auto small = [&](std::size_t i) {
        return std::abs(D[i]) <= rel_tol * interpolate(np, knots[i])->J;
      };
      std::optional<std::size_t> last;
      bool flat = true;
      for (std::size_t i = 0; i < knots.size(); ++i) {
        if (small(i)) continue;
        flat = false;
        if (last && (D[*last] < 0.0) != (D[i] < 0.0)) {
          if (i == *last + 1) {
            record(knots[*last] + (knots[i] - knots[*last]) * D[*last] / (D[*last] - D[i]));
          } else {
            std::size_t k = *last + 1;
            for (std::size_t j = k; j < i; ++j)
              if (std::abs(D[j]) < std::abs(D[k])) k = j;
            record(knots[k]);
          }
        }
        last = i;
      }
      if (flat && knots.size() >= 4) {
        res.ambiguous = true;
        record(0.5 * (a + b));
      }
    }
  }
  if (res.crossings.size() > 1) res.ambiguous = true;
  return res;
}

Envelope min_envelope(std::span<const ThetaCurve> curves, std::span<const double> Lambda_grid) {
  if (curves.empty()) throw DomainError("min_envelope: no curves");
  // Symmetric points of a mixed curve repeat the symmetric family; only the
  // non-symmetric part of such a curve competes.
  std::vector<std::vector<std::vector<ThetaPoint>>> pieces(curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& pts = curves[c].points;
    const bool mixed = std::any_of(pts.begin(), pts.end(), [](const ThetaPoint& q) { return !q.symmetric; });
    std::vector<ThetaPoint> run;
    auto flush = [&] {
      for (auto& pc : monotone_pieces(run)) pieces[c].push_back(std::move(pc));
      run.clear();
    };
    for (const ThetaPoint& q : pts) {
      if (mixed && q.symmetric) {
        flush();
        continue;
      }
      run.push_back(q);
    }
    flush();
  }

  Envelope env;
  std::vector<double> prev_values;
  for (double L : Lambda_grid) {
    EnvelopePoint best{L, std::numeric_limits<double>::infinity(), -1};
    std::vector<double> values(curves.size(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < curves.size(); ++c)
      for (const auto& pc : pieces[c])
        if (auto v = interpolate(pc, L)) values[c] = std::min(values[c], v->J);
    for (std::size_t c = 0; c < curves.size(); ++c)
      if (values[c] < best.J) {
        best.J = values[c];
        best.source = static_cast<int>(c);
      }
    if (best.source < 0) continue;
    // A switch caused by a curve starting or ending is not a jump.
    if (!env.points.empty() && env.points.back().source != best.source) {
      const int from = env.points.back().source;
      const bool both = std::isfinite(values[from]) && std::isfinite(prev_values[best.source]);
      if (both) env.jumps.push_back({0.5 * (env.points.back().Lambda + L), from, best.source});
    }
    env.points.push_back(best);
    prev_values = std::move(values);
  }
  if (env.points.empty()) throw DomainError("min_envelope: no curve is defined on the Lambda grid");
  return env;
}

GNLevel lambda_GN(double p, int d, double J_inf, MeasureMode mode) {
  if (!(J_inf > 0.0)) throw DomainError("lambda_GN: J_inf must be positive");
  const double theta = theta_critical(p, d);
  auto J = [&](double mu) { return theta_energy(soliton_norms(mu, p, d, mode), mu, theta, p); };
  auto Lam = [&](double mu) { return theta_lambda(soliton_norms(mu, p, d, mode), mu, theta); };

  const auto mus = log_grid(1e-6, 1e6, 481);
  std::vector<double> f(mus.size());
  for (std::size_t i = 0; i < mus.size(); ++i) f[i] = J(mus[i]) - J_inf;
  if (f.back() < 0.0)
    throw SolverError("lambda_GN: J_*^Theta stays below J_inf, the level set is unbounded");

  std::optional<GNLevel> best;
  auto consider = [&](double mu) {
    GNLevel g{Lam(mu), mu, std::abs(J(mu) - J_inf)};
    if (!best || g.Lambda > best->Lambda) best = g;
  };
  for (std::size_t i = 0; i + 1 < mus.size(); ++i) {
    if (f[i] < 0.0) consider(mus[i]);
    if ((f[i] < 0.0) == (f[i + 1] < 0.0)) continue;
    double lo = mus[i];
    double hi = mus[i + 1];
    const bool rising = f[i] < 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = J(mid) - J_inf;
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == rising)
        lo = mid;
      else
        hi = mid;
    }
    consider(rising ? lo : hi);
  }
  if (!best) throw SolverError("lambda_GN: J_*^Theta exceeds J_inf for every sampled mu");
  return *best;
}

double best_constant(double J) {
  if (!(J > 0.0)) throw DomainError("best_constant: J must be positive");
  return 1.0 / J;
}

}  // namespace ckn
