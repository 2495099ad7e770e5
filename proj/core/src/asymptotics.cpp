#include "carnot/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace carnot {

GroupPoint line_point(const StratifiedAlgebra& A, const Line& L, double t) {
  if (L.direction.c.size() != A.dim() || L.base.x.size() != A.dim())
    throw DimensionMismatch("line data has wrong dimension");
  return bch_product(A, L.base, exp_point(AlgebraVector{t * L.direction.c}));
}

GroupPoint blow(const DilatedCurveView& view, double t) {
  if (view.algebra == nullptr || !view.source) throw InvalidInput("empty curve view");
  if (!(view.h > 0.0)) throw InvalidInput("dilation parameter must be positive");
  const double s = view.t_bar + view.h * t;
  if (view.domain && (s < view.domain->first || s > view.domain->second))
    throw DomainError("dilated curve evaluated outside the source domain");
  const StratifiedAlgebra& A = *view.algebra;
  const GroupPoint at_base = view.source(view.t_bar);
  return dilate(A, 1.0 / view.h, bch_product(A, inverse(A, at_base), view.source(s)));
}

BlowdownReport blowdown_estimate(const StratifiedAlgebra& A, const CurveFn& source,
                                 const std::vector<double>& h_sequence, double window,
                                 int samples, const DistanceBoundProvider& provider,
                                 double t_bar) {
  if (h_sequence.empty()) throw InvalidInput("empty dilation sequence");
  if (!std::is_sorted(h_sequence.begin(), h_sequence.end()))
    throw InvalidInput("dilation sequence must be increasing");
  if (samples < 2 || !(window > 0.0)) throw InvalidInput("bad blowdown window");

  BlowdownReport report;
  report.h = h_sequence;
  for (int i = 0; i < samples; ++i)
    report.grid.push_back(-window + 2.0 * window * i / (samples - 1));

  for (double h : h_sequence) {
    DilatedCurveView view{&A, source, h, t_bar, std::nullopt};
    std::vector<GroupPoint> row;
    row.reserve(report.grid.size());
    for (double t : report.grid) row.push_back(blow(view, t));
    report.dilates.push_back(std::move(row));
  }
  for (std::size_t j = 0; j + 1 < report.dilates.size(); ++j) {
    DistanceInterval sup{0.0, 0.0};
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
      const DistanceInterval d =
          provider.distance(report.dilates[j][i], report.dilates[j + 1][i]);
      sup.lower = std::max(sup.lower, d.lower);
      sup.upper = std::max(sup.upper, d.upper);
    }
    report.consecutive_sup.push_back(sup);
  }
  return report;
}

EuclideanBlowdown euclidean_blowdown(const std::vector<double>& times,
                                     const std::vector<Eigen::VectorXd>& points,
                                     double C) {
  if (times.size() != points.size() || times.size() < 3)
    throw InvalidInput("euclidean_blowdown needs matched times and points");
  if (C < 0.0) throw InvalidInput("negative quasi-geodesic constant");
  const std::size_t n = times.size();

  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(times[i] < times[i + 1])) throw InvalidInput("times must be increasing");

  // (1,C) validation over every sampled pair.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dt = std::abs(times[i] - times[j]);
      const double d = (points[i] - points[j]).norm();
      if (d > dt + C + 1e-9 || d < dt - C - 1e-9)
        throw NotAQuasiGeodesic("samples violate the (1,C) bounds", times[i], times[j]);
    }

  // Translate so gamma(0) = 0 (sample nearest to t = 0).
  std::size_t anchor = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(times[i]) < std::abs(times[anchor])) anchor = i;
  std::vector<Eigen::VectorXd> p(points);
  const Eigen::VectorXd shift = points[anchor];
  for (auto& v : p) v -= shift;

  EuclideanBlowdown out;
  const double floor = std::max(2.0 * C, 1e-9);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double t = times[i], s = times[j];
      const bool positive_side = t >= s && s >= floor;
      const bool negative_side = t <= s && s <= -floor;
      if (!positive_side && !negative_side) continue;
      const double nt = p[i].norm(), ns = p[j].norm();
      if (nt == 0.0 || ns == 0.0) continue;
      const double one_minus_cos = 1.0 - p[i].dot(p[j]) / (nt * ns);
      out.max_angle_excess =
          std::max(out.max_angle_excess, one_minus_cos - 24.0 / std::abs(s));
      ++out.pairs_checked;
    }

  out.v_plus = p[n - 1] / p[n - 1].norm();
  out.v_minus = p[0] / p[0].norm();
  out.antipodal_error = (out.v_plus + out.v_minus).norm();
  return out;
}

std::optional<LineMatch> lines_finite_distance(const StratifiedAlgebra& A,
                                               const Line& L1, const Line& L2) {
  const Eigen::VectorXd& X = L1.direction.c;
  const Eigen::VectorXd& Y = L2.direction.c;
  if (X.norm() == 0.0 || Y.norm() == 0.0)
    throw InvalidInput("line with zero direction");

  const GroupPoint g_inv_h = bch_product(A, inverse(A, L1.base), L2.base);
  const Eigen::VectorXd V = adjoint(A, g_inv_h) * Y;
  const double c = X.dot(V) / V.squaredNorm();
  const double residual = (X - c * V).norm();
  if (c <= 0.0 || residual > 1e-10 * std::max(1.0, X.norm())) return std::nullopt;

  LineMatch match;
  match.c = c;
  match.fit_residual = residual;
  // L1(t) = L2(ct) k with k = L2(ct)^{-1} L1(t), constant in t; take t = 0
  // and confirm at t = +-1.
  match.k = bch_product(A, inverse(A, line_point(A, L2, 0.0)), line_point(A, L1, 0.0));
  for (double t : {1.0, -1.0}) {
    const GroupPoint lhs = line_point(A, L1, t);
    const GroupPoint rhs = bch_product(A, line_point(A, L2, c * t), match.k);
    if ((lhs.x - rhs.x).norm() > 1e-8 * std::max(1.0, lhs.x.norm()))
      return std::nullopt;
  }
  return match;
}

DistanceInterval hausdorff_truncated(const StratifiedAlgebra& A,
                                     const std::vector<ParamPoint>& a,
                                     const std::vector<ParamPoint>& b,
                                     const DistanceBoundProvider& provider, double T) {
  (void)A;
  std::vector<const ParamPoint*> wa, wb;
  for (const auto& s : a)
    if (std::abs(s.t) <= T) wa.push_back(&s);
  for (const auto& s : b)
    if (std::abs(s.t) <= T) wb.push_back(&s);
  if (wa.empty() || wb.empty())
    throw InvalidInput("hausdorff_truncated: a set is empty on the window");

  auto directed = [&](const std::vector<const ParamPoint*>& from,
                      const std::vector<const ParamPoint*>& to) {
    DistanceInterval sup{0.0, 0.0};
    for (const auto* s : from) {
      DistanceInterval inf{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
      for (const auto* t : to) {
        const DistanceInterval d = provider.distance(s->p, t->p);
        inf.lower = std::min(inf.lower, d.lower);
        inf.upper = std::min(inf.upper, d.upper);
      }
      sup.lower = std::max(sup.lower, inf.lower);
      sup.upper = std::max(sup.upper, inf.upper);
    }
    return sup;
  };
  const DistanceInterval ab = directed(wa, wb);
  const DistanceInterval ba = directed(wb, wa);
  return {std::max(ab.lower, ba.lower), std::max(ab.upper, ba.upper)};
}

GroupPoint asymptote_residual(const StratifiedAlgebra& A, const CurveFn& curve,
                              const Line& L, double t) {
  return bch_product(A, inverse(A, line_point(A, L, t)), curve(t));
}

TangentCheckReport quantified_tangent_check(const StratifiedAlgebra& A,
                                            const CurveFn& curve, double t_bar,
                                            double delta, int pairs,
                                            unsigned long long seed) {
  if (!A.structurally_equal(engel_group()))
    throw UnsupportedGroup(
        "quantified tangent check needs the Engel group (exact quotient distance)");
  if (!(delta > 0.0) || pairs < 1) throw InvalidInput("bad tangent-check parameters");

  std::mt19937_64 rng(seed);
  const auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };

  TangentCheckReport report;
  report.pairs = pairs;
  for (int i = 0; i < pairs; ++i) {
    const double a = uniform(t_bar - delta, t_bar + delta);
    const double b = uniform(t_bar - delta, t_bar + delta);
    const double gap = std::abs(a - b);
    if (gap < 1e-6) {
      --i;
      continue;
    }
    const GroupPoint pa = project_mod_last_layer(A, curve(a));
    const GroupPoint pb = project_mod_last_layer(A, curve(b));
    const double d = heisenberg_distance(pa, pb);
    report.max_upper_excess = std::max(report.max_upper_excess, d - gap);
    report.max_ratio = std::max(report.max_ratio, (gap - d) / std::pow(gap, 1.5));
  }
  report.fitted_C = std::ceil(std::max(report.max_ratio, 0.0) / 1e-3) * 1e-3;
  return report;
}

RoughProjectionReport rough_projection_check(const StratifiedAlgebra& A,
                                             const std::vector<ParamPoint>& samples,
                                             double C,
                                             const DistanceBoundProvider& provider) {
  if (samples.size() < 3) throw InvalidInput("too few samples");
  // (1,C) validation in the group; with interval providers only certain
  // violations (lower bound above the band, upper bound below it) reject.
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double dt = std::abs(samples[i].t - samples[j].t);
      const DistanceInterval d = provider.distance(samples[i].p, samples[j].p);
      if (d.lower > dt + C + 1e-9 || d.upper < dt - C - 1e-9)
        throw NotAQuasiGeodesic("samples violate the (1,C) bounds in the group",
                                samples[i].t, samples[j].t);
    }

  RoughProjectionReport report;
  report.c_prime = std::pow(A.rank() + 2.0, A.step() - 1.0) * C;

  PointTuple abelianized;
  for (const auto& s : samples)
    abelianized.points.push_back(project_abelianization(A, s.p));

  report.hyperplane_K = fit_hyperplane(abelianized, A.rank()).max_distance;

  report.horn_quasigeodesic = true;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double dt = std::abs(samples[i].t - samples[j].t);
      const double d =
          (abelianized.points[i] - abelianized.points[j]).norm();
      const double defect = std::max(d - (dt + report.c_prime),
                                     (dt - report.c_prime) - d);
      if (defect > report.worst_defect) {
        report.worst_defect = defect;
        if (defect > 1e-9) {
          report.horn_quasigeodesic = false;
          report.violating_pair = {samples[i].t, samples[j].t};
        }
      }
    }
  return report;
}

}  // namespace carnot
