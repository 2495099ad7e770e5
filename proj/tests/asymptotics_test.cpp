#include "carnot/asymptotics.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"

using namespace carnot;

namespace {

Line engel_abnormal_line(double vertical_offset, double parameter_shift) {
  // t -> exp(b X112) exp(-(t + a) X2), the asymptote family of the explicit
  // geodesic; base = exp(b X112) exp(-a X2), direction -X2.
  const auto A = engel_group();
  Eigen::VectorXd base = Eigen::VectorXd::Zero(4);
  base[1] = -parameter_shift;
  base[3] = vertical_offset;
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(4);
  dir[1] = -1.0;
  return Line{GroupPoint{base}, AlgebraVector{dir}};
}

Line step4_asymptote_line(double sign) {
  // L_pm(t) = exp(-(t X2 pm (2/3) t X1122)).
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(6);
  dir[1] = -1.0;
  dir[5] = -sign * 2.0 / 3.0;
  return Line{GroupPoint{Eigen::VectorXd::Zero(6)}, AlgebraVector{dir}};
}

std::vector<ParamPoint> line_samples(const StratifiedAlgebra& A, const Line& L,
                                     double t0, double t1, int n) {
  std::vector<ParamPoint> out;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (t1 - t0) * i / (n - 1);
    out.push_back({t, line_point(A, L, t)});
  }
  return out;
}

std::vector<ParamPoint> lift_samples(double t0, double t1, int n) {
  const auto points = engel_geodesic_lift_grid(t0, t1, n);
  std::vector<ParamPoint> out;
  for (int i = 0; i < n; ++i)
    out.push_back({t0 + (t1 - t0) * i / (n - 1), points[static_cast<std::size_t>(i)]});
  return out;
}

}  // namespace

TEST(Blow, HorizontalLineIsDilationInvariant) {
  const auto A = engel_group();
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(4);
  dir << 0.6, -0.8, 0, 0;
  const CurveFn line = [&A, dir](double t) {
    return exp_point(AlgebraVector{(t * dir).eval()});
  };
  for (double h : {0.01, 0.5, 1.0, 7.0, 300.0}) {
    DilatedCurveView view{&A, line, h, 0.0, std::nullopt};
    for (double t : {-2.0, 0.3, 1.7}) {
      const auto expected = exp_point(AlgebraVector{(t * dir).eval()});
      EXPECT_LT((blow(view, t).x - expected.x).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Blow, GeodesicBlowupApproachesDerivativeLine) {
  const auto A = engel_group();
  const CurveFn beta = [](double t) { return engel_geodesic(t); };
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
  expected[1] = 1.0;  // exp(u(0)) with u(0) = (0, 1)
  double previous = std::numeric_limits<double>::infinity();
  for (double h : {0.1, 0.01, 0.001}) {
    DilatedCurveView view{&A, beta, h, 0.0, std::nullopt};
    const double err = (blow(view, 1.0).x - expected).norm();
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 1e-2);
}

TEST(Blow, UnitViewReproducesCurveAndDomainIsChecked) {
  const auto A = engel_group();
  const GroupPoint base = engel_geodesic(0.0);
  const CurveFn centered = [&A, base](double t) {
    return bch_product(A, inverse(A, base), engel_geodesic(t));
  };
  DilatedCurveView view{&A, centered, 1.0, 0.0, std::pair{-1.0, 1.0}};
  for (double t : {-0.9, 0.0, 0.4}) {
    EXPECT_LT((blow(view, t).x - centered(t).x).norm(), 1e-13);
  }
  EXPECT_THROW(blow(view, 1.5), DomainError);
}

TEST(BlowdownEstimate, HorizontalLineHasZeroDiagnostic) {
  const auto A = engel_group();
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(4);
  dir << 1, 0, 0, 0;
  const CurveFn line = [&A, dir](double t) {
    return exp_point(AlgebraVector{(t * dir).eval()});
  };
  const DistanceBoundProvider provider(A);
  const auto report = blowdown_estimate(A, line, {1, 2, 4, 8}, 2.0, 21, provider);
  ASSERT_EQ(report.consecutive_sup.size(), 3u);
  for (const auto& d : report.consecutive_sup) EXPECT_LT(d.upper, 1e-12);
}

TEST(BlowdownEstimate, HeisenbergCircleCollapses) {
  const auto A = heisenberg_group();
  Eigen::VectorXd lambda(3);
  lambda << 1, 0, 2;
  const CurveFn gamma = extremal_curve(A, {lambda, 1.0}, A.identity(), 1e-2);
  const DistanceBoundProvider provider(A);
  const auto report =
      blowdown_estimate(A, gamma, {2, 4, 8, 16, 32, 64}, 1.5, 13, provider);

  // Sup distance of the dilate to the constant curve at the identity; the
  // collapse rate is h^{-1/2} through the vertical coordinate.
  auto sup_to_identity = [&](std::size_t row) {
    double sup = 0.0;
    for (const auto& p : report.dilates[row])
      sup = std::max(sup, provider.distance(A.identity(), p).upper);
    return sup;
  };
  const double first = sup_to_identity(0);
  const double last = sup_to_identity(report.dilates.size() - 1);
  EXPECT_LT(last, 0.25 * first);
  EXPECT_LT(last, 0.3);  // collapsing toward the constant curve (speed 0)
}

TEST(BlowdownEstimate, EngelGeodesicAbelianizedDirection) {
  const auto A = engel_group();
  const CurveFn beta = [](double t) { return engel_geodesic(t); };
  const DistanceBoundProvider provider(A);
  const auto report = blowdown_estimate(A, beta, {10, 20, 40}, 1.0, 3, provider);
  // At t = 1 the abelianized dilate approaches the x2-axis direction (0, -1).
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& row : report.dilates) {
    const Eigen::Vector2d dir =
        project_abelianization(A, row.back()).normalized();
    const double err = (dir - Eigen::Vector2d{0, -1}).norm();
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 0.15);
}

TEST(EuclideanBlowdown, ExactAndShiftedLines) {
  std::mt19937_64 rng(401);
  Eigen::VectorXd v = oracles::random_vector(rng, 3, -1, 1).normalized();
  for (double shift : {0.0, 5.0}) {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> points;
    for (int i = -40; i <= 40; ++i) {
      times.push_back(0.5 * i);
      points.push_back(0.5 * i * v + shift * Eigen::VectorXd::Ones(3));
    }
    const auto result = euclidean_blowdown(times, points, 0.1);
    EXPECT_LT((result.v_plus - v).norm(), 1e-12);
    EXPECT_LT((result.v_minus + v).norm(), 1e-12);
    EXPECT_LT(result.antipodal_error, 1e-12);
    EXPECT_LE(result.max_angle_excess, 1e-9);
  }
}

TEST(EuclideanBlowdown, NoisyLineSatisfiesAngleBound) {
  std::mt19937_64 rng(409);
  const Eigen::VectorXd v = oracles::random_vector(rng, 4, -1, 1).normalized();
  Eigen::VectorXd w = oracles::random_vector(rng, 4, -1, 1);
  w = (w - w.dot(v) * v).normalized();
  const double C = 0.8, T = 50.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> points;
  for (int i = -100; i <= 100; ++i) {
    const double t = T * i / 100.0;
    times.push_back(t);
    points.push_back(t * v + (C / 2.0) * std::sin(0.7 * t) * w);
  }
  const auto result = euclidean_blowdown(times, points, C);
  EXPECT_GT(result.pairs_checked, 0);
  EXPECT_LE(result.max_angle_excess, 1e-9);
  EXPECT_LE(result.antipodal_error, 50.0 * C / T);
}

TEST(EuclideanBlowdown, RejectsBadSamples) {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> points;
  for (int i = -10; i <= 10; ++i) {
    times.push_back(i);
    points.push_back(Eigen::Vector2d{2.0 * i, 0.0});  // speed 2: not (1,C)
  }
  EXPECT_THROW(euclidean_blowdown(times, points, 0.5), NotAQuasiGeodesic);
  try {
    euclidean_blowdown(times, points, 0.5);
  } catch (const NotAQuasiGeodesic& e) {
    EXPECT_NE(e.witness_t1, e.witness_t2);
  }
}

TEST(LinesFiniteDistance, IdenticalAndTranslated) {
  const auto A = engel_group();
  std::mt19937_64 rng(419);
  const Line L1{oracles::random_point(rng, A, -1, 1),
                AlgebraVector{oracles::random_vector(rng, 4, -1, 1)}};
  const auto same = lines_finite_distance(A, L1, L1);
  ASSERT_TRUE(same.has_value());
  EXPECT_NEAR(same->c, 1.0, 1e-12);
  EXPECT_LT(same->k.x.norm(), 1e-10);

  // Right translate: L2(t) = L1(t) k0^{-1}, so L1(t) = L2(t) k0.
  const GroupPoint k0 = oracles::random_point(rng, A, -1, 1);
  const Line L2{bch_product(A, L1.base, inverse(A, k0)),
                AlgebraVector{adjoint(A, k0) * L1.direction.c}};
  const auto translated = lines_finite_distance(A, L1, L2);
  ASSERT_TRUE(translated.has_value());
  EXPECT_NEAR(translated->c, 1.0, 1e-10);
  EXPECT_LT((translated->k.x - k0.x).norm(), 1e-9);
}

TEST(LinesFiniteDistance, MismatchedStep4AsymptotesAreFar) {
  const auto A = rank2_step4_group();
  const auto result =
      lines_finite_distance(A, step4_asymptote_line(+1.0), step4_asymptote_line(-1.0));
  EXPECT_FALSE(result.has_value());
}

TEST(LinesFiniteDistance, VerdictIsSymmetric) {
  const auto A = engel_group();
  std::mt19937_64 rng(421);
  for (int i = 0; i < 50; ++i) {
    const Line L1{oracles::random_point(rng, A, -1, 1),
                  AlgebraVector{oracles::random_vector(rng, 4, -1, 1)}};
    Line L2{oracles::random_point(rng, A, -1, 1),
            AlgebraVector{oracles::random_vector(rng, 4, -1, 1)}};
    if (i % 2 == 0) {
      // Construct a positive case: reparametrized right translate.
      const double c = oracles::uniform(rng, 0.3, 3.0);
      const GroupPoint k0 = oracles::random_point(rng, A, -1, 1);
      L2 = Line{bch_product(A, L1.base, inverse(A, k0)),
                AlgebraVector{(adjoint(A, k0) * L1.direction.c / c).eval()}};
    }
    const auto forward = lines_finite_distance(A, L1, L2);
    const auto backward = lines_finite_distance(A, L2, L1);
    EXPECT_EQ(forward.has_value(), backward.has_value());
    if (forward && backward) {
      EXPECT_NEAR(forward->c * backward->c, 1.0, 1e-8);
    }
  }
  EXPECT_THROW(lines_finite_distance(
                   A, Line{A.identity(), A.zero_vector()},
                   Line{A.identity(), AlgebraVector{Eigen::VectorXd::Ones(4)}}),
               InvalidInput);
}

TEST(HausdorffTruncated, IdenticalAndParallelSets) {
  const auto A = engel_group();
  const DistanceBoundProvider provider(A);
  const auto samples =
      line_samples(A, engel_abnormal_line(2.0 / 3.0, -2.0), -5, 5, 21);
  const auto same = hausdorff_truncated(A, samples, samples, provider, 5.0);
  EXPECT_DOUBLE_EQ(same.lower, 0.0);
  EXPECT_DOUBLE_EQ(same.upper, 0.0);

  const auto E = euclidean_group(2);
  const DistanceBoundProvider exact(E);
  std::vector<ParamPoint> a, b;
  for (int i = -10; i <= 10; ++i) {
    a.push_back({static_cast<double>(i), GroupPoint{Eigen::Vector2d{1.0 * i, 0.0}}});
    b.push_back({static_cast<double>(i), GroupPoint{Eigen::Vector2d{1.0 * i, 0.75}}});
  }
  const auto offset = hausdorff_truncated(E, a, b, exact, 10.0);
  EXPECT_NEAR(offset.lower, 0.75, 1e-12);
  EXPECT_NEAR(offset.upper, 0.75, 1e-12);

  std::vector<ParamPoint> far;
  far.push_back({4.0, GroupPoint{Eigen::Vector2d{4.0, 0.0}}});
  EXPECT_THROW(hausdorff_truncated(E, far, b, exact, 0.25), InvalidInput);
}

TEST(HausdorffTruncated, NondecreasingOnNestedWindows) {
  // The geodesic lift against one of its candidate asymptote lines, with the
  // line restricted to the half where it fails to follow the curve.
  const auto A = rank2_step4_group();
  const DistanceBoundProvider provider(A);
  const Line L_plus = step4_asymptote_line(+1.0);
  double previous = -1.0;
  for (double T : {5.0, 10.0, 20.0}) {
    const auto alpha = lift_samples(-T, 0.0, static_cast<int>(2 * T) + 1);
    const auto line = line_samples(A, L_plus, -T, T, static_cast<int>(4 * T) + 1);
    const auto interval = hausdorff_truncated(A, alpha, line, provider, T);
    EXPECT_LE(interval.lower, interval.upper);
    EXPECT_GE(interval.lower, previous);
    previous = interval.lower;
  }
}

TEST(AsymptoteResidual, EngelGeodesicMatchesDisplayedComponents) {
  const auto A = engel_group();
  const CurveFn beta = [](double t) { return engel_geodesic(t); };
  const double a = -2.0, b = 2.0 / 3.0;
  const Line L = engel_abnormal_line(b, a);
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double t = -10.0 + 0.05 * i;
    const auto z = asymptote_residual(A, beta, L, t);
    const double ch = std::cosh(t), th = std::tanh(t);
    Eigen::VectorXd expected(4);
    expected << 2.0 / ch, 2.0 * th + a, -a / ch,
        (2.0 / 3.0) * th + a / (3.0 * ch * ch) - b;
    worst = std::max(worst, (z.x - expected).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-12);

  // Both tails: z -> 0 along the matched lines.
  EXPECT_LT(asymptote_residual(A, beta, L, 22.0).x.norm(), 1e-7);
  const Line L_minus = engel_abnormal_line(-b, -a);
  EXPECT_LT(asymptote_residual(A, beta, L_minus, -22.0).x.norm(), 1e-7);
}

TEST(AsymptoteResidual, EngelGeodesicDecayLogSlope) {
  const auto A = engel_group();
  const CurveFn beta = [](double t) { return engel_geodesic(t); };
  const Line L = engel_abnormal_line(2.0 / 3.0, -2.0);
  // Log-linear fit of each component magnitude over [5, 15].
  for (int component = 0; component < 4; ++component) {
    std::vector<double> ts, logs;
    for (int i = 0; i <= 100; ++i) {
      const double t = 5.0 + 0.1 * i;
      const double value = std::abs(asymptote_residual(A, beta, L, t).x[component]);
      ts.push_back(t);
      logs.push_back(std::log(value));
    }
    const double n = static_cast<double>(ts.size());
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      st += ts[i];
      sl += logs[i];
      stt += ts[i] * ts[i];
      stl += ts[i] * logs[i];
    }
    const double slope = (n * stl - st * sl) / (n * stt - st * st);
    EXPECT_LE(slope, -0.9) << "component " << component;
  }
}

TEST(AsymptoteResidual, LiftBoundedOnMatchedHalfLine) {
  const auto A = rank2_step4_group();
  const Line L_plus = step4_asymptote_line(+1.0);
  const auto alpha = lift_samples(0.0, 40.0, 161);
  for (const auto& s : alpha) {
    const auto z = bch_product(A, inverse(A, line_point(A, L_plus, s.t)), s.p);
    EXPECT_LT(z.x.cwiseAbs().maxCoeff(), 10.0) << "t=" << s.t;
  }
}

TEST(AsymptoteResidual, LiftGrowsOnMismatchedHalfLine) {
  const auto A = rank2_step4_group();
  const Line L_plus = step4_asymptote_line(+1.0);
  const auto alpha = lift_samples(-40.0, 0.0, 161);
  for (const auto& s : alpha) {
    const auto z = bch_product(A, inverse(A, line_point(A, L_plus, s.t)), s.p);
    EXPECT_GE(std::abs(z.x[5]), (4.0 / 3.0) * std::abs(s.t) - 10.0) << "t=" << s.t;
  }
}

TEST(HeisenbergDistance, ClosedFormAnchors) {
  const auto A = heisenberg_group();
  auto pt = [](double x, double y, double z) {
    return GroupPoint{Eigen::Vector3d{x, y, z}};
  };
  for (double t : {0.25, -3.0, 10.0})
    EXPECT_NEAR(heisenberg_distance(A.identity(), pt(t, 0, 0)), std::abs(t), 1e-12);

  // Vertical points: full-circle geodesics, d = sqrt(4 pi |z|). Cross-checked
  // against the shooting oracle: one period of a unit-speed extremal has
  // length 2 pi / omega and lands on the centre.
  for (double z : {0.5, -2.0, 9.0})
    EXPECT_NEAR(heisenberg_distance(A.identity(), pt(0, 0, z)),
                std::sqrt(4.0 * std::numbers::pi * std::abs(z)), 1e-10);

  const double omega = 2.0;
  Eigen::VectorXd lambda(3);
  lambda << 1, 0, omega;
  const double period = 2.0 * std::numbers::pi / omega;
  const auto curve = integrate_extremal(A, {lambda, 1.0}, A.identity(), 0.0,
                                        period, 1e-4);
  const auto endpoint = curve.points.back();
  EXPECT_LT(endpoint.x.head<2>().norm(), 1e-6);
  EXPECT_NEAR(heisenberg_distance(A.identity(), endpoint), period, 1e-5);
}

TEST(HeisenbergDistance, FrozenQuotientValueOnGeodesicPair) {
  // High-precision arc-solve oracle (40-digit bisection on the holonomy
  // angle) for the projected geodesic pair t = -0.5, 0.5.
  const auto A = engel_group();
  const auto p = project_mod_last_layer(A, engel_geodesic(-0.5));
  const auto q = project_mod_last_layer(A, engel_geodesic(0.5));
  EXPECT_NEAR(heisenberg_distance(p, q), 0.999981875003, 1e-10);
}

TEST(HeisenbergDistance, InvarianceSymmetryTriangle) {
  const auto A = heisenberg_group();
  std::mt19937_64 rng(431);
  for (int i = 0; i < 200; ++i) {
    const auto p = oracles::random_point(rng, A, -2, 2);
    const auto q = oracles::random_point(rng, A, -2, 2);
    const auto g = oracles::random_point(rng, A, -2, 2);
    const double d = heisenberg_distance(p, q);
    EXPECT_NEAR(heisenberg_distance(bch_product(A, g, p), bch_product(A, g, q)), d,
                1e-9 * (1 + d));
    EXPECT_NEAR(heisenberg_distance(q, p), d, 1e-10 * (1 + d));
    const auto r = oracles::random_point(rng, A, -2, 2);
    EXPECT_LE(heisenberg_distance(p, r),
              d + heisenberg_distance(q, r) + 1e-9);
  }
}

TEST(QuantifiedTangent, StraightLineNeedsNoCorrection) {
  const auto A = engel_group();
  const CurveFn line = [](double t) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    x[0] = t;
    return GroupPoint{x};
  };
  const auto report = quantified_tangent_check(A, line, 0.0, 0.5, 100, 5);
  EXPECT_LE(report.max_upper_excess, 1e-10);
  EXPECT_NEAR(report.fitted_C, 0.0, 1e-3 + 1e-12);
}

TEST(QuantifiedTangent, EngelGeodesicInstance) {
  const auto A = engel_group();
  const CurveFn beta = [](double t) { return engel_geodesic(t); };
  const auto report = quantified_tangent_check(A, beta, 0.0, 0.5, 200, 7);
  EXPECT_EQ(report.pairs, 200);
  EXPECT_LE(report.max_upper_excess, 1e-9);  // d <= |a-b| for every pair
  EXPECT_GT(report.fitted_C, 0.0);
  EXPECT_LT(report.fitted_C, 5.0);
}

TEST(QuantifiedTangent, RejectsOtherGroups) {
  const auto H = heisenberg_group();
  const CurveFn id = [&H](double) { return H.identity(); };
  EXPECT_THROW(quantified_tangent_check(H, id, 0.0, 0.5, 10, 1), UnsupportedGroup);
}

TEST(RoughProjection, HorizontalLineTakesQuasiGeodesicHorn) {
  const auto A = heisenberg_group();
  const DistanceBoundProvider provider(A);
  std::vector<ParamPoint> samples;
  for (int i = -20; i <= 20; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    x[0] = 0.5 * i;
    samples.push_back({0.5 * i, GroupPoint{x}});
  }
  const auto report = rough_projection_check(A, samples, 0.0, provider);
  EXPECT_TRUE(report.horn_quasigeodesic);
  EXPECT_DOUBLE_EQ(report.c_prime, 0.0);
  EXPECT_LE(report.worst_defect, 1e-12);
}

TEST(RoughProjection, HeisenbergCircleTakesHyperplaneHorn) {
  const auto A = heisenberg_group();
  const DistanceBoundProvider provider(A);
  const double omega = 2.0, radius = 1.0 / omega;
  Eigen::VectorXd lambda(3);
  lambda << 1, 0, omega;
  const double period = 2.0 * std::numbers::pi / omega;
  const auto curve = integrate_extremal(A, {lambda, 1.0}, A.identity(), 0.0,
                                        period, 1e-3);
  std::vector<ParamPoint> samples;
  for (std::size_t i = 0; i < curve.times.size(); i += 100)
    samples.push_back({curve.times[i], curve.points[i]});

  const auto report = rough_projection_check(A, samples, 1e-6, provider);
  // The projection is a circle: the quasi-geodesic horn fails and the
  // hyperplane fit stays within the diameter given by the closed form.
  EXPECT_FALSE(report.horn_quasigeodesic);
  EXPECT_LE(report.hyperplane_K, 2.0 * radius + 1e-6);
}

TEST(RoughProjection, NoisyLineSatisfiesRelaxedBound) {
  const auto A = heisenberg_group();
  const DistanceBoundProvider provider(A);
  const double C = 0.4;
  std::vector<ParamPoint> samples;
  for (int i = -30; i <= 30; ++i) {
    const double t = 0.7 * i;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    x[0] = t;
    const GroupPoint base{x};
    Eigen::VectorXd wiggle = Eigen::VectorXd::Zero(3);
    wiggle[1] = (C / 2.0) * std::sin(t);
    samples.push_back({t, bch_product(A, base, GroupPoint{wiggle})});
  }
  const auto report = rough_projection_check(A, samples, C, provider);
  EXPECT_TRUE(report.horn_quasigeodesic);
  EXPECT_DOUBLE_EQ(report.c_prime, (2.0 + 2.0) * C);
}

TEST(RoughProjection, RejectsInvalidInput) {
  const auto A = heisenberg_group();
  const DistanceBoundProvider provider(A);
  std::vector<ParamPoint> samples;
  for (int i = 0; i <= 10; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    x[0] = 3.0 * i;  // speed 3
    samples.push_back({static_cast<double>(i), GroupPoint{x}});
  }
  EXPECT_THROW(rough_projection_check(A, samples, 0.5, provider), NotAQuasiGeodesic);
}
