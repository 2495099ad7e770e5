#include "carnot/hgeom.hpp"

#include <gtest/gtest.h>

#include "carnot/extremal.hpp"
#include "oracles.hpp"

using namespace carnot;

namespace {

PointTuple make_tuple(std::initializer_list<std::initializer_list<double>> rows) {
  PointTuple P;
  for (const auto& row : rows) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
    Eigen::Index i = 0;
    for (double x : row) v[i++] = x;
    P.points.push_back(std::move(v));
  }
  return P;
}

Eigen::MatrixXd random_rotation(std::mt19937_64& rng, int n) {
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = oracles::uniform(rng, -1, 1);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ();
}

}  // namespace

TEST(MinHeight, Examples) {
  EXPECT_DOUBLE_EQ(min_height(make_tuple({{1, 0}, {0, 1}})).value, 1.0);
  EXPECT_DOUBLE_EQ(min_height(make_tuple({{1, 0}, {2, 0}})).value, 0.0);

  // Oracle: least-squares distance to the span over both index choices.
  const auto P = make_tuple({{2, 0}, {1, 1}});
  const double expected = oracles::width_by_distance(P.points);
  EXPECT_NEAR(expected, 1.0, 1e-12);
  EXPECT_NEAR(min_height(P).value, expected, 1e-12);
  EXPECT_EQ(min_height(P).achieving_index, 1);
}

TEST(MinHeight, ErrorsAndEdges) {
  EXPECT_THROW(min_height(PointTuple{}), InvalidInput);
  EXPECT_THROW(min_height(make_tuple({{1, 0}, {0, 1}, {1, 1}})), InvalidInput);  // m > n
  EXPECT_THROW(min_height(make_tuple({{1, 0}, {0, 1, 2}})), DimensionMismatch);
  EXPECT_DOUBLE_EQ(min_height(make_tuple({{0, 0}, {1, 0}})).value, 0.0);
}

TEST(MinHeight, InvariancesAndScaling) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
    PointTuple P;
    for (int i = 0; i < m; ++i) P.points.push_back(oracles::random_vector(rng, n, -2, 2));
    const double w = min_height(P).value;

    PointTuple permuted = P;
    std::shuffle(permuted.points.begin(), permuted.points.end(), rng);
    EXPECT_NEAR(min_height(permuted).value, w, 1e-9 * (1 + w));

    const Eigen::MatrixXd Q = random_rotation(rng, n);
    PointTuple rotated;
    for (const auto& p : P.points) rotated.points.push_back(Q * p);
    EXPECT_NEAR(min_height(rotated).value, w, 1e-9 * (1 + w));

    const double c = oracles::uniform(rng, -3, 3);
    if (std::abs(c) < 0.01) continue;
    PointTuple scaled;
    for (const auto& p : P.points) scaled.points.push_back(c * p);
    EXPECT_NEAR(min_height(scaled).value, std::abs(c) * w, 1e-8 * (1 + std::abs(c) * w));
  }
}

TEST(MinHeight, PositiveIffIndependent500) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
    PointTuple P;
    for (int i = 0; i < m; ++i) P.points.push_back(oracles::random_vector(rng, n, -2, 2));
    // Force degeneracy on a third of the trials.
    if (m >= 2 && trial % 3 == 0) {
      const double a = oracles::uniform(rng, -2, 2);
      P.points[0] = a * P.points[static_cast<std::size_t>(m - 1)];
    }
    const bool independent = oracles::tuple_rank(P.points) == m;
    EXPECT_EQ(min_height(P).value > 0.0, independent);
  }
}

TEST(MinHeight, VolumeQuotientAgreesWithLeastSquares500) {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);  // n <= 6
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
    PointTuple P;
    for (int i = 0; i < m; ++i) P.points.push_back(oracles::random_vector(rng, n, -2, 2));
    worst = std::max(worst, std::abs(min_height(P).value -
                                     oracles::width_by_distance(P.points)));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Size, Examples) {
  const auto A = engel_group();
  auto pt = [&](double a, double b, double c, double d) {
    Eigen::VectorXd x(4);
    x << a, b, c, d;
    return GroupPoint{x};
  };

  // Repeated point: one increment vanishes.
  EXPECT_DOUBLE_EQ(size(Configuration{&A, {pt(1, 2, 0, 0), pt(1, 2, 0, 0)}}), 0.0);
  // Standard-basis increments.
  EXPECT_DOUBLE_EQ(size(Configuration{&A, {pt(0, 0, 0, 0), pt(1, 0, 0, 0), pt(1, 1, 0, 0)}}),
                   1.0);
  // Increments (2,0), (1,1); the min_height oracle gives 1.
  const double expected =
      oracles::width_by_distance({Eigen::Vector2d{2, 0}, Eigen::Vector2d{1, 1}});
  EXPECT_NEAR(size(Configuration{&A, {pt(0, 0, 0, 0), pt(2, 0, 0, 0), pt(3, 1, 0, 0)}}),
              expected, 1e-12);
  EXPECT_NEAR(expected, 1.0, 1e-12);

  EXPECT_THROW(size(Configuration{&A, {pt(0, 0, 0, 0)}}), InvalidInput);
  EXPECT_THROW(size(Configuration{&A, {pt(0, 0, 0, 0), pt(1, 0, 0, 0), pt(1, 1, 0, 0),
                                       pt(2, 1, 0, 0)}}),
               InvalidInput);  // m > r
}

TEST(Size, PositiveIffAbelianizedGeneralPosition) {
  const auto A = engel_group();
  std::mt19937_64 rng(139);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GroupPoint> pts;
    for (int i = 0; i < 3; ++i) pts.push_back(oracles::random_point(rng, A, -2, 2));
    if (trial % 3 == 0) {
      // Force the abelianized increments parallel; higher coordinates stay
      // generic, so only the projections degenerate.
      const double scale = oracles::uniform(rng, -2, 2);
      Eigen::VectorXd x = pts[2].x;
      x.head<2>() = pts[1].x.head<2>() +
                    scale * (pts[1].x.head<2>() - pts[0].x.head<2>());
      pts[2] = GroupPoint{x};
    }
    std::vector<Eigen::VectorXd> increments = {
        (pts[1].x.head<2>() - pts[0].x.head<2>()).eval(),
        (pts[2].x.head<2>() - pts[1].x.head<2>()).eval()};
    const bool general_position = oracles::tuple_rank(increments) == 2;
    EXPECT_EQ(size(Configuration{&A, pts}) > 0.0, general_position);
  }
}

TEST(InverseWithBound, Examples) {
  const auto id = inverse_with_bound(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(id.inverse.isIdentity(1e-14));
  EXPECT_DOUBLE_EQ(id.bound, 1.0);

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 2.0;
  D(1, 1) = 0.5;
  const auto d = inverse_with_bound(D);
  EXPECT_NEAR(d.inverse(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(d.inverse(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(d.bound, 2.0, 1e-12);  // Width = 1/2

  Eigen::MatrixXd S(2, 2);
  S << 1, 2, 2, 4;
  EXPECT_THROW(inverse_with_bound(S), SingularMatrix);
}

TEST(InverseWithBound, CramerBound1000) {
  std::mt19937_64 rng(109);
  int accepted = 0;
  double worst_excess = -1.0, worst_product = 0.0;
  while (accepted < 1000) {
    const int n = 2 + static_cast<int>(rng() % 5);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = oracles::uniform(rng, -1, 1);
    std::vector<Eigen::VectorXd> cols;
    for (int c = 0; c < n; ++c) cols.push_back(M.col(c));
    if (oracles::width_by_distance(cols) < 1e-3) continue;  // keep well-conditioned
    ++accepted;
    const auto result = inverse_with_bound(M);
    // Oracle bound from the independent width computation.
    const double oracle_bound = 1.0 / oracles::width_by_distance(cols);
    worst_excess = std::max(worst_excess,
                            result.inverse.cwiseAbs().maxCoeff() - oracle_bound);
    worst_product = std::max(worst_product,
                             (result.inverse * M - Eigen::MatrixXd::Identity(n, n))
                                 .cwiseAbs()
                                 .maxCoeff());
    EXPECT_LE(result.inverse.cwiseAbs().maxCoeff(), result.bound + 1e-9);
  }
  EXPECT_LE(worst_excess, 1e-9);
  EXPECT_LT(worst_product, 1e-10);
}

TEST(FitHyperplane, PerturbedLine) {
  PointTuple P;
  const double eps = 1e-3;
  for (int i = 0; i <= 10; ++i) {
    const double t = static_cast<double>(i);
    P.points.push_back(Eigen::Vector2d{t, eps * std::sin(t)});
  }
  const auto fit = fit_hyperplane(P, 2);
  // The volume-maximising single vector is slightly tilted by its own
  // perturbation, so K is O(eps) rather than <= eps exactly.
  EXPECT_LE(fit.max_distance, 2.0 * eps);
  EXPECT_LE(std::abs(fit.plane.spanning[0].normalized()[1]), eps);

  PointTuple collinear = make_tuple({{1, 1}, {2, 2}, {-3, -3}});
  EXPECT_NEAR(fit_hyperplane(collinear, 2).max_distance, 0.0, 1e-12);

  EXPECT_THROW(fit_hyperplane(PointTuple{}, 2), InvalidInput);
  EXPECT_THROW(fit_hyperplane(P, 0), InvalidInput);
  EXPECT_THROW(fit_hyperplane(P, 3), InvalidInput);
}

TEST(FitHyperplane, EngelGeodesicProjection) {
  PointTuple P;
  for (int i = 0; i <= 200; ++i) {
    const double t = -10.0 + 0.1 * i;
    const auto beta = engel_geodesic(t);
    P.points.push_back(Eigen::Vector2d{beta.x[0], beta.x[1]});
  }
  const auto fit = fit_hyperplane(P, 2);
  // |beta_1| <= 2 forces the x2-axis-like fit within distance 2.
  EXPECT_LE(fit.max_distance, 2.0 + 1e-9);
  EXPECT_GT(fit.max_distance, 1.0);
  // The chosen direction is nearly vertical.
  const Eigen::VectorXd dir = fit.plane.spanning[0].normalized();
  EXPECT_LT(std::abs(dir[0]), 0.05);
}

TEST(FitHyperplane, BoundedByWorstSubtupleWidth) {
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const int N = 5 + static_cast<int>(rng() % 7);  // <= 11 points: exhaustive
    const int m = 2 + static_cast<int>(rng() % static_cast<unsigned>(n - 1));
    PointTuple P;
    for (int i = 0; i < N; ++i) P.points.push_back(oracles::random_vector(rng, n, -2, 2));
    const auto fit = fit_hyperplane(P, m);

    double worst_width = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(m));
    auto rec = [&](auto&& self, int depth, int start) -> void {
      if (depth == m) {
        std::vector<Eigen::VectorXd> sub;
        for (int i : idx) sub.push_back(P.points[static_cast<std::size_t>(i)]);
        worst_width = std::max(worst_width, oracles::width_by_distance(sub));
        return;
      }
      for (int i = start; i < N; ++i) {
        idx[static_cast<std::size_t>(depth)] = i;
        self(self, depth + 1, i + 1);
      }
    };
    rec(rec, 0, 0);
    EXPECT_LE(fit.max_distance, worst_width + 1e-9);
  }
}

TEST(FitHyperplane, GreedyBeyondTwelvePoints) {
  std::mt19937_64 rng(127);
  PointTuple P;
  for (int i = 0; i < 40; ++i) {
    const double t = 0.5 * i;
    Eigen::Vector3d p{t, 0.2 * std::sin(t), 0.1 * std::cos(3 * t)};
    P.points.push_back(p);
  }
  const auto fit = fit_hyperplane(P, 3);
  EXPECT_LE(fit.max_distance, 0.25);  // plane through the wiggle
  EXPECT_EQ(fit.plane.spanning.size(), 2u);
}

TEST(TranslatedTuple, TelescopingAndEndpointCases) {
  const auto A = engel_group();
  std::mt19937_64 rng(131);
  const auto mk = [&](double a, double b) {
    Eigen::VectorXd x(4);
    x << a, b, oracles::uniform(rng, -1, 1), oracles::uniform(rng, -1, 1);
    return GroupPoint{x};
  };
  const Configuration E{&A, {mk(0, 0), mk(1, 0.5), mk(2.5, -1)}};

  // ell = 0: entries are partial sums of increments.
  const auto t0 = translated_tuple(E, 0);
  EXPECT_LT((t0.gamma.points[0] - (project_abelianization(A, E.points[1]) -
                                   project_abelianization(A, E.points[0])))
                .norm(),
            1e-14);
  EXPECT_LT((t0.gamma.points[1] - (project_abelianization(A, E.points[2]) -
                                   project_abelianization(A, E.points[0])))
                .norm(),
            1e-14);
  EXPECT_LT(t0.sign_match_residual, 1e-14);

  // ell = m with identity basepoint: entries are the projections themselves.
  Configuration Em{&A, {mk(1, 2), mk(-1, 0.25), A.identity()}};
  const auto tm = translated_tuple(Em, 2);
  EXPECT_LT((tm.gamma.points[0] - project_abelianization(A, Em.points[0])).norm(), 1e-14);
  EXPECT_LT((tm.gamma.points[1] - project_abelianization(A, Em.points[1])).norm(), 1e-14);
  EXPECT_LT(tm.sign_match_residual, 1e-14);

  EXPECT_THROW(translated_tuple(E, 3), InvalidInput);
  EXPECT_THROW(translated_tuple(E, -1), InvalidInput);
}

TEST(TranslatedTuple, TransformMatchesDirectSummation) {
  const auto A = engel_group();
  std::mt19937_64 rng(137);
  for (int trial = 0; trial < 100; ++trial) {
    Configuration E{&A, {}};
    for (int i = 0; i < 3; ++i) E.points.push_back(oracles::random_point(rng, A, -2, 2));
    const int ell = static_cast<int>(rng() % 3);
    const auto result = translated_tuple(E, ell);
    EXPECT_LT(result.sign_match_residual, 1e-12);

    // Direct-summation oracle for every gamma entry.
    std::size_t pos = 0;
    for (int j = 0; j < 3; ++j) {
      if (j == ell) continue;
      const Eigen::VectorXd expected = project_abelianization(A, E.points[static_cast<std::size_t>(j)]) -
                                       project_abelianization(A, E.points[static_cast<std::size_t>(ell)]);
      EXPECT_LT((result.gamma.points[pos++] - expected).norm(), 1e-13);
    }
  }
}
