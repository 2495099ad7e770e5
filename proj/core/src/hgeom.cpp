#include "carnot/hgeom.hpp"

#include <algorithm>
#include <cmath>

namespace carnot {

namespace {

constexpr double kDegeneracy = 1e-12;

void check_tuple(const PointTuple& P) {
  if (P.points.empty()) throw InvalidInput("empty point tuple");
  const auto n = P.points.front().size();
  for (const auto& p : P.points)
    if (p.size() != n) throw DimensionMismatch("point tuple mixes dimensions");
}

double tuple_scale(const PointTuple& P) {
  double scale = 0.0;
  for (const auto& p : P.points) scale = std::max(scale, p.norm());
  return scale;
}

/// sqrt(det(Gram)) of a list of columns; clamps the tiny negative dets that
/// floating-point Gram matrices produce.
double volume(const std::vector<Eigen::VectorXd>& vectors) {
  const int m = static_cast<int>(vectors.size());
  if (m == 0) return 1.0;  // empty parallelotope has unit 0-volume
  Eigen::MatrixXd G(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) G(a, b) = G(b, a) = vectors[a].dot(vectors[b]);
  const double det = G.determinant();
  return det > 0.0 ? std::sqrt(det) : 0.0;
}

/// Distance from v to span(basis) via least squares; used as the fallback on
/// the degenerate branches and by fit_hyperplane.
double distance_to_span(const Eigen::VectorXd& v,
                        const std::vector<Eigen::VectorXd>& basis) {
  if (basis.empty()) return v.norm();
  Eigen::MatrixXd S(v.size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c) S.col(static_cast<Eigen::Index>(c)) = basis[c];
  const Eigen::VectorXd coeffs = S.completeOrthogonalDecomposition().solve(v);
  return (v - S * coeffs).norm();
}

std::vector<Eigen::VectorXd> drop_index(const std::vector<Eigen::VectorXd>& points,
                                        int j) {
  std::vector<Eigen::VectorXd> rest;
  rest.reserve(points.size() - 1);
  for (int i = 0; i < static_cast<int>(points.size()); ++i)
    if (i != j) rest.push_back(points[i]);
  return rest;
}

}  // namespace

MinHeightResult min_height(const PointTuple& P) {
  check_tuple(P);
  const int m = static_cast<int>(P.points.size());
  const int n = static_cast<int>(P.points.front().size());
  if (m > n)
    throw InvalidInput("min_height: more vectors (" + std::to_string(m) +
                       ") than ambient dimension (" + std::to_string(n) + ")");
  const double scale = tuple_scale(P);
  const double vol_m = volume(P.points);

  // Dependence test: the Gram determinant of an exactly dependent tuple
  // carries O(sqrt(eps)) noise, so pair the volume threshold with a
  // rank-revealing decomposition.
  Eigen::MatrixXd M(n, m);
  for (int j = 0; j < m; ++j) M.col(j) = P.points[static_cast<std::size_t>(j)];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  if (vol_m <= kDegeneracy * std::pow(scale, m) || qr.rank() < m) {
    // Dependent tuple: the height is zero; report the lowest index whose
    // vector lies in the span of the others.
    for (int j = 0; j < m; ++j) {
      const auto rest = drop_index(P.points, j);
      if (distance_to_span(P.points[j], rest) <= 1e-8 * std::max(scale, 1.0))
        return {0.0, j};
    }
    return {0.0, 0};
  }
  MinHeightResult best{std::numeric_limits<double>::infinity(), 0};
  for (int j = 0; j < m; ++j) {
    const auto rest = drop_index(P.points, j);
    const double vol_rest = volume(rest);
    const double height = vol_rest > 0.0 ? vol_m / vol_rest
                                         : distance_to_span(P.points[j], rest);
    if (height < best.value) best = {height, j};
  }
  return best;
}

double min_height_value(const PointTuple& P) { return min_height(P).value; }

double size(const Configuration& E) {
  if (E.algebra == nullptr) throw InvalidInput("configuration without algebra");
  if (E.points.size() < 2) throw InvalidInput("size needs at least two points");
  const int m = static_cast<int>(E.points.size()) - 1;
  if (m > E.algebra->rank())
    throw InvalidInput("size: tuple longer than rank+1");
  PointTuple increments;
  for (int j = 1; j <= m; ++j)
    increments.points.push_back(project_abelianization(*E.algebra, E.points[j]) -
                                project_abelianization(*E.algebra, E.points[j - 1]));
  return min_height(increments).value;
}

InverseWithBound inverse_with_bound(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw InvalidInput("inverse_with_bound needs a nonempty square matrix");
  PointTuple columns;
  for (Eigen::Index c = 0; c < A.cols(); ++c) columns.points.push_back(A.col(c));
  const double width = min_height(columns).value;
  if (width <= 0.0)
    throw SingularMatrix("column tuple has zero width; matrix is singular");
  InverseWithBound out;
  out.inverse = A.partialPivLu().inverse();
  out.bound = 1.0 / width;
  return out;
}

HyperplaneFit fit_hyperplane(const PointTuple& points, int m) {
  check_tuple(points);
  const int N = static_cast<int>(points.points.size());
  const int n = static_cast<int>(points.points.front().size());
  if (m < 1 || m > n) throw InvalidInput("fit_hyperplane: need 1 <= m <= dimension");

  const int k = m - 1;
  std::vector<int> best;
  double best_vol = -1.0;

  if (k == 0) {
    best_vol = 1.0;  // the 0-plane {0}
  } else if (N <= 12) {
    // Exhaustive search over index subsets, lexicographic for determinism.
    std::vector<int> idx(static_cast<std::size_t>(k));
    auto recurse = [&](auto&& self, int depth, int start) -> void {
      if (depth == k) {
        std::vector<Eigen::VectorXd> sub;
        for (int i : idx) sub.push_back(points.points[static_cast<std::size_t>(i)]);
        const double vol = volume(sub);
        if (vol > best_vol) {
          best_vol = vol;
          best = idx;
        }
        return;
      }
      for (int i = start; i < N; ++i) {
        idx[static_cast<std::size_t>(depth)] = i;
        self(self, depth + 1, i + 1);
      }
    };
    recurse(recurse, 0, 0);
  } else {
    // Greedy farthest-point augmentation: grow the subtuple one vector at a
    // time, always taking the point of maximal added volume.
    std::vector<Eigen::VectorXd> sub;
    std::vector<bool> used(static_cast<std::size_t>(N), false);
    for (int round = 0; round < k; ++round) {
      int pick = -1;
      double pick_vol = -1.0;
      for (int i = 0; i < N; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        sub.push_back(points.points[static_cast<std::size_t>(i)]);
        const double vol = volume(sub);
        sub.pop_back();
        if (vol > pick_vol) {
          pick_vol = vol;
          pick = i;
        }
      }
      used[static_cast<std::size_t>(pick)] = true;
      best.push_back(pick);
      sub.push_back(points.points[static_cast<std::size_t>(pick)]);
      best_vol = pick_vol;
    }
    std::sort(best.begin(), best.end());
  }

  HyperplaneFit fit;
  fit.chosen = best;
  for (int i : best) fit.plane.spanning.push_back(points.points[static_cast<std::size_t>(i)]);
  for (const auto& p : points.points)
    fit.max_distance = std::max(fit.max_distance, distance_to_span(p, fit.plane.spanning));
  return fit;
}

TranslatedTuple translated_tuple(const Configuration& E, int ell) {
  if (E.algebra == nullptr) throw InvalidInput("configuration without algebra");
  const int m = static_cast<int>(E.points.size()) - 1;
  if (m < 1) throw InvalidInput("translated_tuple needs at least two points");
  if (ell < 0 || ell > m) throw InvalidInput("translated_tuple: index out of range");
  const int n = E.algebra->rank();

  std::vector<Eigen::VectorXd> pi;
  for (const auto& g : E.points) pi.push_back(project_abelianization(*E.algebra, g));

  TranslatedTuple out;
  for (int j = 0; j <= m; ++j)
    if (j != ell) out.gamma.points.push_back(pi[static_cast<std::size_t>(j)] -
                                             pi[static_cast<std::size_t>(ell)]);

  // Block-triangular transform on stacked increments: component k sums
  // increments k..ell (k <= ell) or ell+1..k (k > ell).
  out.transform = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m) * n,
                                        static_cast<Eigen::Index>(m) * n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= m; ++k) {
    if (k <= ell)
      for (int j = k; j <= ell; ++j)
        out.transform.block((k - 1) * n, (j - 1) * n, n, n) = id;
    else
      for (int j = ell + 1; j <= k; ++j)
        out.transform.block((k - 1) * n, (j - 1) * n, n, n) = id;
  }

  Eigen::VectorXd increments(static_cast<Eigen::Index>(m) * n);
  for (int j = 1; j <= m; ++j)
    increments.segment((j - 1) * n, n) =
        pi[static_cast<std::size_t>(j)] - pi[static_cast<std::size_t>(j - 1)];
  const Eigen::VectorXd image = out.transform * increments;

  // A^ell component k reproduces, up to sign, the gamma entry for j=k-1
  // (k <= ell) or j=k (k > ell); both land at position k-1 once gamma skips
  // entry ell. Compare componentwise magnitudes.
  double residual = 0.0;
  for (int k = 1; k <= m; ++k) {
    const Eigen::VectorXd& g = out.gamma.points[static_cast<std::size_t>(k - 1)];
    const Eigen::VectorXd a = image.segment((k - 1) * n, n);
    residual = std::max(residual, (a.cwiseAbs() - g.cwiseAbs()).cwiseAbs().maxCoeff());
  }
  out.sign_match_residual = residual;
  return out;
}

}  // namespace carnot
