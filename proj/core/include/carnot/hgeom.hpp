#pragma once

#include <Eigen/Dense>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

/// Ordered tuple of vectors of a common dimension.
struct PointTuple {
  std::vector<Eigen::VectorXd> points;
};

/// Tuple of group points in a common group.
struct Configuration {
  const StratifiedAlgebra* algebra = nullptr;
  std::vector<GroupPoint> points;
};

/// Linear subspace through the origin, given by independent spanning vectors.
/// Callers fitting translated data should recentre first; the fit is linear,
/// matching the volume-maximisation argument it implements.
struct Hyperplane {
  std::vector<Eigen::VectorXd> spanning;
};

struct MinHeightResult {
  double value = 0.0;
  int achieving_index = 0;  // lowest index attaining the minimum
};

/// Minimal height of the parallelotope spanned by the tuple: the smallest
/// distance from one vector to the span of the others, computed as
/// Gram-determinant volume quotients vol_m / vol_{m-1}. Zero iff the tuple
/// is linearly dependent. Requires m <= n.
MinHeightResult min_height(const PointTuple& P);

/// Convenience overload returning just the value.
double min_height_value(const PointTuple& P);

/// Size of a configuration: the minimal height of the consecutive
/// abelianized increments. Requires 2 <= |E| <= rank+1.
double size(const Configuration& E);

struct InverseWithBound {
  Eigen::MatrixXd inverse;
  double bound = 0.0;  // 1 / Width(columns); every |B_kj| is <= bound
};

/// Inverse of a square matrix together with the entry bound 1/Width given by
/// the Cramer-rule volume estimate. Width(columns) = 0 raises SingularMatrix.
InverseWithBound inverse_with_bound(const Eigen::MatrixXd& A);

struct HyperplaneFit {
  Hyperplane plane;
  double max_distance = 0.0;       // K: the largest distance of a point to the plane
  std::vector<int> chosen;         // indices of the volume-maximising subtuple
};

/// Fit an (m-1)-dimensional subspace by choosing the (m-1)-subtuple of
/// maximal (m-1)-volume (exhaustive for <= 12 points, greedy farthest-point
/// augmentation beyond) and report the worst distance K of the input points
/// to its span.
HyperplaneFit fit_hyperplane(const PointTuple& points, int m);

struct TranslatedTuple {
  PointTuple gamma;                 // (pi(g_j) - pi(g_ell))_{j != ell}, in j order
  Eigen::MatrixXd transform;        // block-triangular A^ell acting on stacked increments
  double sign_match_residual = 0.0; // max | |A^ell(increments)_k| - |gamma_k| |
};

/// The translated tuple Gamma_ell of a configuration, together with the
/// block-triangular transform that reproduces it from the increment tuple up
/// to per-component sign.
TranslatedTuple translated_tuple(const Configuration& E, int ell);

}  // namespace carnot
