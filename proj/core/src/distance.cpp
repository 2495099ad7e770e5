#include "carnot/distance.hpp"

#include <cmath>
#include <numbers>

namespace carnot {

namespace {

/// Ratio of vertical holonomy to squared chord length of a circle arc with
/// turning angle theta. Strictly increasing on (0, 2*pi).
double arc_ratio(double theta) {
  const double s = std::sin(0.5 * theta);
  return (theta - std::sin(theta)) / (8.0 * s * s);
}

double arc_length(double theta, double rho, double z) {
  // Length R*theta with the radius taken from whichever relation is better
  // conditioned: chord rho = 2R sin(theta/2), or holonomy z = R^2(theta-sin)/2.
  if (theta < 6.0) return rho * theta / (2.0 * std::sin(0.5 * theta));
  return theta * std::sqrt(2.0 * std::abs(z) / (theta - std::sin(theta)));
}

}  // namespace

double heisenberg_distance(const GroupPoint& p, const GroupPoint& q) {
  if (p.x.size() != 3 || q.x.size() != 3)
    throw DimensionMismatch("heisenberg_distance expects 3-dimensional points");
  // Difference point p^{-1} q under the Heisenberg product.
  const double x = q.x[0] - p.x[0];
  const double y = q.x[1] - p.x[1];
  const double z = q.x[2] - p.x[2] + 0.5 * (p.x[1] * q.x[0] - p.x[0] * q.x[1]);

  const double rho = std::hypot(x, y);
  const double az = std::abs(z);
  constexpr double pi = std::numbers::pi;
  if (az == 0.0) return rho;
  if (rho == 0.0) return std::sqrt(4.0 * pi * az);

  const double target = az / (rho * rho);
  double lo = 1e-12, hi = 2.0 * pi - 1e-12;
  if (target <= arc_ratio(lo)) return rho;
  if (target >= arc_ratio(hi)) return std::sqrt(4.0 * pi * az);
  for (int iter = 0; iter < 200 && hi - lo > 1e-10 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (arc_ratio(mid) < target ? lo : hi) = mid;
  }
  return arc_length(0.5 * (lo + hi), rho, z);
}

// ---------------------------------------------------------------------------
// Piecewise-horizontal connecting paths
// ---------------------------------------------------------------------------

namespace {

struct Word {
  std::vector<AlgebraVector> segments;  // layer-1 moves, applied in order
  double length = 0.0;
};

void append(Word& w, const Word& other) {
  w.segments.insert(w.segments.end(), other.segments.begin(), other.segments.end());
  w.length += other.length;
}

Word inverse_word(const StratifiedAlgebra& A, const Word& w) {
  Word out;
  out.length = w.length;
  for (auto it = w.segments.rbegin(); it != w.segments.rend(); ++it)
    out.segments.push_back(AlgebraVector{-it->c});
  (void)A;
  return out;
}

GroupPoint evaluate(const StratifiedAlgebra& A, const Word& w) {
  GroupPoint g = A.identity();
  for (const auto& seg : w.segments) g = bch_product(A, g, exp_point(seg));
  return g;
}

/// Word realizing exp(V + higher layers) for V supported in a single layer.
Word realize_layer_vector(const StratifiedAlgebra& A, const Eigen::VectorXd& V,
                          int layer) {
  Word word;
  if (layer == 1) {
    AlgebraVector seg = A.zero_vector();
    seg.c.head(A.rank()) = V.head(A.rank());
    word.length = seg.c.norm();
    if (word.length > 0.0) word.segments.push_back(std::move(seg));
    return word;
  }

  // Express the layer-l component as a combination of brackets of layer-1
  // with layer-(l-1) basis vectors; bracket generation makes this solvable.
  const int rows = A.layer_dim(layer);
  const int base = A.layer_begin(layer);
  std::vector<std::pair<int, int>> pairs;
  for (int a = A.layer_begin(1); a < A.layer_end(1); ++a)
    for (int b = A.layer_begin(layer - 1); b < A.layer_end(layer - 1); ++b)
      pairs.emplace_back(a, b);
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    const auto [a, b] = pairs[c];
    for (int k = 0; k < rows; ++k)
      map(k, static_cast<Eigen::Index>(c)) =
          to_double(A.structure_exact(a, b, base + k));
  }
  Eigen::VectorXd rhs(rows);
  for (int k = 0; k < rows; ++k) rhs[k] = V[base + k];
  const Eigen::VectorXd mu = map.completeOrthogonalDecomposition().solve(rhs);

  for (std::size_t c = 0; c < pairs.size(); ++c) {
    const double m = mu[static_cast<Eigen::Index>(c)];
    if (std::abs(m) < 1e-15) continue;
    const auto [a, b] = pairs[c];
    const double theta_a =
        (m < 0 ? -1.0 : 1.0) * std::pow(std::abs(m), 1.0 / layer);
    const double theta_b = std::pow(std::abs(m), (layer - 1.0) / layer);
    Eigen::VectorXd va = Eigen::VectorXd::Zero(A.dim());
    va[a] = theta_a;
    Eigen::VectorXd vb = Eigen::VectorXd::Zero(A.dim());
    vb[b] = theta_b;
    const Word wa = realize_layer_vector(A, va, 1);
    const Word wb = realize_layer_vector(A, vb, layer - 1);
    append(word, wa);
    append(word, wb);
    append(word, inverse_word(A, wa));
    append(word, inverse_word(A, wb));
  }
  return word;
}

}  // namespace

double horizontal_path_upper_bound(const StratifiedAlgebra& A, const GroupPoint& g) {
  if (g.x.size() != A.dim())
    throw DimensionMismatch("horizontal_path_upper_bound: wrong dimension");
  GroupPoint reached = A.identity();
  double total = 0.0;

  // Straight horizontal segment for the layer-1 part, then commutator-word
  // ladders per ascending layer; later layers absorb the junk created below.
  {
    AlgebraVector seg = A.zero_vector();
    seg.c.head(A.rank()) = g.x.head(A.rank());
    total += seg.c.norm();
    reached = bch_product(A, reached, exp_point(seg));
  }
  for (int layer = 2; layer <= A.step(); ++layer) {
    const GroupPoint defect = bch_product(A, inverse(A, reached), g);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(A.dim());
    target.segment(A.layer_begin(layer), A.layer_dim(layer)) =
        defect.x.segment(A.layer_begin(layer), A.layer_dim(layer));
    if (target.norm() == 0.0) continue;
    const Word word = realize_layer_vector(A, target, layer);
    total += word.length;
    reached = bch_product(A, reached, evaluate(A, word));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Provider
// ---------------------------------------------------------------------------

DistanceBoundProvider::DistanceBoundProvider(const StratifiedAlgebra& A)
    : algebra_(&A) {
  if (A.step() == 1)
    mode_ = Mode::exact_abelian;
  else if (A.structurally_equal(heisenberg_group()))
    mode_ = Mode::exact_heisenberg;
  else
    mode_ = Mode::interval;
}

DistanceInterval DistanceBoundProvider::distance(const GroupPoint& p,
                                                 const GroupPoint& q) const {
  switch (mode_) {
    case Mode::exact_abelian: {
      const double d = (p.x - q.x).norm();
      return {d, d};
    }
    case Mode::exact_heisenberg: {
      const double d = heisenberg_distance(p, q);
      return {d, d};
    }
    case Mode::interval: {
      const GroupPoint diff = bch_product(*algebra_, inverse(*algebra_, p), q);
      return {diff.x.head(algebra_->rank()).norm(),
              horizontal_path_upper_bound(*algebra_, diff)};
    }
  }
  return {};
}

DistanceInterval DistanceBoundProvider::distance_to_identity(const GroupPoint& g) const {
  return distance(algebra_->identity(), g);
}

}  // namespace carnot
