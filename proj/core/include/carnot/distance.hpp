#pragma once

#include "carnot/algebra.hpp"

namespace carnot {

/// Two-sided bound on a Carnot-Caratheodory distance. Exact providers return
/// lower == upper.
struct DistanceInterval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Exact CC distance between two points of the Heisenberg catalog group,
/// computed by shooting over circle arcs: the holonomy angle of the arc is
/// solved by bisection (tolerance 1e-10, at most 200 iterations).
double heisenberg_distance(const GroupPoint& p, const GroupPoint& q);

/// Length of a canonical piecewise-horizontal path from the identity to g:
/// one straight segment for the layer-1 part, then commutator-word ladders
/// correcting each higher layer in ascending order. A valid upper bound for
/// d(e, g) in any step <= 4 group.
double horizontal_path_upper_bound(const StratifiedAlgebra& A, const GroupPoint& g);

/// CC-distance surrogate. Mode is chosen from the group: exact Euclidean
/// distance for step-1 groups, the exact Heisenberg solver for the
/// Heisenberg group, otherwise intervals with
///   lower = Euclidean norm of the abelianized difference,
///   upper = horizontal_path_upper_bound of the difference point.
class DistanceBoundProvider {
 public:
  enum class Mode { exact_abelian, exact_heisenberg, interval };

  explicit DistanceBoundProvider(const StratifiedAlgebra& A);

  Mode mode() const { return mode_; }
  bool exact() const { return mode_ != Mode::interval; }
  const StratifiedAlgebra& group() const { return *algebra_; }

  DistanceInterval distance(const GroupPoint& p, const GroupPoint& q) const;
  DistanceInterval distance_to_identity(const GroupPoint& g) const;

 private:
  const StratifiedAlgebra* algebra_;
  Mode mode_;
};

}  // namespace carnot
