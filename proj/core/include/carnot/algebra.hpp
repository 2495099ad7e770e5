#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/rational.hpp"

namespace carnot {

/// Coefficient vector over the graded basis of a stratified algebra.
struct AlgebraVector {
  Eigen::VectorXd c;
};

/// The same coefficients read as exponential coordinates of a group element.
/// Identity is the zero vector and inversion is coordinate negation.
struct GroupPoint {
  Eigen::VectorXd x;
};

inline GroupPoint exp_point(const AlgebraVector& v) { return GroupPoint{v.c}; }
inline AlgebraVector log_vector(const GroupPoint& g) { return AlgebraVector{g.x}; }

/// One nonzero entry of the structure tensor: [e_i, e_j] ∋ coeff · e_k.
struct BracketTerm {
  int i, j, k;
  double coeff;
};

/// A Carnot (stratified nilpotent) Lie algebra given by a graded basis and
/// exact structure constants. Immutable after construction; construction
/// validates antisymmetry, the grading, the Jacobi identity (exactly, over
/// the rationals) and that the first layer bracket-generates every layer.
class StratifiedAlgebra {
 public:
  /// `layers[j]` lists the basis labels of layer j+1; `brackets` maps an
  /// ordered label pair to the expansion of their bracket. The reversed pair
  /// is filled in by antisymmetry; listing both orders is an error unless
  /// they agree.
  StratifiedAlgebra(std::string name,
                    std::vector<std::vector<std::string>> layers,
                    const std::map<std::pair<std::string, std::string>,
                                   std::map<std::string, Rational>>& brackets);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(labels_.size()); }
  int step() const { return step_; }
  int rank() const { return rank_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int layer_of(int index) const { return layer_of_[index]; }
  int layer_dim(int layer) const { return layer_end(layer) - layer_begin(layer); }
  /// Basis indices of layer j occupy [layer_begin(j), layer_end(j)).
  int layer_begin(int layer) const { return layer_begin_[layer - 1]; }
  int layer_end(int layer) const { return layer_begin_[layer]; }
  int index_of(const std::string& label) const;

  Rational structure_exact(int i, int j, int k) const {
    return exact_[(static_cast<std::size_t>(i) * dim() + j) * dim() + k];
  }
  const std::vector<BracketTerm>& bracket_terms() const { return terms_; }

  AlgebraVector zero_vector() const { return AlgebraVector{Eigen::VectorXd::Zero(dim())}; }
  GroupPoint identity() const { return GroupPoint{Eigen::VectorXd::Zero(dim())}; }
  AlgebraVector basis_vector(int index) const;

  /// True when labels, layers and structure constants coincide (names may differ).
  bool structurally_equal(const StratifiedAlgebra& other) const;

 private:
  void validate() const;
  bool index_map_contains(const std::string& label) const;

  std::string name_;
  std::vector<std::string> labels_;
  std::vector<int> layer_of_;              // 1-based layer per basis index
  std::vector<int> layer_begin_;           // size step+1, layer-major offsets
  int step_ = 1;
  int rank_ = 0;
  std::vector<Rational> exact_;            // dense dim^3 tensor, exact
  std::vector<BracketTerm> terms_;         // nonzero entries, as doubles
};

// ---------------------------------------------------------------------------
// Algebra and group operations
// ---------------------------------------------------------------------------

/// Lie bracket [X, Y] via the structure tensor.
AlgebraVector bracket(const StratifiedAlgebra& A, const AlgebraVector& X,
                      const AlgebraVector& Y);

/// Group product in exponential coordinates, evaluated by the closed
/// Baker-Campbell-Hausdorff polynomial
///   x + y + 1/2 [x,y] + 1/12 ([x,[x,y]] + [[x,y],y]) + 1/24 [x,[[x,y],y]],
/// exact for step <= 4. Steps beyond 4 raise UnsupportedStep.
GroupPoint bch_product(const StratifiedAlgebra& A, const GroupPoint& x,
                       const GroupPoint& y);

GroupPoint inverse(const StratifiedAlgebra& A, const GroupPoint& g);

/// Dilation delta_h: layer-j coefficients scale by h^j. Requires h > 0.
AlgebraVector dilate(const StratifiedAlgebra& A, double h, const AlgebraVector& X);
GroupPoint dilate(const StratifiedAlgebra& A, double h, const GroupPoint& g);

/// The isometric flip delta_{-1}: layer-j coefficients scale by (-1)^j.
AlgebraVector flip(const StratifiedAlgebra& A, const AlgebraVector& X);
GroupPoint flip(const StratifiedAlgebra& A, const GroupPoint& g);

/// Matrix of ad_X on the basis: (ad_X)_{k,i} = [X, e_i]_k.
Eigen::MatrixXd ad_matrix(const StratifiedAlgebra& A, const AlgebraVector& X);

/// Ad_g = e^{ad(log g)}; the series terminates by nilpotency.
Eigen::MatrixXd adjoint(const StratifiedAlgebra& A, const GroupPoint& g);

/// Projection onto the abelianization: the layer-1 coordinates.
Eigen::VectorXd project_abelianization(const StratifiedAlgebra& A, const GroupPoint& g);

/// The step-(s-1) quotient algebra obtained by deleting the last layer.
StratifiedAlgebra quotient_mod_last_layer(const StratifiedAlgebra& A);

/// Image of g in the quotient modulo exp(V_s): drop the layer-s coordinates.
/// (V_s is central, so in exponential coordinates this is a truncation.)
GroupPoint project_mod_last_layer(const StratifiedAlgebra& A, const GroupPoint& g);

/// Iterated quotient down to step 2. Defined for the rank-2 catalog groups,
/// where the result is the Heisenberg group.
StratifiedAlgebra quotient_to_step2(const StratifiedAlgebra& A);
GroupPoint project_to_step2(const StratifiedAlgebra& A, const GroupPoint& g);

/// Left-invariant frame at x: column i is X_i(x) = d/dt|_0 bch(x, t e_i),
/// i.e. e_i + 1/2 [x, e_i] + 1/12 [x, [x, e_i]] for step <= 4.
std::vector<AlgebraVector> left_invariant_frame(const StratifiedAlgebra& A,
                                                const GroupPoint& x);

/// Exact Jacobi residual max |[[e_i,e_j],e_k] + cyclic|; zero for any
/// successfully constructed algebra (exposed for reporting).
Rational jacobi_residual(const StratifiedAlgebra& A);

/// Homogeneous norm ||X|| = max_j ||X_(j)||_2^{1/j}; 1-homogeneous under
/// dilations.
double homogeneous_norm(const StratifiedAlgebra& A, const AlgebraVector& X);
double homogeneous_norm(const StratifiedAlgebra& A, const GroupPoint& g);

// ---------------------------------------------------------------------------
// Catalog and file loader
// ---------------------------------------------------------------------------

StratifiedAlgebra euclidean_group(int n);
StratifiedAlgebra heisenberg_group();
StratifiedAlgebra free_step2_group(int r);
StratifiedAlgebra engel_group();
StratifiedAlgebra rank2_step4_group();

/// Resolve a catalog name: "heisenberg", "engel", "g_rank2_step4",
/// "euclidean(n)", "free_step2(r)" (also accepted with ':' instead of
/// parentheses).
StratifiedAlgebra catalog(const std::string& name);

/// Parse an algebra-definition document (JSON): fields `name`, `step`,
/// `layers` (list of label lists), `brackets` (entries
/// [lhs, rhs, {label: coefficient}] with integer or "p/q" coefficients).
/// Omitted brackets are zero; the antisymmetric completion is automatic;
/// grading or Jacobi violations are rejected.
StratifiedAlgebra parse_algebra_definition(const std::string& json_text);
StratifiedAlgebra load_algebra_file(const std::string& path);

}  // namespace carnot
