#pragma once

#include <optional>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/distance.hpp"
#include "carnot/hgeom.hpp"

namespace carnot {

/// Solution of the bracket linear system sum_j [Y_j, X_j] = Z with
/// X_j = log(x_{j-1}^{-1} x_j) and every Y_j supported in layer s-1.
struct CorrectionSolution {
  std::vector<AlgebraVector> Y;      // r correctors in V_{s-1}
  std::vector<AlgebraVector> W;      // intermediate solve on the pivot subspace
  Eigen::MatrixXd B;                 // inverse of the abelianized increment matrix
  AlgebraVector residual;            // sum_j [Y_j, X_j] - Z
  double size = 0.0;                 // Size of the configuration
  double inverse_entry_bound = 0.0;  // 1/Width from the Cramer estimate
  /// Measured constant of the norm bound: max_j |Y_j|_hom^{s-1} Size / |Z|_hom^s.
  double reported_K = 0.0;
};

/// Solve the linear system of corrections for a configuration of r+1 points
/// and a last-layer right-hand side Z: solve Z = sum_l [W_l, Xbar_l] on a
/// column-pivoted subspace of V_{s-1}^r, then transport through the inverse
/// increment matrix, Y_j = sum_l B_jl W_l.
CorrectionSolution solve_correction(const StratifiedAlgebra& A,
                                    const std::vector<GroupPoint>& xs,
                                    const AlgebraVector& Z);

/// The interleaved perturbation word of the error-correction procedure.
struct PerturbationTrace {
  std::vector<GroupPoint> alphas;  // alpha_0 = x_0, alpha_j = x_{j-1}^{-1} x_j
  std::vector<GroupPoint> betas;   // beta_0 = y_1, beta_j = y_j^{-1} y_{j+1}, beta_r = y_r^{-1}
  GroupPoint product;              // evaluated word  prod_j alpha_j beta_j
  GroupPoint target;               // k x_r; equals product up to roundoff
  double added_cost = 0.0;         // sum of homogeneous norms of the beta_j
  double cost_bound = 0.0;         // 2(r+1) K^{1/(s-1)} (|k|^s / Size)^{1/(s-1)}
  CorrectionSolution correction;
};

/// Build the perturbation word moving the endpoint of the telescoped
/// configuration by a central element k in exp(V_s). The word evaluates to
/// k x_r exactly (group identity); the trace records the roundoff residual
/// implicitly via `product` vs `target`.
PerturbationTrace perturbation_product(const StratifiedAlgebra& A,
                                       const std::vector<GroupPoint>& xs,
                                       const GroupPoint& k);

struct TriangleIntervals {
  DistanceInterval lhs;             // d(y_0, y_{r+2})
  DistanceInterval rhs;             // quotient term + correction + remaining sum
  DistanceInterval quotient_term;   // d(pi_s y_{l-1}, pi_s y_l)
  DistanceInterval correction_term; // K (d(y_{l-1}, y_l)^s / Size)^{1/(s-1)}
  double size = 0.0;                // Size of the configuration without slots l-1, l
  double K = 0.0;                   // constant actually used
};

/// Evaluate both sides of the modified triangle inequality as intervals.
/// E has r+3 points, 1 <= ell <= r+2 (slots ell-1 and ell are replaced by the
/// quotient distance). K defaults to the composed empirical constant
/// 2^{s/(s-1)} * 2(r+1) * K_emp^{1/(s-1)} with K_emp measured on E_ell.
TriangleIntervals modified_triangle_rhs(const StratifiedAlgebra& A,
                                        const std::vector<GroupPoint>& E, int ell,
                                        const DistanceBoundProvider& provider,
                                        std::optional<double> K = std::nullopt);

}  // namespace carnot
