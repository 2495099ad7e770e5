#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

/// Pontryagin multiplier pair: dual coefficients over the basis plus the
/// scalar multiplier. (lambda, xi) != (0, 0) when used as a certificate;
/// xi != 0 is the normal case.
struct CovectorPair {
  Eigen::VectorXd lambda;
  double xi = 1.0;
};

/// Horizontal curve samples: strictly increasing grid, one group point and
/// one control vector (length rank, normalized by xi) per node.
struct SampledCurve {
  std::vector<double> times;
  std::vector<GroupPoint> points;
  std::vector<Eigen::VectorXd> controls;
};

/// Unnormalized control components u_i = lambda(Ad_g X_i), i = 1..rank.
Eigen::VectorXd control(const StratifiedAlgebra& A, const CovectorPair& pair,
                        const GroupPoint& g);

/// Integrate the normal extremal with gamma(0) = g0 and initial covector
/// lambda in the left-invariant trivialization at g0, i.e.
///   dgamma/dt = sum_i u_i(t) X_i(gamma),  u_i(t) = lambda(Ad_{g0^-1 gamma} X_i)/xi,
/// by the classical fixed-step 4th-order scheme. Requires t0 <= 0 <= t1
/// (the curve is anchored at 0) and step > 0; the step is adjusted to the
/// nearest exact divisor of each half-span. Abnormal pairs (xi = 0) are
/// rejected: the maximum principle alone fixes no dynamics for them.
SampledCurve integrate_extremal(const StratifiedAlgebra& A, const CovectorPair& pair,
                                const GroupPoint& g0, double t0, double t1,
                                double step);

/// Curve evaluator integrating from gamma(0) = g0 on demand with the given
/// nominal step (deterministic: N = ceil(|t|/step) equal steps).
std::function<GroupPoint(double)> extremal_curve(const StratifiedAlgebra& A,
                                                 const CovectorPair& pair,
                                                 const GroupPoint& g0, double step);

/// The explicit non-line infinite geodesic of the Engel group through
/// (2,0,0,0): (2/cosh t, 2 tanh t - t, t/cosh t, (2/3)tanh t - t/(3 cosh^2 t)).
GroupPoint engel_geodesic(double t);

/// Its time derivative (closed form), for residual checks.
Eigen::Vector4d engel_geodesic_derivative(double t);

/// The self-contained vector field the explicit geodesic satisfies: the two
/// horizontal rates close in (x1, x2, x12) and the remaining coordinates
/// follow by horizontality. A frame-free fast path, kept as an independent
/// route against the generic control/frame integration.
Eigen::Vector4d engel_geodesic_field(const Eigen::Vector4d& x);

/// RK4 integration of that field from (2,0,0,0); same span conventions as
/// integrate_extremal.
SampledCurve integrate_engel_geodesic_ode(double t0, double t1, double step);

/// Closed form of the 122-coordinate of the step-4 horizontal lift:
/// (t^2+4)/(6 cosh t) + t sinh t / (3 cosh^2 t).
double lift_x122(double t);
double lift_x122_derivative(double t);

/// Horizontal lift of the Engel geodesic to the rank-2 step-4 group with
/// initial point (2,0,0,0,2/3,0). The first five coordinates are in closed
/// form; the 1122-coordinate integrates its horizontality condition (with
/// the closed forms injected) by composite Simpson quadrature.
GroupPoint engel_geodesic_lift(double t);

/// Dense evaluation of the lift on a uniform grid (single cumulative
/// integration of the 1122-coordinate).
std::vector<GroupPoint> engel_geodesic_lift_grid(double t0, double t1, int samples);

/// Covector rescaling under dilation: (delta_h^* lambda, h xi), where layer-j
/// dual coefficients scale by h^j. Requires h > 0.
CovectorPair dilate_pair(const StratifiedAlgebra& A, const CovectorPair& pair, double h);

struct AbnormalLimit {
  CovectorPair pair;    // (lambda^{(j)}, 0) with j the top nonzero layer
  int top_layer = 0;
  bool line_case = false;  // j == 1: the control is constant and the curve a line
};

/// Limit pair of h^{-j} (delta_h^* lambda, h xi) as h -> infinity.
AbnormalLimit abnormal_limit_pair(const StratifiedAlgebra& A, const CovectorPair& pair);

struct Step2OdeData {
  Eigen::MatrixXd A_lambdaV;       // skew matrix of the vertical dual components
  Eigen::VectorXd drift;           // b: lambda_H^* projected onto ker(A) = image(A)^perp
  Eigen::VectorXd center;          // c with A c = -(lambda_H^* - b)
  Eigen::VectorXd lambdaH_star;    // full dual of the horizontal part
  /// Closed-form horizontal projection: x(t) = c + e^{At}(x0 - c) + b t.
  Eigen::VectorXd solution(const Eigen::VectorXd& x0, double t) const;
};

/// The affine ODE data of normal extremals in a step-2 group:
/// xdot = A_lambdaV x + lambda_H^*. Requires step == 2.
Step2OdeData step2_ode_data(const StratifiedAlgebra& A, const CovectorPair& pair);

}  // namespace carnot
