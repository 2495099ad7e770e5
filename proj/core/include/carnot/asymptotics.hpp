#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/distance.hpp"
#include "carnot/extremal.hpp"
#include "carnot/hgeom.hpp"

namespace carnot {

/// Left translate of a one-parameter subgroup: t -> base * exp(t direction).
/// The direction need not be horizontal.
struct Line {
  GroupPoint base;
  AlgebraVector direction;
};

GroupPoint line_point(const StratifiedAlgebra& A, const Line& L, double t);

using CurveFn = std::function<GroupPoint(double)>;

/// The dilated curve gamma_h(t) = delta_{1/h}( gamma(t_bar)^{-1} gamma(t_bar + h t) ),
/// the non-abelian difference quotient. gamma_h(0) is the identity. An
/// optional source domain is enforced on evaluation.
struct DilatedCurveView {
  const StratifiedAlgebra* algebra = nullptr;
  CurveFn source;
  double h = 1.0;
  double t_bar = 0.0;
  std::optional<std::pair<double, double>> domain;
};

GroupPoint blow(const DilatedCurveView& view, double t);

/// A curve sample tagged with its parameter, for windowed set comparisons.
struct ParamPoint {
  double t = 0.0;
  GroupPoint p;
};

struct BlowdownReport {
  std::vector<double> h;
  std::vector<double> grid;                       // window sample times
  std::vector<std::vector<GroupPoint>> dilates;   // one row per h
  /// Sup over the grid of the provider distance between consecutive dilates;
  /// a Cauchy-style convergence diagnostic, not a limit claim.
  std::vector<DistanceInterval> consecutive_sup;
};

/// Sample gamma_{h_j} over [-window, window] for an increasing h sequence and
/// report the convergence diagnostic. Uniqueness is never claimed; callers
/// inspect the report.
BlowdownReport blowdown_estimate(const StratifiedAlgebra& A, const CurveFn& source,
                                 const std::vector<double>& h_sequence, double window,
                                 int samples, const DistanceBoundProvider& provider,
                                 double t_bar = 0.0);

struct EuclideanBlowdown {
  Eigen::VectorXd v_plus;         // limit direction estimate gamma(t)/|gamma(t)|, t >> 0
  Eigen::VectorXd v_minus;        // same for t << 0
  double antipodal_error = 0.0;   // |v_plus + v_minus|
  double max_angle_excess = 0.0;  // worst (1 - cos angle) - 24/s over checked pairs
  int pairs_checked = 0;
};

/// Blowdown of a (1,C)-quasi-geodesic in R^n from samples: validates the
/// quasi-geodesic bounds (throwing NotAQuasiGeodesic with a witness pair),
/// translates so gamma(0) = 0, checks the angle bound 1 - cos <= 24/s for all
/// sampled |t| >= |s| >= 2C on a common side, and estimates the limit
/// directions.
EuclideanBlowdown euclidean_blowdown(const std::vector<double>& times,
                                     const std::vector<Eigen::VectorXd>& points,
                                     double C);

struct LineMatch {
  double c = 1.0;       // reparametrization factor, > 0
  GroupPoint k;         // right translation: L1(t) = L2(c t) k
  double fit_residual = 0.0;
};

/// Decide whether two lines are at finite Hausdorff distance on R_+ via the
/// algebraic criterion X = c Ad_{g^-1 h} Y (1-D least squares, residual
/// threshold 1e-10). On success also returns the right-translation element,
/// verified at t in {0, 1, -1}; on failure the distance is infinite.
std::optional<LineMatch> lines_finite_distance(const StratifiedAlgebra& A,
                                               const Line& L1, const Line& L2);

/// Two-sided bounds for the symmetric Hausdorff functional between two
/// sampled sets, restricted to parameters |t| <= T.
DistanceInterval hausdorff_truncated(const StratifiedAlgebra& A,
                                     const std::vector<ParamPoint>& a,
                                     const std::vector<ParamPoint>& b,
                                     const DistanceBoundProvider& provider, double T);

/// z(t) = L(t)^{-1} curve(t); decay or boundedness of its coordinates
/// certifies asymptote claims.
GroupPoint asymptote_residual(const StratifiedAlgebra& A, const CurveFn& curve,
                              const Line& L, double t);

struct TangentCheckReport {
  double fitted_C = 0.0;       // smallest grid value with no lower-bound violation
  double max_ratio = 0.0;      // max (|a-b| - d)/|a-b|^{s/(s-1)} over pairs
  double max_upper_excess = 0.0;  // max d - |a-b| (should stay <= solver noise)
  int pairs = 0;
};

/// Instance check of the quantified tangent estimate for a curve in the
/// Engel group: over random parameter pairs in (t_bar - delta, t_bar + delta),
/// the Heisenberg-quotient distance must sit in
/// [|a-b| - C |a-b|^{3/2}, |a-b|]. Only the Engel group carries the exact
/// quotient provider, so other groups are rejected.
TangentCheckReport quantified_tangent_check(const StratifiedAlgebra& A,
                                            const CurveFn& curve, double t_bar,
                                            double delta, int pairs,
                                            unsigned long long seed);

struct RoughProjectionReport {
  double hyperplane_K = 0.0;   // horn (i): neighborhood radius achieved by the fit
  bool horn_quasigeodesic = false;  // horn (ii): abelianized (1, C') bounds hold
  double c_prime = 0.0;        // (r+2)^{s-1} C
  double worst_defect = 0.0;   // largest violation of the C' band (0 when none)
  std::optional<std::pair<double, double>> violating_pair;
};

/// Dichotomy check for rough geodesics: after validating the (1,C) bounds
/// with the group provider, test whether the abelianized samples satisfy the
/// (1, (r+2)^{s-1} C) bounds, and report the hyperplane-fit radius K.
RoughProjectionReport rough_projection_check(const StratifiedAlgebra& A,
                                             const std::vector<ParamPoint>& samples,
                                             double C,
                                             const DistanceBoundProvider& provider);

}  // namespace carnot
