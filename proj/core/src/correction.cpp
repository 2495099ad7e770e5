#include "carnot/correction.hpp"

#include <cmath>

namespace carnot {

namespace {

void require_layer_support(const StratifiedAlgebra& A, const Eigen::VectorXd& v,
                           int layer, const char* what) {
  for (int k = 0; k < A.dim(); ++k)
    if (A.layer_of(k) != layer && v[k] != 0.0)
      throw InvalidInput(std::string(what) + " must be supported in layer " +
                         std::to_string(layer));
}

Eigen::MatrixXd increment_matrix(const StratifiedAlgebra& A,
                                 const std::vector<GroupPoint>& xs) {
  const int r = A.rank();
  Eigen::MatrixXd M(r, r);
  for (int j = 1; j <= r; ++j)
    M.col(j - 1) = project_abelianization(A, xs[static_cast<std::size_t>(j)]) -
                   project_abelianization(A, xs[static_cast<std::size_t>(j - 1)]);
  return M;
}

}  // namespace

CorrectionSolution solve_correction(const StratifiedAlgebra& A,
                                    const std::vector<GroupPoint>& xs,
                                    const AlgebraVector& Z) {
  const int r = A.rank();
  const int s = A.step();
  if (s < 2) throw InvalidInput("correction system needs step >= 2");
  if (static_cast<int>(xs.size()) != r + 1)
    throw InvalidInput("correction system needs r+1 points");
  if (Z.c.size() != A.dim()) throw DimensionMismatch("right-hand side has wrong dimension");
  require_layer_support(A, Z.c, s, "Z");

  CorrectionSolution sol;
  sol.size = size(Configuration{&A, xs});
  if (sol.size <= 0.0)
    throw SingularConfiguration("configuration has zero size");

  // Invert the abelianized increment matrix; Width > 0 since Size > 0.
  const InverseWithBound inv = inverse_with_bound(increment_matrix(A, xs));
  sol.B = inv.inverse;
  sol.inverse_entry_bound = inv.bound;

  // Solve Z = sum_l [W_l, Xbar_l] over (V_{s-1})^r, restricted to pivot
  // columns of the bracket map (column-pivoted QR: deterministic largest-norm
  // pivoting).
  const int top_dim = A.layer_dim(s);
  const int top_base = A.layer_begin(s);
  const int mid_dim = A.layer_dim(s - 1);
  const int mid_base = A.layer_begin(s - 1);
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(top_dim, static_cast<Eigen::Index>(r) * mid_dim);
  for (int l = 0; l < r; ++l)
    for (int p = 0; p < mid_dim; ++p)
      for (int k = 0; k < top_dim; ++k)
        map(k, l * mid_dim + p) =
            to_double(A.structure_exact(mid_base + p, l, top_base + k));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(map);
  qr.setThreshold(1e-10);
  if (qr.rank() < top_dim)
    throw RankDeficiency("bracket map V_{s-1}^r -> V_s lost rank");
  Eigen::VectorXd rhs(top_dim);
  for (int k = 0; k < top_dim; ++k) rhs[k] = Z.c[top_base + k];
  const Eigen::VectorXd w = qr.solve(rhs);

  for (int l = 0; l < r; ++l) {
    AlgebraVector W = A.zero_vector();
    for (int p = 0; p < mid_dim; ++p) W.c[mid_base + p] = w[l * mid_dim + p];
    sol.W.push_back(std::move(W));
  }
  for (int j = 0; j < r; ++j) {
    AlgebraVector Y = A.zero_vector();
    for (int l = 0; l < r; ++l) Y.c += sol.B(j, l) * sol.W[static_cast<std::size_t>(l)].c;
    sol.Y.push_back(std::move(Y));
  }

  // Residual of identity sum_j [Y_j, X_j] = Z with the full logarithms X_j.
  AlgebraVector acc = A.zero_vector();
  for (int j = 1; j <= r; ++j) {
    const GroupPoint diff =
        bch_product(A, inverse(A, xs[static_cast<std::size_t>(j - 1)]),
                    xs[static_cast<std::size_t>(j)]);
    acc.c += bracket(A, sol.Y[static_cast<std::size_t>(j - 1)], log_vector(diff)).c;
  }
  sol.residual = AlgebraVector{acc.c - Z.c};

  const double z_hom = homogeneous_norm(A, Z);
  if (z_hom > 0.0) {
    double worst = 0.0;
    for (const auto& Y : sol.Y)
      worst = std::max(worst, std::pow(homogeneous_norm(A, Y), s - 1));
    sol.reported_K = worst * sol.size / std::pow(z_hom, s);
  }
  return sol;
}

PerturbationTrace perturbation_product(const StratifiedAlgebra& A,
                                       const std::vector<GroupPoint>& xs,
                                       const GroupPoint& k) {
  const int r = A.rank();
  const int s = A.step();
  if (k.x.size() != A.dim()) throw DimensionMismatch("k has wrong dimension");
  require_layer_support(A, k.x, s, "k");

  PerturbationTrace trace;
  trace.correction = solve_correction(A, xs, log_vector(k));

  std::vector<GroupPoint> y;
  y.reserve(static_cast<std::size_t>(r));
  for (const auto& Y : trace.correction.Y) y.push_back(exp_point(Y));

  trace.alphas.push_back(xs[0]);
  for (int j = 1; j <= r; ++j)
    trace.alphas.push_back(bch_product(A, inverse(A, xs[static_cast<std::size_t>(j - 1)]),
                                       xs[static_cast<std::size_t>(j)]));
  trace.betas.push_back(y[0]);
  for (int j = 1; j <= r - 1; ++j)
    trace.betas.push_back(bch_product(A, inverse(A, y[static_cast<std::size_t>(j - 1)]),
                                      y[static_cast<std::size_t>(j)]));
  trace.betas.push_back(inverse(A, y[static_cast<std::size_t>(r - 1)]));

  GroupPoint word = A.identity();
  for (int j = 0; j <= r; ++j) {
    word = bch_product(A, word, trace.alphas[static_cast<std::size_t>(j)]);
    word = bch_product(A, word, trace.betas[static_cast<std::size_t>(j)]);
  }
  trace.product = word;
  trace.target = bch_product(A, k, xs[static_cast<std::size_t>(r)]);

  for (const auto& b : trace.betas) trace.added_cost += homogeneous_norm(A, b);
  const double k_hom = homogeneous_norm(A, k);
  trace.cost_bound = 2.0 * (r + 1) *
                     std::pow(trace.correction.reported_K, 1.0 / (s - 1)) *
                     std::pow(std::pow(k_hom, s) / trace.correction.size, 1.0 / (s - 1));
  return trace;
}

TriangleIntervals modified_triangle_rhs(const StratifiedAlgebra& A,
                                        const std::vector<GroupPoint>& E, int ell,
                                        const DistanceBoundProvider& provider,
                                        std::optional<double> K) {
  const int r = A.rank();
  const int s = A.step();
  if (s < 2) throw InvalidInput("modified triangle inequality needs step >= 2");
  if (static_cast<int>(E.size()) != r + 3)
    throw InvalidInput("configuration must have r+3 points");
  if (ell < 1 || ell > r + 2) throw InvalidInput("slot index out of range");

  std::vector<GroupPoint> E_ell;
  for (int j = 0; j <= r + 2; ++j)
    if (j != ell - 1 && j != ell) E_ell.push_back(E[static_cast<std::size_t>(j)]);

  TriangleIntervals out;
  out.size = size(Configuration{&A, E_ell});
  if (out.size <= 0.0)
    throw SingularConfiguration("reduced configuration has zero size");

  if (K) {
    out.K = *K;
  } else {
    // Composed empirical constant 2^{s/(s-1)} * 2(r+1) * K^{1/(s-1)}, with K
    // the measured corrector-norm ratio maximised over last-layer basis
    // directions.
    double k_emp = 0.0;
    for (int k = A.layer_begin(s); k < A.layer_end(s); ++k)
      k_emp = std::max(
          k_emp, solve_correction(A, E_ell, A.basis_vector(k)).reported_K);
    out.K = std::pow(2.0, static_cast<double>(s) / (s - 1)) * 2.0 * (r + 1) *
            std::pow(k_emp, 1.0 / (s - 1));
  }

  const StratifiedAlgebra quotient = quotient_mod_last_layer(A);
  const DistanceBoundProvider quotient_provider(quotient);
  out.quotient_term = quotient_provider.distance(
      project_mod_last_layer(A, E[static_cast<std::size_t>(ell - 1)]),
      project_mod_last_layer(A, E[static_cast<std::size_t>(ell)]));

  const DistanceInterval removed =
      provider.distance(E[static_cast<std::size_t>(ell - 1)], E[static_cast<std::size_t>(ell)]);
  const double exponent = 1.0 / (s - 1);
  out.correction_term = {out.K * std::pow(std::pow(removed.lower, s) / out.size, exponent),
                         out.K * std::pow(std::pow(removed.upper, s) / out.size, exponent)};

  out.lhs = provider.distance(E.front(), E.back());
  out.rhs = {out.quotient_term.lower + out.correction_term.lower,
             out.quotient_term.upper + out.correction_term.upper};
  for (int j = 1; j <= r + 2; ++j) {
    if (j == ell) continue;
    const DistanceInterval d = provider.distance(E[static_cast<std::size_t>(j - 1)],
                                                 E[static_cast<std::size_t>(j)]);
    out.rhs.lower += d.lower;
    out.rhs.upper += d.upper;
  }
  return out;
}

}  // namespace carnot
