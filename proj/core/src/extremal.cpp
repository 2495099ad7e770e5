#include "carnot/extremal.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace carnot {

namespace {

void check_pair(const StratifiedAlgebra& A, const CovectorPair& pair) {
  if (pair.lambda.size() != A.dim())
    throw DimensionMismatch("covector has wrong dimension");
}

/// Right-hand side of the extremal ODE with the covector pulled back to the
/// initial point: f(x) = sum_i u_i X_i(x) with u = (Ad_{g0^-1 x})^T lambda / xi.
struct ExtremalField {
  const StratifiedAlgebra* A;
  Eigen::MatrixXd ad_g0_inverse;
  Eigen::VectorXd lambda;
  double xi;

  Eigen::VectorXd control_at(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd ad = adjoint(*A, GroupPoint{x});
    return ((ad_g0_inverse * ad).transpose() * lambda).head(A->rank()) / xi;
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd u = control_at(x);
    AlgebraVector v = A->zero_vector();
    v.c.head(A->rank()) = u;
    const AlgebraVector X{x};
    const AlgebraVector b1 = bracket(*A, X, v);
    const AlgebraVector b2 = bracket(*A, X, b1);
    return v.c + 0.5 * b1.c + b2.c / 12.0;
  }
};

Eigen::VectorXd rk4_step(const ExtremalField& f, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd k1 = f(x);
  const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ExtremalField make_field(const StratifiedAlgebra& A, const CovectorPair& pair,
                         const GroupPoint& g0) {
  check_pair(A, pair);
  if (g0.x.size() != A.dim()) throw DimensionMismatch("initial point has wrong dimension");
  if (pair.xi == 0.0)
    throw UnsupportedMode(
        "abnormal pair (xi = 0): the maximum principle fixes no dynamics");
  return ExtremalField{&A, adjoint(A, inverse(A, g0)), pair.lambda, pair.xi};
}

}  // namespace

Eigen::VectorXd control(const StratifiedAlgebra& A, const CovectorPair& pair,
                        const GroupPoint& g) {
  check_pair(A, pair);
  return (adjoint(A, g).transpose() * pair.lambda).head(A.rank());
}

SampledCurve integrate_extremal(const StratifiedAlgebra& A, const CovectorPair& pair,
                                const GroupPoint& g0, double t0, double t1,
                                double step) {
  if (!(step > 0.0)) throw InvalidInput("integration step must be positive");
  if (!(t0 <= 0.0 && 0.0 <= t1 && t0 < t1))
    throw InvalidInput("integration span must satisfy t0 <= 0 <= t1, t0 < t1");
  const ExtremalField field = make_field(A, pair, g0);

  auto march = [&](double span) {
    std::vector<std::pair<double, Eigen::VectorXd>> nodes;
    if (span == 0.0) return nodes;
    const int n = std::max(1, static_cast<int>(std::lround(std::abs(span) / step)));
    const double h = span / n;
    Eigen::VectorXd x = g0.x;
    for (int i = 1; i <= n; ++i) {
      x = rk4_step(field, x, h);
      nodes.emplace_back(i * h, x);
    }
    return nodes;
  };

  const auto backward = march(t0);
  const auto forward = march(t1);

  SampledCurve curve;
  const auto push = [&](double t, const Eigen::VectorXd& x) {
    curve.times.push_back(t);
    curve.points.push_back(GroupPoint{x});
    curve.controls.push_back(field.control_at(x));
  };
  for (auto it = backward.rbegin(); it != backward.rend(); ++it) push(it->first, it->second);
  push(0.0, g0.x);
  for (const auto& [t, x] : forward) push(t, x);
  return curve;
}

std::function<GroupPoint(double)> extremal_curve(const StratifiedAlgebra& A,
                                                 const CovectorPair& pair,
                                                 const GroupPoint& g0, double step) {
  if (!(step > 0.0)) throw InvalidInput("integration step must be positive");
  const ExtremalField field = make_field(A, pair, g0);
  const Eigen::VectorXd x0 = g0.x;
  return [field, x0, step](double t) {
    if (t == 0.0) return GroupPoint{x0};
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) / step)));
    const double h = t / n;
    Eigen::VectorXd x = x0;
    for (int i = 0; i < n; ++i) x = rk4_step(field, x, h);
    return GroupPoint{x};
  };
}

// ---------------------------------------------------------------------------
// Closed forms for the Engel geodesic and its step-4 lift
// ---------------------------------------------------------------------------

GroupPoint engel_geodesic(double t) {
  const double ch = std::cosh(t), th = std::tanh(t);
  Eigen::VectorXd x(4);
  x << 2.0 / ch, 2.0 * th - t, t / ch, (2.0 / 3.0) * th - t / (3.0 * ch * ch);
  return GroupPoint{x};
}

Eigen::Vector4d engel_geodesic_derivative(double t) {
  const double ch = std::cosh(t), sh = std::sinh(t), th = std::tanh(t);
  Eigen::Vector4d d;
  d << -2.0 * sh / (ch * ch), 1.0 - 2.0 * th * th, (ch - t * sh) / (ch * ch),
      (ch + 2.0 * t * sh) / (3.0 * ch * ch * ch);
  return d;
}

Eigen::Vector4d engel_geodesic_field(const Eigen::Vector4d& x) {
  const double u1 = -0.5 * x[0] * x[1] - x[2];
  const double u2 = 0.5 * x[0] * x[0] - 1.0;
  Eigen::Vector4d d;
  d << u1, u2, 0.5 * (x[0] * u2 - x[1] * u1),
      x[0] * x[0] * u2 / 12.0 - (x[0] * x[1] / 12.0 + 0.5 * x[2]) * u1;
  return d;
}

SampledCurve integrate_engel_geodesic_ode(double t0, double t1, double step) {
  if (!(step > 0.0)) throw InvalidInput("integration step must be positive");
  if (!(t0 <= 0.0 && 0.0 <= t1 && t0 < t1))
    throw InvalidInput("integration span must satisfy t0 <= 0 <= t1, t0 < t1");
  Eigen::Vector4d start;
  start << 2, 0, 0, 0;

  auto rk4 = [](const Eigen::Vector4d& x, double h) {
    const Eigen::Vector4d k1 = engel_geodesic_field(x);
    const Eigen::Vector4d k2 = engel_geodesic_field(x + 0.5 * h * k1);
    const Eigen::Vector4d k3 = engel_geodesic_field(x + 0.5 * h * k2);
    const Eigen::Vector4d k4 = engel_geodesic_field(x + h * k3);
    return (x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
  };
  auto march = [&](double span) {
    std::vector<std::pair<double, Eigen::Vector4d>> nodes;
    if (span == 0.0) return nodes;
    const int n = std::max(1, static_cast<int>(std::lround(std::abs(span) / step)));
    const double h = span / n;
    Eigen::Vector4d x = start;
    for (int i = 1; i <= n; ++i) {
      x = rk4(x, h);
      nodes.emplace_back(i * h, x);
    }
    return nodes;
  };
  const auto backward = march(t0);
  const auto forward = march(t1);

  SampledCurve curve;
  const auto push = [&](double t, const Eigen::Vector4d& x) {
    curve.times.push_back(t);
    curve.points.push_back(GroupPoint{x});
    curve.controls.push_back(engel_geodesic_field(x).head<2>());
  };
  for (auto it = backward.rbegin(); it != backward.rend(); ++it) push(it->first, it->second);
  push(0.0, start);
  for (const auto& [t, x] : forward) push(t, x);
  return curve;
}

double lift_x122(double t) {
  const double ch = std::cosh(t), sh = std::sinh(t);
  return (t * t + 4.0) / (6.0 * ch) + t * sh / (3.0 * ch * ch);
}

double lift_x122_derivative(double t) {
  const double ch = std::cosh(t), sh = std::sinh(t);
  return 2.0 * t / (3.0 * ch * ch * ch) - (t * t + 2.0) * sh / (6.0 * ch * ch);
}

namespace {

/// Integrand of the 1122 horizontality condition along the lift, with every
/// lower coordinate injected in closed form.
double lift_x1122_rate(double t) {
  const GroupPoint beta = engel_geodesic(t);
  const Eigen::Vector4d dbeta = engel_geodesic_derivative(t);
  const double x1 = beta.x[0], x2 = beta.x[1], x12 = beta.x[2], x112 = beta.x[3];
  const double x122 = lift_x122(t);
  return (x12 * x2 / 12.0 - 0.5 * x122) * dbeta[0] +
         (x1 * x12 / 12.0 + 0.5 * x112) * dbeta[1];
}

/// Composite Simpson over [a, b] with at least ~1024 nodes per unit time.
double simpson(double a, double b) {
  if (a == b) return 0.0;
  const int n = 2 * std::max(1, static_cast<int>(std::ceil(std::abs(b - a) * 512.0)));
  const double h = (b - a) / n;
  double sum = lift_x1122_rate(a) + lift_x1122_rate(b);
  for (int i = 1; i < n; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * lift_x1122_rate(a + i * h);
  return sum * h / 3.0;
}

GroupPoint assemble_lift(double t, double x1122) {
  const GroupPoint beta = engel_geodesic(t);
  Eigen::VectorXd x(6);
  x << beta.x[0], beta.x[1], beta.x[2], beta.x[3], lift_x122(t), x1122;
  return GroupPoint{x};
}

}  // namespace

GroupPoint engel_geodesic_lift(double t) { return assemble_lift(t, simpson(0.0, t)); }

std::vector<GroupPoint> engel_geodesic_lift_grid(double t0, double t1, int samples) {
  if (samples < 2 || !(t0 < t1)) throw InvalidInput("bad lift grid");
  std::vector<double> ts(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i)
    ts[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / (samples - 1);

  // Cumulative integral anchored at 0: march outward so segment integrals add.
  std::vector<double> integral(ts.size(), 0.0);
  int anchor = 0;
  for (int i = 1; i < samples; ++i)
    if (std::abs(ts[static_cast<std::size_t>(i)]) < std::abs(ts[static_cast<std::size_t>(anchor)]))
      anchor = i;
  integral[static_cast<std::size_t>(anchor)] = simpson(0.0, ts[static_cast<std::size_t>(anchor)]);
  for (int i = anchor + 1; i < samples; ++i)
    integral[static_cast<std::size_t>(i)] =
        integral[static_cast<std::size_t>(i - 1)] +
        simpson(ts[static_cast<std::size_t>(i - 1)], ts[static_cast<std::size_t>(i)]);
  for (int i = anchor - 1; i >= 0; --i)
    integral[static_cast<std::size_t>(i)] =
        integral[static_cast<std::size_t>(i + 1)] +
        simpson(ts[static_cast<std::size_t>(i + 1)], ts[static_cast<std::size_t>(i)]);

  std::vector<GroupPoint> out;
  out.reserve(ts.size());
  for (int i = 0; i < samples; ++i)
    out.push_back(assemble_lift(ts[static_cast<std::size_t>(i)],
                                integral[static_cast<std::size_t>(i)]));
  return out;
}

// ---------------------------------------------------------------------------

CovectorPair dilate_pair(const StratifiedAlgebra& A, const CovectorPair& pair, double h) {
  check_pair(A, pair);
  if (!(h > 0.0)) throw InvalidInput("dilation factor must be positive");
  CovectorPair out{pair.lambda, h * pair.xi};
  for (int k = 0; k < A.dim(); ++k) out.lambda[k] *= std::pow(h, A.layer_of(k));
  return out;
}

AbnormalLimit abnormal_limit_pair(const StratifiedAlgebra& A, const CovectorPair& pair) {
  check_pair(A, pair);
  int top = 0;
  for (int k = 0; k < A.dim(); ++k)
    if (pair.lambda[k] != 0.0) top = std::max(top, A.layer_of(k));
  if (top == 0) throw InvalidInput("abnormal limit of the zero covector");
  AbnormalLimit out;
  out.top_layer = top;
  out.line_case = (top == 1);
  out.pair.lambda = Eigen::VectorXd::Zero(A.dim());
  out.pair.lambda.segment(A.layer_begin(top), A.layer_dim(top)) =
      pair.lambda.segment(A.layer_begin(top), A.layer_dim(top));
  out.pair.xi = 0.0;
  return out;
}

Eigen::VectorXd Step2OdeData::solution(const Eigen::VectorXd& x0, double t) const {
  return center + ((A_lambdaV * t).exp() * (x0 - center)).eval() + drift * t;
}

Step2OdeData step2_ode_data(const StratifiedAlgebra& A, const CovectorPair& pair) {
  check_pair(A, pair);
  if (A.step() != 2)
    throw UnsupportedGroup("step-2 ODE data requires a step-2 group, got step " +
                           std::to_string(A.step()));
  const int r = A.rank();
  Step2OdeData data;
  data.A_lambdaV = Eigen::MatrixXd::Zero(r, r);
  for (const auto& term : A.bracket_terms())
    if (term.i < r && term.j < r)
      // row i of the matrix pairs lambda with [e_j, e_i]
      data.A_lambdaV(term.j, term.i) += term.coeff * pair.lambda[term.k];
  data.lambdaH_star = pair.lambda.head(r);

  // Split lambda_H^* into its image(A) part and the kernel part b; for a
  // skew matrix the two are orthogonal complements.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(data.A_lambdaV,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double tol = 1e-12 * std::max(1.0, svd.singularValues().size() > 0
                                               ? svd.singularValues()[0]
                                               : 0.0);
  Eigen::VectorXd image_part = Eigen::VectorXd::Zero(r);
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()[k] > tol)
      image_part += svd.matrixU().col(k) * svd.matrixU().col(k).dot(data.lambdaH_star);
  data.drift = data.lambdaH_star - image_part;
  data.center = data.A_lambdaV.completeOrthogonalDecomposition().solve(-image_part);
  return data;
}

}  // namespace carnot
