// carnot: experiment driver for Carnot-group geodesic numerics.
//
// Subcommands: integrate, width, fit-plane, correct, triangle, blowdown,
// lines, tangent-check, verify-engel, verify-lift, rough-check. Every run
// with the same flags and seed produces byte-identical output. Exit codes:
// 0 success, 1 assertion failure (first witness on stderr), 2 invalid input.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "carnot/asymptotics.hpp"
#include "carnot/correction.hpp"
#include "carnot/distance.hpp"
#include "carnot/extremal.hpp"
#include "carnot/hgeom.hpp"

using namespace carnot;

namespace {

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

struct Output {
  std::string path = "-";  // "-" writes to stdout
  std::string format = "csv";
  bool dry_run = false;

  std::ofstream file;
  std::ostream* stream = nullptr;

  void open() {
    if (path == "-") {
      stream = &std::cout;
      return;
    }
    std::string resolved = path;
    if (const char* dir = std::getenv("CARNOT_OUT_DIR");
        dir != nullptr && !path.empty() && path.front() != '/')
      resolved = std::string(dir) + "/" + path;
    file.open(resolved, std::ios::binary);
    if (!file) throw InvalidInput("cannot open output path: " + resolved);
    stream = &file;
  }
};

/// Round-trip-safe cell: 17 significant digits, '.' decimal point, LF rows.
std::string cell(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i)
    out << cells[i] << (i + 1 < cells.size() ? "," : "");
  out << "\n";
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(unsigned long long seed) : engine(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine() >> 11) * 0x1.0p-53);
  }
};

// ---------------------------------------------------------------------------
// Input parsing
// ---------------------------------------------------------------------------

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidInput("unparseable number in vector: " + item);
    }
  }
  if (values.empty()) throw InvalidInput("empty vector: " + text);
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

/// Point list: "@file" (one comma-separated point per line) or inline
/// "a,b;c,d" with ';' separating points.
PointTuple parse_points(const std::string& text) {
  PointTuple P;
  auto push = [&](const std::string& line) {
    if (line.empty()) return;
    P.points.push_back(parse_vector(line));
  };
  if (!text.empty() && text.front() == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw InvalidInput("cannot open points file: " + text.substr(1));
    std::string line;
    while (std::getline(in, line)) push(line);
  } else {
    std::stringstream ss(text);
    std::string chunk;
    while (std::getline(ss, chunk, ';')) push(chunk);
  }
  if (P.points.empty()) throw InvalidInput("no points given");
  return P;
}

StratifiedAlgebra resolve_group(const std::string& group, const std::string& algebra_file) {
  if (!algebra_file.empty()) return load_algebra_file(algebra_file);
  return catalog(group);
}

// ---------------------------------------------------------------------------
// SVG rendering: fixed-style polyline of the abelianized curve, rotated a
// quarter turn clockwise so the long axis runs horizontally.
// ---------------------------------------------------------------------------

void write_svg(std::ostream& out, const std::vector<Eigen::Vector2d>& abelianized) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : abelianized) {
    const Eigen::Vector2d q(p[1], -p[0]);  // rotation
    pts.push_back(q);
    xmin = std::min(xmin, q[0]);
    xmax = std::max(xmax, q[0]);
    ymin = std::min(ymin, q[1]);
    ymax = std::max(ymax, q[1]);
  }
  const double spanx = std::max(xmax - xmin, 1e-9);
  const double spany = std::max(ymax - ymin, 1e-9);
  const int W = 640, H = 400, margin = 40;
  auto sx = [&](double x) { return margin + (x - xmin) / spanx * (W - 2 * margin); };
  auto sy = [&](double y) { return H - margin - (y - ymin) / spany * (H - 2 * margin); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\">\n";
  // Axes through the origin when visible.
  if (xmin <= 0 && 0 <= xmax)
    out << "<line x1=\"" << cell(sx(0)) << "\" y1=\"" << margin << "\" x2=\""
        << cell(sx(0)) << "\" y2=\"" << H - margin
        << "\" stroke=\"#999\" stroke-dasharray=\"4\"/>\n";
  if (ymin <= 0 && 0 <= ymax)
    out << "<line x1=\"" << margin << "\" y1=\"" << cell(sy(0)) << "\" x2=\""
        << W - margin << "\" y2=\"" << cell(sy(0))
        << "\" stroke=\"#999\" stroke-dasharray=\"4\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#004488\" stroke-width=\"1.5\" points=\"";
  for (const auto& q : pts) out << cell(sx(q[0])) << "," << cell(sy(q[1])) << " ";
  out << "\"/>\n</svg>\n";
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns the process exit code.
// ---------------------------------------------------------------------------

int run_integrate(Output& out, const StratifiedAlgebra& A, const CovectorPair& pair,
                  const GroupPoint& g0, double t0, double t1, double step) {
  const auto curve = integrate_extremal(A, pair, g0, t0, t1, step);
  if (out.format == "svg") {
    std::vector<Eigen::Vector2d> ab;
    for (const auto& p : curve.points)
      ab.push_back(project_abelianization(A, p).head<2>());
    write_svg(*out.stream, ab);
    return 0;
  }
  std::vector<std::string> header = {"t"};
  for (const auto& label : A.labels()) header.push_back(label);
  for (int i = 1; i <= A.rank(); ++i) header.push_back("u" + std::to_string(i));
  header.push_back("speed");
  row(*out.stream, header);
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    std::vector<std::string> cells = {cell(curve.times[i])};
    for (int k = 0; k < A.dim(); ++k) cells.push_back(cell(curve.points[i].x[k]));
    for (int k = 0; k < A.rank(); ++k) cells.push_back(cell(curve.controls[i][k]));
    cells.push_back(cell(curve.controls[i].norm()));
    row(*out.stream, cells);
  }
  return 0;
}

int run_width(Output& out, const PointTuple& points) {
  const auto result = min_height(points);
  row(*out.stream, {"width", "achieving_index"});
  row(*out.stream, {cell(result.value), std::to_string(result.achieving_index)});
  return 0;
}

int run_fit_plane(Output& out, const PointTuple& points, int m) {
  const auto fit = fit_hyperplane(points, m);
  const int n = static_cast<int>(points.points.front().size());
  std::vector<std::string> header = {"row_type", "index"};
  for (int i = 0; i < n; ++i) header.push_back("c" + std::to_string(i));
  row(*out.stream, header);
  {
    std::vector<std::string> cells = {"max_distance", "-1", cell(fit.max_distance)};
    for (int i = 1; i < n; ++i) cells.push_back(cell(0.0));
    row(*out.stream, cells);
  }
  for (std::size_t s = 0; s < fit.plane.spanning.size(); ++s) {
    std::vector<std::string> cells = {"spanning", std::to_string(fit.chosen[s])};
    for (int i = 0; i < n; ++i) cells.push_back(cell(fit.plane.spanning[s][i]));
    row(*out.stream, cells);
  }
  return 0;
}

int run_correct(Output& out, const StratifiedAlgebra& A, int count, double min_size,
                unsigned long long seed) {
  if (A.step() < 2) throw InvalidInput("correction needs a group of step >= 2");
  Rng rng(seed);
  row(*out.stream, {"id", "size", "z_hom", "max_y_hom", "residual_identity",
                    "residual_word", "reported_K"});
  int exit_code = 0;
  for (int id = 0; id < count; ++id) {
    std::vector<GroupPoint> xs;
    do {
      xs.clear();
      for (int j = 0; j <= A.rank(); ++j) {
        Eigen::VectorXd x(A.dim());
        for (int k = 0; k < A.dim(); ++k) x[k] = rng.uniform(-1.5, 1.5);
        xs.push_back(GroupPoint{x});
      }
    } while (size(Configuration{&A, xs}) < min_size);
    AlgebraVector Z = A.zero_vector();
    for (int k = A.layer_begin(A.step()); k < A.layer_end(A.step()); ++k)
      Z.c[k] = rng.uniform(-1, 1);

    const auto trace = perturbation_product(A, xs, exp_point(Z));
    const auto& sol = trace.correction;
    double max_y = 0.0;
    for (const auto& Y : sol.Y) max_y = std::max(max_y, homogeneous_norm(A, Y));
    const double word_residual =
        (trace.product.x - trace.target.x).cwiseAbs().maxCoeff();
    const double identity_residual = sol.residual.c.cwiseAbs().maxCoeff();
    row(*out.stream,
        {std::to_string(id), cell(sol.size), cell(homogeneous_norm(A, Z)), cell(max_y),
         cell(identity_residual), cell(word_residual), cell(sol.reported_K)});
    if ((identity_residual >= 1e-10 || word_residual >= 1e-12) && exit_code == 0) {
      std::cerr << "witness: instance " << id << " residuals " << identity_residual
                << " / " << word_residual << "\n";
      exit_code = 1;
    }
  }
  return exit_code;
}

int run_triangle(Output& out, const StratifiedAlgebra& A, int count,
                 unsigned long long seed) {
  if (A.step() < 2) throw InvalidInput("triangle check needs a group of step >= 2");
  const DistanceBoundProvider provider(A);
  Rng rng(seed);
  const bool is_engel = A.structurally_equal(engel_group());
  row(*out.stream, {"id", "ell", "size", "lhs_lower", "lhs_upper", "quotient_lower",
                    "quotient_upper", "correction_lower", "correction_upper",
                    "rhs_lower", "rhs_upper", "consistent"});
  int exit_code = 0;
  int id = 0;
  while (id < count) {
    std::vector<GroupPoint> E;
    if (is_engel) {
      std::vector<double> ts;
      for (int i = 0; i < A.rank() + 3; ++i) ts.push_back(rng.uniform(-4, 4));
      std::sort(ts.begin(), ts.end());
      bool spaced = true;
      for (std::size_t i = 1; i < ts.size(); ++i) spaced &= ts[i] - ts[i - 1] > 0.1;
      if (!spaced) continue;
      for (double t : ts) E.push_back(engel_geodesic(t));
    } else {
      for (int i = 0; i < A.rank() + 3; ++i) {
        Eigen::VectorXd x(A.dim());
        for (int k = 0; k < A.dim(); ++k) x[k] = rng.uniform(-1.5, 1.5);
        E.push_back(GroupPoint{x});
      }
    }
    const int ell = 1 + static_cast<int>(rng.engine() % static_cast<unsigned>(A.rank() + 2));
    std::vector<GroupPoint> reduced;
    for (int j = 0; j < A.rank() + 3; ++j)
      if (j != ell - 1 && j != ell) reduced.push_back(E[static_cast<std::size_t>(j)]);
    if (size(Configuration{&A, reduced}) < 0.05) continue;

    const auto result = modified_triangle_rhs(A, E, ell, provider);
    const bool consistent = result.lhs.lower <= result.rhs.upper + 1e-9;
    row(*out.stream,
        {std::to_string(id), std::to_string(ell), cell(result.size),
         cell(result.lhs.lower), cell(result.lhs.upper), cell(result.quotient_term.lower),
         cell(result.quotient_term.upper), cell(result.correction_term.lower),
         cell(result.correction_term.upper), cell(result.rhs.lower),
         cell(result.rhs.upper), consistent ? "1" : "0"});
    if (!consistent && exit_code == 0) {
      std::cerr << "witness: instance " << id << " lhs_lower " << result.lhs.lower
                << " > rhs_upper " << result.rhs.upper << "\n";
      exit_code = 1;
    }
    ++id;
  }
  return exit_code;
}

CurveFn named_curve(const StratifiedAlgebra& A, const std::string& name,
                    const std::string& lambda_text, double xi,
                    const std::string& g0_text, double step) {
  if (name == "beta") {
    if (!A.structurally_equal(engel_group()))
      throw InvalidInput("--curve beta requires --group engel");
    return [](double t) { return engel_geodesic(t); };
  }
  if (name == "lift") {
    if (!A.structurally_equal(rank2_step4_group()))
      throw InvalidInput("--curve lift requires --group g_rank2_step4");
    return [](double t) { return engel_geodesic_lift(t); };
  }
  if (name.rfind("line:", 0) == 0) {
    Eigen::VectorXd dir = parse_vector(name.substr(5));
    if (dir.size() != A.dim()) throw InvalidInput("line direction has wrong dimension");
    return [dir](double t) { return exp_point(AlgebraVector{(t * dir).eval()}); };
  }
  if (name == "extremal") {
    if (lambda_text.empty()) throw InvalidInput("--curve extremal needs --lambda");
    CovectorPair pair{parse_vector(lambda_text), xi};
    GroupPoint g0 = A.identity();
    if (!g0_text.empty()) g0 = GroupPoint{parse_vector(g0_text)};
    return extremal_curve(A, pair, g0, step);
  }
  throw InvalidInput("unknown curve: " + name);
}

int run_blowdown(Output& out, const StratifiedAlgebra& A, const CurveFn& curve,
                 const std::vector<double>& h_seq, double window, int samples,
                 bool diagnostics) {
  const DistanceBoundProvider provider(A);
  const auto report = blowdown_estimate(A, curve, h_seq, window, samples, provider);
  if (out.format == "svg") {
    std::vector<Eigen::Vector2d> ab;
    for (const auto& p : report.dilates.back())
      ab.push_back(project_abelianization(A, p).head<2>());
    write_svg(*out.stream, ab);
    return 0;
  }
  if (diagnostics) {
    row(*out.stream, {"h_low", "h_high", "sup_lower", "sup_upper"});
    for (std::size_t j = 0; j + 1 < report.h.size(); ++j)
      row(*out.stream, {cell(report.h[j]), cell(report.h[j + 1]),
                        cell(report.consecutive_sup[j].lower),
                        cell(report.consecutive_sup[j].upper)});
    return 0;
  }
  std::vector<std::string> header = {"h", "t"};
  for (const auto& label : A.labels()) header.push_back(label);
  row(*out.stream, header);
  for (std::size_t j = 0; j < report.h.size(); ++j)
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
      std::vector<std::string> cells = {cell(report.h[j]), cell(report.grid[i])};
      for (int k = 0; k < A.dim(); ++k) cells.push_back(cell(report.dilates[j][i].x[k]));
      row(*out.stream, cells);
    }
  return 0;
}

int run_lines(Output& out, const StratifiedAlgebra& A, const Line& L1, const Line& L2) {
  const auto match = lines_finite_distance(A, L1, L2);
  std::vector<std::string> header = {"finite", "c", "residual"};
  for (const auto& label : A.labels()) header.push_back("k_" + label);
  row(*out.stream, header);
  std::vector<std::string> cells;
  if (match) {
    cells = {"1", cell(match->c), cell(match->fit_residual)};
    for (int k = 0; k < A.dim(); ++k) cells.push_back(cell(match->k.x[k]));
  } else {
    cells = {"0", cell(0.0), cell(0.0)};
    for (int k = 0; k < A.dim(); ++k) cells.push_back(cell(0.0));
  }
  row(*out.stream, cells);
  return 0;
}

int run_tangent_check(Output& out, double tbar, double delta, int pairs,
                      unsigned long long seed) {
  const auto A = engel_group();
  const CurveFn beta = [](double t) { return engel_geodesic(t); };
  const auto report = quantified_tangent_check(A, beta, tbar, delta, pairs, seed);
  row(*out.stream, {"fitted_C", "max_ratio", "max_upper_excess", "pairs"});
  row(*out.stream, {cell(report.fitted_C), cell(report.max_ratio),
                    cell(report.max_upper_excess), std::to_string(report.pairs)});
  if (report.max_upper_excess > 1e-9) {
    std::cerr << "witness: upper bound exceeded by " << report.max_upper_excess << "\n";
    return 1;
  }
  return 0;
}

int run_verify_engel(Output& out, double tmax, int grid) {
  if (out.format == "svg") {
    std::vector<Eigen::Vector2d> ab;
    for (int i = 0; i < grid; ++i) {
      const double t = -tmax + 2 * tmax * i / (grid - 1);
      ab.push_back(engel_geodesic(t).x.head<2>());
    }
    write_svg(*out.stream, ab);
    return 0;
  }
  row(*out.stream, {"t", "res_ode1", "res_ode2", "res_horizontality_12",
                    "res_horizontality_112"});
  int exit_code = 0;
  for (int i = 0; i < grid; ++i) {
    const double t = -tmax + 2 * tmax * i / (grid - 1);
    const auto b = engel_geodesic(t);
    const Eigen::Vector4d d = engel_geodesic_derivative(t);
    const double r1 = d[0] - (-0.5 * b.x[0] * b.x[1] - b.x[2]);
    const double r2 = d[1] - (0.5 * b.x[0] * b.x[0] - 1.0);
    const double r3 = d[2] - 0.5 * (b.x[0] * d[1] - b.x[1] * d[0]);
    const double r4 = d[3] - (b.x[0] * b.x[0] * d[1] / 12.0 -
                              (b.x[0] * b.x[1] / 12.0 + 0.5 * b.x[2]) * d[0]);
    row(*out.stream, {cell(t), cell(r1), cell(r2), cell(r3), cell(r4)});
    if (exit_code == 0 && (std::abs(r1) >= 1e-9 || std::abs(r2) >= 1e-9 ||
                           std::abs(r3) >= 1e-9 || std::abs(r4) >= 1e-9)) {
      std::cerr << "witness: residual above 1e-9 at t = " << t << "\n";
      exit_code = 1;
    }
  }
  return exit_code;
}

int run_verify_lift(Output& out, double tmax, int grid) {
  const auto g4 = rank2_step4_group();
  Eigen::VectorXd dplus = Eigen::VectorXd::Zero(6), dminus = Eigen::VectorXd::Zero(6);
  dplus[1] = dminus[1] = -1.0;
  dplus[5] = -2.0 / 3.0;
  dminus[5] = 2.0 / 3.0;
  const Line L_plus{g4.identity(), AlgebraVector{dplus}};
  const Line L_minus{g4.identity(), AlgebraVector{dminus}};

  const auto points = engel_geodesic_lift_grid(-tmax, tmax, grid);
  if (out.format == "svg") {
    std::vector<Eigen::Vector2d> ab;
    for (const auto& p : points) ab.push_back(p.x.head<2>());
    write_svg(*out.stream, ab);
    return 0;
  }
  row(*out.stream, {"t", "res_x122_derivative", "zplus_122", "zplus_1122",
                    "zminus_122", "zminus_1122"});
  int exit_code = 0;
  for (int i = 0; i < grid; ++i) {
    const double t = -tmax + 2 * tmax * i / (grid - 1);
    const auto b = engel_geodesic(t);
    const Eigen::Vector4d d = engel_geodesic_derivative(t);
    const double horiz = b.x[1] * b.x[1] / 12.0 * d[0] -
                         (b.x[0] * b.x[1] / 12.0 - 0.5 * b.x[2]) * d[1];
    const double res122 = lift_x122_derivative(t) - horiz;
    const auto& alpha = points[static_cast<std::size_t>(i)];
    const auto zp = bch_product(g4, inverse(g4, line_point(g4, L_plus, t)), alpha);
    const auto zm = bch_product(g4, inverse(g4, line_point(g4, L_minus, t)), alpha);
    row(*out.stream, {cell(t), cell(res122), cell(zp.x[4]), cell(zp.x[5]),
                      cell(zm.x[4]), cell(zm.x[5])});
    bool ok = std::abs(res122) < 1e-12;
    if (t >= 0)
      ok = ok && std::abs(zp.x[5]) < 10.0 &&
           std::abs(zm.x[5]) >= (4.0 / 3.0) * t - 10.0;
    else
      ok = ok && std::abs(zm.x[5]) < 10.0 &&
           std::abs(zp.x[5]) >= (4.0 / 3.0) * (-t) - 10.0;
    if (!ok && exit_code == 0) {
      std::cerr << "witness: lift asymptote check failed at t = " << t << "\n";
      exit_code = 1;
    }
  }
  return exit_code;
}

int run_rough_check(Output& out, const StratifiedAlgebra& A, const std::string& mode,
                    double C, double T, int samples, unsigned long long seed) {
  if (A.step() != 2) throw InvalidInput("rough-check needs a step-2 group");
  const DistanceBoundProvider provider(A);
  Rng rng(seed);
  std::vector<ParamPoint> pts;
  if (mode == "line") {
    for (int i = 0; i < samples; ++i) {
      const double t = -T + 2 * T * i / (samples - 1);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(A.dim());
      x[0] = t;
      pts.push_back({t, GroupPoint{x}});
    }
  } else if (mode == "noisy-line") {
    for (int i = 0; i < samples; ++i) {
      const double t = -T + 2 * T * i / (samples - 1);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(A.dim());
      x[0] = t;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(A.dim());
      w[1] = (C / 2.0) * std::sin(t + rng.uniform(0, 0.1));
      pts.push_back({t, bch_product(A, GroupPoint{x}, GroupPoint{w})});
    }
  } else if (mode == "circle") {
    if (!A.structurally_equal(heisenberg_group()))
      throw InvalidInput("--mode circle requires --group heisenberg");
    Eigen::VectorXd lambda(3);
    lambda << 1, 0, 2;
    const double period = std::numbers::pi;
    // Integrate finely, then subsample: the validation band is tight.
    const auto curve =
        integrate_extremal(A, {lambda, 1.0}, A.identity(), 0.0, period, 1e-4);
    const std::size_t stride =
        std::max<std::size_t>(1, curve.times.size() / static_cast<std::size_t>(samples));
    for (std::size_t i = 0; i < curve.times.size(); i += stride)
      pts.push_back({curve.times[i], curve.points[i]});
  } else {
    throw InvalidInput("unknown mode: " + mode);
  }

  const auto report = rough_projection_check(A, pts, C, provider);
  row(*out.stream,
      {"mode", "c_prime", "hyperplane_K", "horn_quasigeodesic", "worst_defect"});
  row(*out.stream, {mode, cell(report.c_prime), cell(report.hyperplane_K),
                    report.horn_quasigeodesic ? "1" : "0", cell(report.worst_defect)});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerics for geodesics in sub-Riemannian Carnot groups"};
  app.require_subcommand(1);
  app.set_config("--config");

  Output out;
  app.add_option("--output", out.path, "output path ('-' for stdout)")
      ->capture_default_str();
  app.add_option("--format", out.format, "csv or svg")
      ->check(CLI::IsMember({"csv", "svg"}))
      ->capture_default_str();
  app.add_flag("--dry-run", out.dry_run, "validate inputs, skip computation");

  std::string group = "engel", algebra_file, lambda_text, g0_text, points_text;
  std::string curve_name = "beta", mode = "line", h_text = "1,2,4,8";
  std::string base1, dir1, base2, dir2;
  double xi = 1.0, t0 = 0.0, t1 = 10.0, step = 1e-3, window = 2.0;
  double tbar = 0.0, delta = 0.5, tmax = 10.0, C = 0.5, T = 20.0, min_size = 0.1;
  int samples = 41, pairs = 200, count = 100, grid = 10000, m = 2;
  unsigned long long seed = 12345;

  auto add_group = [&](CLI::App* cmd) {
    cmd->add_option("--group", group, "catalog group name")->capture_default_str();
    cmd->add_option("--algebra", algebra_file, "algebra-definition file (overrides --group)");
  };

  auto* integrate = app.add_subcommand("integrate", "integrate a normal extremal");
  add_group(integrate);
  integrate->add_option("--lambda", lambda_text, "covector coefficients")->required();
  integrate->add_option("--xi", xi, "scalar multiplier")->capture_default_str();
  integrate->add_option("--g0", g0_text, "initial point (default identity)");
  integrate->add_option("--t0", t0, "span start (<= 0)")->capture_default_str();
  integrate->add_option("--t1", t1, "span end (>= 0)")->capture_default_str();
  integrate->add_option("--step", step, "integration step")->capture_default_str();

  auto* width = app.add_subcommand("width", "minimal height of a point tuple");
  width->add_option("--points", points_text, "@file or 'a,b;c,d'")->required();

  auto* fit_plane = app.add_subcommand("fit-plane", "volume-maximising subspace fit");
  fit_plane->add_option("--points", points_text, "@file or 'a,b;c,d'")->required();
  fit_plane->add_option("--m", m, "tuples of size m; fits an (m-1)-plane")
      ->capture_default_str();

  auto* correct = app.add_subcommand("correct", "random correction-system sweep");
  add_group(correct);
  correct->add_option("--count", count, "instances")->capture_default_str();
  correct->add_option("--min-size", min_size, "rejection threshold")->capture_default_str();
  correct->add_option("--seed", seed, "RNG seed")->capture_default_str();

  auto* triangle = app.add_subcommand("triangle", "modified triangle inequality sweep");
  add_group(triangle);
  triangle->add_option("--count", count, "instances")->capture_default_str();
  triangle->add_option("--seed", seed, "RNG seed")->capture_default_str();

  auto* blowdown = app.add_subcommand("blowdown", "dilated-curve sweep with diagnostics");
  add_group(blowdown);
  blowdown->add_option("--curve", curve_name, "beta | lift | line:<dir> | extremal")
      ->capture_default_str();
  blowdown->add_option("--lambda", lambda_text, "covector for --curve extremal");
  blowdown->add_option("--xi", xi, "multiplier for --curve extremal")->capture_default_str();
  blowdown->add_option("--g0", g0_text, "initial point for --curve extremal");
  blowdown->add_option("--step", step, "integration step for --curve extremal")
      ->capture_default_str();
  blowdown->add_option("--h-seq", h_text, "increasing dilation sequence")->capture_default_str();
  blowdown->add_option("--window", window, "parameter window [-w, w]")->capture_default_str();
  blowdown->add_option("--samples", samples, "grid points")->capture_default_str();
  bool diagnostics = false;
  blowdown->add_flag("--diagnostics", diagnostics, "emit consecutive sup-distances");

  auto* lines = app.add_subcommand("lines", "finite-distance criterion for two lines");
  add_group(lines);
  lines->add_option("--base1", base1, "base point of line 1 (default identity)");
  lines->add_option("--dir1", dir1, "direction of line 1")->required();
  lines->add_option("--base2", base2, "base point of line 2 (default identity)");
  lines->add_option("--dir2", dir2, "direction of line 2")->required();

  auto* tangent = app.add_subcommand("tangent-check", "quantified tangent instance check");
  tangent->add_option("--tbar", tbar, "window centre")->capture_default_str();
  tangent->add_option("--delta", delta, "window half-width")->capture_default_str();
  tangent->add_option("--pairs", pairs, "sampled pairs")->capture_default_str();
  tangent->add_option("--seed", seed, "RNG seed")->capture_default_str();

  auto* verify_engel = app.add_subcommand("verify-engel", "closed-form residual suite");
  verify_engel->add_option("--tmax", tmax, "grid half-width")->capture_default_str();
  verify_engel->add_option("--grid", grid, "grid points")->capture_default_str();

  auto* verify_lift = app.add_subcommand("verify-lift", "step-4 lift asymptote suite");
  verify_lift->add_option("--tmax", tmax, "grid half-width")->capture_default_str();
  verify_lift->add_option("--grid", grid, "grid points")->capture_default_str();

  auto* rough = app.add_subcommand("rough-check", "rough-geodesic dichotomy check");
  add_group(rough);
  rough->add_option("--mode", mode, "line | noisy-line | circle")->capture_default_str();
  rough->add_option("--C", C, "quasi-geodesic constant")->capture_default_str();
  rough->add_option("--T", T, "parameter half-width")->capture_default_str();
  rough->add_option("--samples", samples, "sample count")->capture_default_str();
  rough->add_option("--seed", seed, "RNG seed")->capture_default_str();

  // Global flags (--output, --format, --dry-run, --config) may be given
  // after the subcommand name.
  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version succeed; malformed input is 2
  }

  try {
    // Validate inputs common to the chosen subcommand, then bail on dry runs.
    StratifiedAlgebra A = euclidean_group(1);
    if (integrate->parsed() || correct->parsed() || triangle->parsed() ||
        blowdown->parsed() || lines->parsed() || rough->parsed())
      A = resolve_group(group, algebra_file);

    if (verify_engel->parsed() || verify_lift->parsed()) {
      if (grid < 2 || !(tmax > 0)) throw InvalidInput("need --grid >= 2 and --tmax > 0");
      if (verify_lift->parsed() && tmax > 60)
        throw InvalidInput("verify-lift supports --tmax <= 60");
    }
    if (out.dry_run) return 0;
    out.open();

    if (integrate->parsed()) {
      CovectorPair pair{parse_vector(lambda_text), xi};
      GroupPoint g0 = A.identity();
      if (!g0_text.empty()) g0 = GroupPoint{parse_vector(g0_text)};
      return run_integrate(out, A, pair, g0, t0, t1, step);
    }
    if (width->parsed()) return run_width(out, parse_points(points_text));
    if (fit_plane->parsed()) return run_fit_plane(out, parse_points(points_text), m);
    if (correct->parsed()) return run_correct(out, A, count, min_size, seed);
    if (triangle->parsed()) return run_triangle(out, A, count, seed);
    if (blowdown->parsed()) {
      const Eigen::VectorXd hs = parse_vector(h_text);
      std::vector<double> h_seq(hs.data(), hs.data() + hs.size());
      const CurveFn curve = named_curve(A, curve_name, lambda_text, xi, g0_text, step);
      return run_blowdown(out, A, curve, h_seq, window, samples, diagnostics);
    }
    if (lines->parsed()) {
      auto parse_line = [&](const std::string& base, const std::string& dir) {
        Line L{A.identity(), AlgebraVector{parse_vector(dir)}};
        if (!base.empty()) L.base = GroupPoint{parse_vector(base)};
        return L;
      };
      return run_lines(out, A, parse_line(base1, dir1), parse_line(base2, dir2));
    }
    if (tangent->parsed()) return run_tangent_check(out, tbar, delta, pairs, seed);
    if (verify_engel->parsed()) return run_verify_engel(out, tmax, grid);
    if (verify_lift->parsed()) return run_verify_lift(out, tmax, grid);
    if (rough->parsed()) return run_rough_check(out, A, mode, C, T, samples, seed);
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
