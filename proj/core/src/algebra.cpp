#include "carnot/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace carnot {

namespace {

void check_dim(const StratifiedAlgebra& A, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != A.dim())
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(A.dim()) + ", got " + std::to_string(v.size()));
}

}  // namespace

StratifiedAlgebra::StratifiedAlgebra(
    std::string name, std::vector<std::vector<std::string>> layers,
    const std::map<std::pair<std::string, std::string>, std::map<std::string, Rational>>&
        brackets)
    : name_(std::move(name)) {
  if (layers.empty() || layers.front().empty())
    throw InvalidInput("algebra needs a nonempty first layer");
  step_ = static_cast<int>(layers.size());
  rank_ = static_cast<int>(layers.front().size());
  layer_begin_.push_back(0);
  for (int j = 0; j < step_; ++j) {
    if (layers[j].empty())
      throw InvalidInput("empty layer " + std::to_string(j + 1));
    for (const auto& label : layers[j]) {
      if (index_map_contains(label))
        throw InvalidInput("duplicate basis label: " + label);
      labels_.push_back(label);
      layer_of_.push_back(j + 1);
    }
    layer_begin_.push_back(static_cast<int>(labels_.size()));
  }

  const std::size_t n = labels_.size();
  exact_.assign(n * n * n, Rational(0));
  auto at = [&](int i, int j, int k) -> Rational& {
    return exact_[(static_cast<std::size_t>(i) * n + j) * n + k];
  };

  for (const auto& [pair, expansion] : brackets) {
    const int i = index_of(pair.first);
    const int j = index_of(pair.second);
    for (const auto& [result, coeff] : expansion) {
      const int k = index_of(result);
      if (coeff == Rational(0)) continue;
      if (layer_of_[k] != layer_of_[i] + layer_of_[j])
        throw InvalidInput("grading violation: [" + pair.first + ", " + pair.second +
                           "] cannot contain " + result);
      for (auto [a, b, sign] : {std::tuple<int, int, int>{i, j, +1}, {j, i, -1}}) {
        const Rational value = sign > 0 ? coeff : -coeff;
        if (at(a, b, k) != Rational(0) && at(a, b, k) != value)
          throw InvalidInput("conflicting bracket entries for [" + labels_[a] + ", " +
                             labels_[b] + "]");
        at(a, b, k) = value;
      }
    }
  }

  validate();

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const Rational& q = exact_[(i * n + j) * n + k];
        if (q != Rational(0))
          terms_.push_back({static_cast<int>(i), static_cast<int>(j),
                            static_cast<int>(k), to_double(q)});
      }
}

bool StratifiedAlgebra::index_map_contains(const std::string& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

int StratifiedAlgebra::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw InvalidInput("unknown basis label: " + label);
  return static_cast<int>(it - labels_.begin());
}

AlgebraVector StratifiedAlgebra::basis_vector(int index) const {
  AlgebraVector v = zero_vector();
  v.c[index] = 1.0;
  return v;
}

bool StratifiedAlgebra::structurally_equal(const StratifiedAlgebra& other) const {
  return labels_ == other.labels_ && layer_of_ == other.layer_of_ &&
         exact_ == other.exact_;
}

void StratifiedAlgebra::validate() const {
  const int n = dim();
  auto at = [&](int i, int j, int k) { return structure_exact(i, j, k); };

  // Antisymmetry and grading.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (at(i, j, k) != -at(j, i, k))
          throw InvalidInput("structure tensor is not antisymmetric");
        if (at(i, j, k) != Rational(0) && layer_of_[k] != layer_of_[i] + layer_of_[j])
          throw InvalidInput("structure tensor violates the grading");
      }

  // Jacobi identity, exactly over the rationals.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int m = 0; m < n; ++m) {
          Rational sum(0);
          for (int p = 0; p < n; ++p) {
            sum += at(j, k, p) * at(i, p, m);
            sum += at(k, i, p) * at(j, p, m);
            sum += at(i, j, p) * at(k, p, m);
          }
          if (sum != Rational(0))
            throw InvalidInput("Jacobi identity fails at basis triple (" + labels_[i] +
                               ", " + labels_[j] + ", " + labels_[k] + ")");
        }

  // Bracket generation: brackets of V_1 with layer j-1 must span layer j.
  // Exact rank computation by rational Gaussian elimination.
  for (int layer = 2; layer <= step_; ++layer) {
    const int rows = layer_dim(layer);
    const int base = layer_begin(layer);
    std::vector<std::vector<Rational>> columns;
    for (int a = layer_begin(1); a < layer_end(1); ++a)
      for (int b = layer_begin(layer - 1); b < layer_end(layer - 1); ++b) {
        std::vector<Rational> col(rows);
        bool nonzero = false;
        for (int k = 0; k < rows; ++k) {
          col[k] = at(a, b, base + k);
          nonzero = nonzero || col[k] != Rational(0);
        }
        if (nonzero) columns.push_back(std::move(col));
      }
    int rank = 0;
    for (int r = 0; r < rows && !columns.empty(); ++r) {
      std::size_t pivot = columns.size();
      for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c][r] != Rational(0)) {
          pivot = c;
          break;
        }
      if (pivot == columns.size()) continue;
      std::swap(columns[pivot], columns[0]);
      const std::vector<Rational> p = columns[0];
      columns.erase(columns.begin());
      ++rank;
      for (auto& col : columns)
        if (col[r] != Rational(0)) {
          const Rational f = col[r] / p[r];
          for (int k = 0; k < rows; ++k) col[k] -= f * p[k];
        }
    }
    if (rank < rows)
      throw InvalidInput("layer " + std::to_string(layer) +
                         " is not generated by brackets of the first layer");
  }
}

// ---------------------------------------------------------------------------

AlgebraVector bracket(const StratifiedAlgebra& A, const AlgebraVector& X,
                      const AlgebraVector& Y) {
  check_dim(A, X.c, "bracket lhs");
  check_dim(A, Y.c, "bracket rhs");
  // Accumulate in extended precision: the identity suites assert residuals
  // near 1e-12 on coordinates that reach O(100).
  std::vector<long double> acc(static_cast<std::size_t>(A.dim()), 0.0L);
  for (const auto& t : A.bracket_terms())
    acc[static_cast<std::size_t>(t.k)] +=
        static_cast<long double>(t.coeff) * X.c[t.i] * Y.c[t.j];
  AlgebraVector out = A.zero_vector();
  for (int k = 0; k < A.dim(); ++k) out.c[k] = static_cast<double>(acc[static_cast<std::size_t>(k)]);
  return out;
}

GroupPoint bch_product(const StratifiedAlgebra& A, const GroupPoint& x,
                       const GroupPoint& y) {
  if (A.step() > 4)
    throw UnsupportedStep("bch_product supports step <= 4, algebra has step " +
                          std::to_string(A.step()));
  check_dim(A, x.x, "bch_product lhs");
  check_dim(A, y.x, "bch_product rhs");
  const AlgebraVector X{x.x}, Y{y.x};
  Eigen::VectorXd z = x.x + y.x;
  if (A.step() >= 2) {
    const AlgebraVector c1 = bracket(A, X, Y);
    z += 0.5 * c1.c;
    if (A.step() >= 3) {
      const AlgebraVector c2 = bracket(A, X, c1);   // [x,[x,y]]
      const AlgebraVector c3 = bracket(A, c1, Y);   // [[x,y],y]
      z += (c2.c + c3.c) / 12.0;
      if (A.step() >= 4) {
        const AlgebraVector c4 = bracket(A, X, c3);  // [x,[[x,y],y]]
        z += c4.c / 24.0;
      }
    }
  }
  return GroupPoint{std::move(z)};
}

GroupPoint inverse(const StratifiedAlgebra& A, const GroupPoint& g) {
  check_dim(A, g.x, "inverse");
  return GroupPoint{-g.x};
}

AlgebraVector dilate(const StratifiedAlgebra& A, double h, const AlgebraVector& X) {
  if (!(h > 0.0)) throw InvalidInput("dilation factor must be positive");
  check_dim(A, X.c, "dilate");
  AlgebraVector out{X.c};
  for (int k = 0; k < A.dim(); ++k) out.c[k] *= std::pow(h, A.layer_of(k));
  return out;
}

GroupPoint dilate(const StratifiedAlgebra& A, double h, const GroupPoint& g) {
  return exp_point(dilate(A, h, log_vector(g)));
}

AlgebraVector flip(const StratifiedAlgebra& A, const AlgebraVector& X) {
  check_dim(A, X.c, "flip");
  AlgebraVector out{X.c};
  for (int k = 0; k < A.dim(); ++k)
    if (A.layer_of(k) % 2 == 1) out.c[k] = -out.c[k];
  return out;
}

GroupPoint flip(const StratifiedAlgebra& A, const GroupPoint& g) {
  return exp_point(flip(A, log_vector(g)));
}

Eigen::MatrixXd ad_matrix(const StratifiedAlgebra& A, const AlgebraVector& X) {
  check_dim(A, X.c, "ad_matrix");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.dim(), A.dim());
  for (const auto& t : A.bracket_terms()) M(t.k, t.j) += t.coeff * X.c[t.i];
  return M;
}

Eigen::MatrixXd adjoint(const StratifiedAlgebra& A, const GroupPoint& g) {
  check_dim(A, g.x, "adjoint");
  const Eigen::MatrixXd ad = ad_matrix(A, log_vector(g));
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(A.dim(), A.dim());
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(A.dim(), A.dim());
  double factorial = 1.0;
  for (int p = 1; p < A.step(); ++p) {  // ad^step = 0 by nilpotency
    power = ad * power;
    factorial *= p;
    result += power / factorial;
  }
  return result;
}

Eigen::VectorXd project_abelianization(const StratifiedAlgebra& A, const GroupPoint& g) {
  check_dim(A, g.x, "project_abelianization");
  return g.x.head(A.rank());
}

StratifiedAlgebra quotient_mod_last_layer(const StratifiedAlgebra& A) {
  if (A.step() < 2) throw InvalidInput("step-1 group has no last layer to drop");
  std::vector<std::vector<std::string>> layers;
  for (int j = 1; j < A.step(); ++j) {
    std::vector<std::string> layer;
    for (int k = A.layer_begin(j); k < A.layer_end(j); ++k)
      layer.push_back(A.labels()[k]);
    layers.push_back(std::move(layer));
  }
  std::map<std::pair<std::string, std::string>, std::map<std::string, Rational>> brackets;
  const int cut = A.layer_end(A.step() - 1);
  for (int i = 0; i < cut; ++i)
    for (int j = i + 1; j < cut; ++j) {
      std::map<std::string, Rational> expansion;
      for (int k = 0; k < cut; ++k) {
        const Rational q = A.structure_exact(i, j, k);
        if (q != Rational(0)) expansion[A.labels()[k]] = q;
      }
      if (!expansion.empty())
        brackets[{A.labels()[i], A.labels()[j]}] = std::move(expansion);
    }
  StratifiedAlgebra quotient(A.name() + "_mod_V" + std::to_string(A.step()),
                             std::move(layers), brackets);
  if (quotient.structurally_equal(heisenberg_group()))
    return heisenberg_group();
  return quotient;
}

GroupPoint project_mod_last_layer(const StratifiedAlgebra& A, const GroupPoint& g) {
  if (A.step() < 2) throw InvalidInput("step-1 group has no last layer to drop");
  check_dim(A, g.x, "project_mod_last_layer");
  return GroupPoint{g.x.head(A.layer_end(A.step() - 1))};
}

StratifiedAlgebra quotient_to_step2(const StratifiedAlgebra& A) {
  if (A.step() < 2) throw UnsupportedGroup("no step-2 quotient of a step-1 group");
  StratifiedAlgebra q = A;
  while (q.step() > 2) q = quotient_mod_last_layer(q);
  return q;
}

GroupPoint project_to_step2(const StratifiedAlgebra& A, const GroupPoint& g) {
  if (A.step() < 2) throw UnsupportedGroup("no step-2 quotient of a step-1 group");
  check_dim(A, g.x, "project_to_step2");
  return GroupPoint{g.x.head(A.layer_end(2))};
}

std::vector<AlgebraVector> left_invariant_frame(const StratifiedAlgebra& A,
                                                const GroupPoint& x) {
  if (A.step() > 4)
    throw UnsupportedStep("left_invariant_frame supports step <= 4");
  check_dim(A, x.x, "left_invariant_frame");
  const AlgebraVector X = log_vector(x);
  std::vector<AlgebraVector> frame;
  frame.reserve(static_cast<std::size_t>(A.rank()));
  for (int i = 0; i < A.rank(); ++i) {
    AlgebraVector e = A.basis_vector(i);
    const AlgebraVector b1 = bracket(A, X, e);
    const AlgebraVector b2 = bracket(A, X, b1);
    e.c += 0.5 * b1.c + b2.c / 12.0;
    frame.push_back(std::move(e));
  }
  return frame;
}

Rational jacobi_residual(const StratifiedAlgebra& A) {
  Rational worst(0);
  const int n = A.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int m = 0; m < n; ++m) {
          Rational sum(0);
          for (int p = 0; p < n; ++p) {
            sum += A.structure_exact(j, k, p) * A.structure_exact(i, p, m);
            sum += A.structure_exact(k, i, p) * A.structure_exact(j, p, m);
            sum += A.structure_exact(i, j, p) * A.structure_exact(k, p, m);
          }
          if (boost::abs(sum) > worst) worst = boost::abs(sum);
        }
  return worst;
}

double homogeneous_norm(const StratifiedAlgebra& A, const AlgebraVector& X) {
  check_dim(A, X.c, "homogeneous_norm");
  double value = 0.0;
  for (int j = 1; j <= A.step(); ++j) {
    const double layer_norm =
        X.c.segment(A.layer_begin(j), A.layer_dim(j)).norm();
    value = std::max(value, std::pow(layer_norm, 1.0 / j));
  }
  return value;
}

double homogeneous_norm(const StratifiedAlgebra& A, const GroupPoint& g) {
  return homogeneous_norm(A, log_vector(g));
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

namespace {

using BracketSpec =
    std::map<std::pair<std::string, std::string>, std::map<std::string, Rational>>;

}  // namespace

StratifiedAlgebra euclidean_group(int n) {
  if (n < 1) throw InvalidInput("euclidean(n) needs n >= 1");
  std::vector<std::string> layer;
  for (int i = 1; i <= n; ++i) layer.push_back("X" + std::to_string(i));
  return StratifiedAlgebra("euclidean(" + std::to_string(n) + ")", {layer}, {});
}

StratifiedAlgebra heisenberg_group() {
  BracketSpec b;
  b[{"X1", "X2"}] = {{"X12", Rational(1)}};
  return StratifiedAlgebra("heisenberg", {{"X1", "X2"}, {"X12"}}, b);
}

StratifiedAlgebra free_step2_group(int r) {
  if (r < 2) throw InvalidInput("free_step2(r) needs r >= 2");
  std::vector<std::string> v1, v2;
  for (int i = 1; i <= r; ++i) v1.push_back("X" + std::to_string(i));
  BracketSpec b;
  for (int i = 1; i <= r; ++i)
    for (int j = i + 1; j <= r; ++j) {
      const std::string label = "X" + std::to_string(i) + std::to_string(j);
      v2.push_back(label);
      b[{"X" + std::to_string(i), "X" + std::to_string(j)}] = {{label, Rational(1)}};
    }
  return StratifiedAlgebra("free_step2(" + std::to_string(r) + ")", {v1, v2}, b);
}

StratifiedAlgebra engel_group() {
  BracketSpec b;
  b[{"X1", "X2"}] = {{"X12", Rational(1)}};
  b[{"X1", "X12"}] = {{"X112", Rational(1)}};
  return StratifiedAlgebra("engel", {{"X1", "X2"}, {"X12"}, {"X112"}}, b);
}

StratifiedAlgebra rank2_step4_group() {
  BracketSpec b;
  b[{"X1", "X2"}] = {{"X12", Rational(1)}};
  b[{"X1", "X12"}] = {{"X112", Rational(1)}};
  b[{"X12", "X2"}] = {{"X122", Rational(1)}};
  b[{"X1", "X122"}] = {{"X1122", Rational(1)}};
  b[{"X112", "X2"}] = {{"X1122", Rational(1)}};
  return StratifiedAlgebra("g_rank2_step4",
                           {{"X1", "X2"}, {"X12"}, {"X112", "X122"}, {"X1122"}}, b);
}

StratifiedAlgebra catalog(const std::string& name) {
  auto parse_param = [&](const std::string& prefix) -> int {
    std::string rest = name.substr(prefix.size());
    if (!rest.empty() && (rest.front() == '(' || rest.front() == ':')) {
      if (rest.front() == '(') {
        if (rest.back() != ')') throw InvalidInput("malformed catalog name: " + name);
        rest = rest.substr(1, rest.size() - 2);
      } else {
        rest = rest.substr(1);
      }
      try {
        return std::stoi(rest);
      } catch (const std::exception&) {
        throw InvalidInput("malformed catalog parameter in: " + name);
      }
    }
    throw InvalidInput("catalog name needs a parameter: " + name);
  };

  if (name == "heisenberg") return heisenberg_group();
  if (name == "engel") return engel_group();
  if (name == "g_rank2_step4") return rank2_step4_group();
  if (name.rfind("euclidean", 0) == 0) return euclidean_group(parse_param("euclidean"));
  if (name.rfind("free_step2", 0) == 0) return free_step2_group(parse_param("free_step2"));
  throw InvalidInput("unknown catalog group: " + name);
}

// ---------------------------------------------------------------------------
// Definition-file loader
// ---------------------------------------------------------------------------

StratifiedAlgebra parse_algebra_definition(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("algebra definition is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("name") || !doc.contains("layers"))
    throw InvalidInput("algebra definition needs 'name' and 'layers'");

  const std::string name = doc.at("name").get<std::string>();
  std::vector<std::vector<std::string>> layers;
  for (const auto& layer : doc.at("layers")) {
    std::vector<std::string> labels;
    for (const auto& label : layer) labels.push_back(label.get<std::string>());
    layers.push_back(std::move(labels));
  }
  if (doc.contains("step") &&
      doc.at("step").get<int>() != static_cast<int>(layers.size()))
    throw InvalidInput("'step' disagrees with the number of layers");

  BracketSpec brackets;
  if (doc.contains("brackets")) {
    for (const auto& entry : doc.at("brackets")) {
      if (!entry.is_array() || entry.size() != 3)
        throw InvalidInput("bracket entries are [lhs, rhs, {label: coefficient}]");
      const std::string lhs = entry[0].get<std::string>();
      const std::string rhs = entry[1].get<std::string>();
      std::map<std::string, Rational> expansion;
      for (const auto& [label, coeff] : entry[2].items()) {
        Rational q;
        if (coeff.is_number_integer())
          q = Rational(coeff.get<long long>());
        else if (coeff.is_string())
          q = parse_rational(coeff.get<std::string>());
        else
          throw InvalidInput("coefficients must be integers or \"p/q\" strings");
        expansion[label] = q;
      }
      brackets[{lhs, rhs}] = std::move(expansion);
    }
  }
  return StratifiedAlgebra(name, std::move(layers), brackets);
}

StratifiedAlgebra load_algebra_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open algebra definition: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_algebra_definition(buffer.str());
}

}  // namespace carnot
