#include "bandcert/lattice.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace bandcert {

using nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_angle(double x) {
  double r = std::remainder(x, kTwoPi);  // [-pi, pi]
  if (r <= -kPi) r += kTwoPi;            // -pi is identified with +pi
  return r;
}

Quasimomentum::Quasimomentum(RealVector raw) : components_(std::move(raw)) {
  for (Eigen::Index j = 0; j < components_.size(); ++j) {
    components_[j] = wrap_angle(components_[j]);
  }
}

double Quasimomentum::torus_distance(const Quasimomentum& other) const {
  if (dim() != other.dim()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int j = 0; j < dim(); ++j) {
    worst = std::max(worst, std::abs(wrap_angle(components_[j] - other.components_[j])));
  }
  return worst;
}

void PeriodicGraphSpec::validate() const {
  if (dimension < 1) throw GraphError("spec: dimension must be >= 1");
  if (num_vertices < 1) throw GraphError("spec: num_vertices must be >= 1");
  if (int(onsite.size()) != num_vertices) {
    throw GraphError("spec: onsite length " + std::to_string(onsite.size()) +
                     " does not match num_vertices " + std::to_string(num_vertices));
  }

  auto check_vertex = [&](int v, const std::string& where) {
    if (v < 1 || v > num_vertices) {
      throw GraphError(where + ": vertex index " + std::to_string(v) +
                       " out of range 1.." + std::to_string(num_vertices));
    }
  };

  std::vector<std::vector<int>> adjacency(size_t(num_vertices));
  std::vector<std::pair<int, int>> seen_pairs;
  for (size_t i = 0; i < intra_edges.size(); ++i) {
    const auto& e = intra_edges[i];
    const std::string where = "intra_edges[" + std::to_string(i) + "]";
    check_vertex(e.u, where);
    check_vertex(e.v, where);
    if (e.u == e.v) {
      throw GraphError(where + ": loop (" + std::to_string(e.u) +
                       "," + std::to_string(e.v) + ") not allowed; use onsite");
    }
    if (e.w == Complex(0.0, 0.0)) {
      throw GraphError(where + ": zero weight on edge (" + std::to_string(e.u) +
                       "," + std::to_string(e.v) + ")");
    }
    const auto key = std::minmax(e.u, e.v);
    for (const auto& p : seen_pairs) {
      if (p == key) {
        throw GraphError(where + ": duplicate intra-cell pair (" +
                         std::to_string(key.first) + "," + std::to_string(key.second) +
                         "); merge weights upstream");
      }
    }
    seen_pairs.push_back(key);
    adjacency[size_t(e.u - 1)].push_back(e.v - 1);
    adjacency[size_t(e.v - 1)].push_back(e.u - 1);
  }

  if (int(crossing_edges.size()) != dimension) {
    throw GraphError("spec: expected exactly " + std::to_string(dimension) +
                     " crossing edges, got " + std::to_string(crossing_edges.size()));
  }
  std::vector<bool> gen_used(size_t(dimension), false);
  for (size_t i = 0; i < crossing_edges.size(); ++i) {
    const auto& e = crossing_edges[i];
    const std::string where = "crossing_edges[" + std::to_string(i) + "]";
    if (e.gen < 1 || e.gen > dimension) {
      throw GraphError(where + ": generator index " + std::to_string(e.gen) +
                       " out of range 1.." + std::to_string(dimension));
    }
    if (gen_used[size_t(e.gen - 1)]) {
      throw GraphError(where + ": duplicate generator index " + std::to_string(e.gen));
    }
    gen_used[size_t(e.gen - 1)] = true;
    check_vertex(e.u, where);
    check_vertex(e.v, where);
    if (e.w == Complex(0.0, 0.0)) {
      throw GraphError(where + ": zero weight on generator " + std::to_string(e.gen));
    }
    if (e.u != e.v) {
      adjacency[size_t(e.u - 1)].push_back(e.v - 1);
      adjacency[size_t(e.v - 1)].push_back(e.u - 1);
    }
  }

  // Connectivity of intra edges plus crossing links.
  std::vector<bool> reached(size_t(num_vertices), false);
  std::vector<int> stack{0};
  reached[0] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adjacency[size_t(v)]) {
      if (!reached[size_t(w)]) {
        reached[size_t(w)] = true;
        stack.push_back(w);
      }
    }
  }
  for (int v = 0; v < num_vertices; ++v) {
    if (!reached[size_t(v)]) {
      throw GraphError("spec: graph is disconnected, vertex " + std::to_string(v + 1) +
                       " unreachable from vertex 1");
    }
  }
}

BlochFamily::BlochFamily(Matrix c0, std::vector<Matrix> coeffs)
    : c0_(std::move(c0)), coeffs_(std::move(coeffs)) {
  const Eigen::Index n = c0_.rows();
  if (c0_.cols() != n) throw GraphError("BlochFamily: c0 must be square");
  const double dev = max_abs(Matrix(c0_ - c0_.adjoint()));
  if (dev > 1e-13 * std::max(max_abs(c0_), 1e-300)) {
    throw GraphError("BlochFamily: c0 is not Hermitian, deviation " + std::to_string(dev));
  }
  c0_ = 0.5 * (c0_ + c0_.adjoint().eval());
  for (const auto& cj : coeffs_) {
    if (cj.rows() != n || cj.cols() != n) {
      throw GraphError("BlochFamily: coefficient matrix size mismatch");
    }
  }

  single_crossing_ = !coeffs_.empty();
  std::vector<Crossing> crossings;
  for (const auto& cj : coeffs_) {
    const double scale = max_abs(cj);
    if (scale == 0.0) {
      single_crossing_ = false;
      break;
    }
    int count = 0;
    Crossing cr;
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        if (std::abs(cj(r, c)) > tol::struct_zero * scale) {
          ++count;
          cr = Crossing{int(r), int(c), cj(r, c)};
        }
      }
    }
    if (count != 1) {
      single_crossing_ = false;
      break;
    }
    crossings.push_back(cr);
  }
  if (single_crossing_) crossings_ = std::move(crossings);

  time_reversal_ = c0_.imag().cwiseAbs().maxCoeff() == 0.0;
  for (const auto& cj : coeffs_) {
    if (cj.size() && cj.imag().cwiseAbs().maxCoeff() != 0.0) time_reversal_ = false;
  }
}

Matrix BlochFamily::evaluate(const Quasimomentum& alpha) const {
  if (alpha.dim() != dimension()) {
    throw std::invalid_argument("evaluate: quasimomentum dimension " +
                                std::to_string(alpha.dim()) + " != family dimension " +
                                std::to_string(dimension()));
  }
  Matrix t = c0_;
  for (int j = 0; j < dimension(); ++j) {
    const Complex phase = std::polar(1.0, alpha[j]);
    t += coeffs_[size_t(j)] * phase + coeffs_[size_t(j)].adjoint() * std::conj(phase);
  }
  return 0.5 * (t + t.adjoint().eval());
}

BlochFamily build_bloch_family(const PeriodicGraphSpec& spec) {
  spec.validate();
  const int n = spec.num_vertices;
  Matrix c0 = Matrix::Zero(n, n);
  for (int v = 0; v < n; ++v) c0(v, v) = spec.onsite[size_t(v)];
  for (const auto& e : spec.intra_edges) {
    c0(e.u - 1, e.v - 1) += e.w;
    c0(e.v - 1, e.u - 1) += std::conj(e.w);
  }
  std::vector<Matrix> coeffs(size_t(spec.dimension), Matrix::Zero(n, n));
  for (const auto& e : spec.crossing_edges) {
    coeffs[size_t(e.gen - 1)](e.u - 1, e.v - 1) = e.w;
  }
  return BlochFamily(std::move(c0), std::move(coeffs));
}

std::vector<CrossingViolation> validate_single_crossing(const BlochFamily& family) {
  std::vector<CrossingViolation> out;
  for (int j = 0; j < family.dimension(); ++j) {
    const Matrix& cj = family.coeffs()[size_t(j)];
    const double scale = max_abs(cj);
    int count = 0;
    if (scale > 0.0) {
      for (Eigen::Index r = 0; r < cj.rows(); ++r) {
        for (Eigen::Index c = 0; c < cj.cols(); ++c) {
          if (std::abs(cj(r, c)) > tol::struct_zero * scale) ++count;
        }
      }
    }
    if (count != 1) out.push_back({j + 1, count});
  }
  return out;
}

namespace {

Complex parse_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw GraphError(where + ": expected complex number as [re, im]");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

int parse_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw GraphError(where + ": expected integer");
  return j.get<int>();
}

json require_key(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw GraphError(where + ": missing key '" + key + "'");
  return j.at(key);
}

Matrix parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw GraphError(where + ": expected matrix as array of rows");
  const size_t rows = j.size();
  size_t cols = 0;
  Matrix m;
  for (size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array()) throw GraphError(where + ": row " + std::to_string(r) + " is not an array");
    if (r == 0) {
      cols = row.size();
      m = Matrix::Zero(Eigen::Index(rows), Eigen::Index(cols));
    } else if (row.size() != cols) {
      throw GraphError(where + ": ragged rows");
    }
    for (size_t c = 0; c < cols; ++c) {
      m(Eigen::Index(r), Eigen::Index(c)) =
          parse_complex(row[c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphError(std::string("parse error: ") + e.what());
  }
}

}  // namespace

PeriodicGraphSpec parse_graph_spec(const std::string& text) {
  const json j = parse_text(text);
  PeriodicGraphSpec spec;
  spec.dimension = parse_int(require_key(j, "dimension", "graph"), "dimension");
  spec.num_vertices = parse_int(require_key(j, "num_vertices", "graph"), "num_vertices");
  const json onsite = require_key(j, "onsite", "graph");
  if (!onsite.is_array()) throw GraphError("onsite: expected array of reals");
  for (size_t i = 0; i < onsite.size(); ++i) {
    if (!onsite[i].is_number()) {
      throw GraphError("onsite[" + std::to_string(i) + "]: expected real number");
    }
    spec.onsite.push_back(onsite[i].get<double>());
  }
  const json intra = require_key(j, "intra_edges", "graph");
  for (size_t i = 0; i < intra.size(); ++i) {
    const std::string where = "intra_edges[" + std::to_string(i) + "]";
    IntraEdge e;
    e.u = parse_int(require_key(intra[i], "u", where), where + ".u");
    e.v = parse_int(require_key(intra[i], "v", where), where + ".v");
    e.w = parse_complex(require_key(intra[i], "w", where), where + ".w");
    spec.intra_edges.push_back(e);
  }
  const json crossing = require_key(j, "crossing_edges", "graph");
  for (size_t i = 0; i < crossing.size(); ++i) {
    const std::string where = "crossing_edges[" + std::to_string(i) + "]";
    CrossingEdge e;
    e.gen = parse_int(require_key(crossing[i], "gen", where), where + ".gen");
    e.u = parse_int(require_key(crossing[i], "u", where), where + ".u");
    e.v = parse_int(require_key(crossing[i], "v", where), where + ".v");
    e.w = parse_complex(require_key(crossing[i], "w", where), where + ".w");
    spec.crossing_edges.push_back(e);
  }
  spec.validate();
  return spec;
}

PeriodicGraphSpec parse_graph_file(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph_spec(buf.str());
}

BlochFamily parse_family_json(const std::string& text) {
  const json j = parse_text(text);
  const Matrix c0 = parse_matrix(require_key(j, "c0", "family"), "c0");
  const json coeffs = require_key(j, "coeffs", "family");
  if (!coeffs.is_array()) throw GraphError("coeffs: expected array of matrices");
  std::vector<Matrix> cj;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    cj.push_back(parse_matrix(coeffs[i], "coeffs[" + std::to_string(i) + "]"));
  }
  return BlochFamily(c0, std::move(cj));
}

std::string family_to_json(const BlochFamily& family) {
  json j;
  j["c0"] = matrix_to_json(family.c0());
  json coeffs = json::array();
  for (const auto& cj : family.coeffs()) coeffs.push_back(matrix_to_json(cj));
  j["coeffs"] = coeffs;
  return j.dump(2);
}

BlochFamily load_family(const std::string& text) {
  const json j = parse_text(text);
  if (j.contains("c0")) return parse_family_json(text);
  return build_bloch_family(parse_graph_spec(text));
}

}  // namespace bandcert
