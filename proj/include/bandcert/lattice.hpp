#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "bandcert/types.hpp"

namespace bandcert {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Maps an angle into (-pi, pi].
double wrap_angle(double x);

// A point of the Brillouin zone torus, canonicalized componentwise to
// (-pi, pi].
class Quasimomentum {
 public:
  Quasimomentum() = default;
  explicit Quasimomentum(RealVector raw);
  static Quasimomentum zero(int d) { return Quasimomentum(RealVector::Zero(d)); }

  int dim() const { return int(components_.size()); }
  const RealVector& components() const { return components_; }
  double operator[](int j) const { return components_[j]; }

  // Torus distance, accounting for the 2*pi identification.
  double torus_distance(const Quasimomentum& other) const;
  Quasimomentum negated() const { return Quasimomentum(-components_); }

 private:
  RealVector components_;
};

struct IntraEdge {
  int u = 0;  // 1-based vertex indices
  int v = 0;
  Complex w;
};

struct CrossingEdge {
  int gen = 0;  // generator index in 1..d
  int u = 0;    // 1-based vertex indices; u == v is a loop
  int v = 0;
  Complex w;
};

// Combinatorial description of a Z^d-periodic graph with one crossing edge
// per generator.
struct PeriodicGraphSpec {
  int dimension = 0;
  int num_vertices = 0;
  std::vector<double> onsite;
  std::vector<IntraEdge> intra_edges;
  std::vector<CrossingEdge> crossing_edges;

  // Throws GraphError naming the offending record.
  void validate() const;
};

// For single-crossing families, the edge data recovered from each C_j.
struct Crossing {
  int u = 0;  // 0-based
  int v = 0;
  Complex h;
  bool loop() const { return u == v; }
};

// The Floquet-Bloch matrix family T(alpha) = C0 + sum_j (C_j e^{i a_j} +
// C_j* e^{-i a_j}).  Immutable after construction.
class BlochFamily {
 public:
  BlochFamily(Matrix c0, std::vector<Matrix> coeffs);

  int dimension() const { return int(coeffs_.size()); }
  int size() const { return int(c0_.rows()); }
  const Matrix& c0() const { return c0_; }
  const std::vector<Matrix>& coeffs() const { return coeffs_; }
  bool single_crossing() const { return single_crossing_; }
  bool time_reversal() const { return time_reversal_; }

  // Crossing edge per generator; present only when single_crossing().
  const std::optional<std::vector<Crossing>>& crossings() const { return crossings_; }

  Matrix evaluate(const Quasimomentum& alpha) const;

 private:
  Matrix c0_;
  std::vector<Matrix> coeffs_;
  bool single_crossing_ = false;
  bool time_reversal_ = false;
  std::optional<std::vector<Crossing>> crossings_;
};

BlochFamily build_bloch_family(const PeriodicGraphSpec& spec);

struct CrossingViolation {
  int gen = 0;  // 1-based generator index
  int nonzero_count = 0;
};

std::vector<CrossingViolation> validate_single_crossing(const BlochFamily& family);

// Graph file: JSON with dimension, num_vertices, onsite, intra_edges,
// crossing_edges (weights as [re, im] pairs, 1-based vertex indices).
PeriodicGraphSpec parse_graph_spec(const std::string& text);
PeriodicGraphSpec parse_graph_file(std::istream& in);

// Raw family file: JSON with c0 and coeffs as matrices of [re, im] entries.
BlochFamily parse_family_json(const std::string& text);
std::string family_to_json(const BlochFamily& family);

// Dispatches on the top-level keys: a graph file is built through
// PeriodicGraphSpec, a raw family file is loaded directly.
BlochFamily load_family(const std::string& text);

}  // namespace bandcert
