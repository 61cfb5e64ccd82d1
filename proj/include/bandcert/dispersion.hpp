#pragma once

#include <optional>
#include <vector>

#include "bandcert/hermitian.hpp"
#include "bandcert/lattice.hpp"

namespace bandcert {

struct DegenerateEigenvalueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One eigenpair of T(alpha) with simplicity diagnostics.  The eigenvector
// carries the fixed phase convention of eig_hermitian.
struct BandEigen {
  Quasimomentum alpha;
  int band = 0;        // 1-based
  double value = 0.0;  // lambda_n(T(alpha))
  Vector vec;          // unit eigenvector f
  double gap = 0.0;    // distance to the nearest other eigenvalue
  bool simple = false;
};

BandEigen band_at(const BlochFamily& family, const Quasimomentum& alpha, int n,
                  const NumericOptions& opt = {});

// First and second derivative data of the band at one point: the test matrix
// W = Omega - B* A^+ B together with the reduced matrix S on
// Q = Null(B P_Null(Omega) B*) and the index i_infty = rk(B P B*).
struct DerivativePack {
  Quasimomentum alpha;
  int band = 0;
  double value = 0.0;
  Vector f;

  Matrix b;                    // N x d, col j = i (C_j e^{i a_j} - C_j* e^{-i a_j}) f
  RealVector omega;            // diagonal of Omega
  RealVector omega_pinv_diag;  // diagonal of Omega^+ under the J' classification
  Matrix w;                    // d x d Hermitian
  RealVector gradient;         // Re(B* f) = grad lambda
  RealMatrix hessian;          // 2 Re W
  Matrix a;                    // T(alpha) - lambda
  Matrix s;                    // (A - B Omega^+ B*) restricted to Q
  Matrix q_basis;              // N x dim(Q), orthonormal columns
  int i_infty = 0;             // rk(B P B*)

  // Crossing-edge bookkeeping; meaningful only when structure_applicable.
  bool structure_applicable = false;  // family is single-crossing
  std::vector<int> j_prime;           // 0-based generator indices, f nonzero on both ends
  std::vector<int> j_double_prime;    // complement
  std::vector<int> crossing_vanishing;  // f vanishes on both ends (1-based gen index)
  std::vector<Crossing> crossings;      // copy of the family's crossing table

  Inertia omega_inertia;  // consistent with the J'/J'' classification
  double scale = 1.0;     // max(1, |lambda|, ||A||_2); reference for residual tests
  std::vector<std::string> warnings;
};

// Requires be.simple; refuses degenerate eigenvalues (band-touching points
// are out of scope).  With fd_check, the analytic Hessian is compared
// against central finite differences and a warning is attached on
// disagreement > 1e-3 relative.
DerivativePack derivative_pack(const BlochFamily& family, const BandEigen& be,
                               bool fd_check = false, const NumericOptions& opt = {});

// max_j 2|Im(h_j e^{i a_j} f_vj conj(f_uj))| for single-crossing packs, the
// infinity norm of the gradient otherwise; zero iff alpha is critical.
double criticality_residual(const DerivativePack& pack);

// B Omega^+ B*.  At a critical point of a single-crossing family this is
// cross-checked against the entrywise crossing-edge formula.
Matrix bob_star(const DerivativePack& pack);

struct IndexIdentityLine {
  std::string name;
  int lhs = 0;
  int rhs = 0;
  bool pass = false;
};

struct IndexIdentityReport {
  bool precondition_ok = false;  // Null(A) subset of Null(B*)
  double precondition_residual = 0.0;
  Inertia in_w, in_omega, in_s, in_a;
  int i_infty = 0;
  std::vector<IndexIdentityLine> lines;
  bool all_pass = false;
};

// Evaluates the four inertia identities relating W to Omega, S, A, i_infty.
IndexIdentityReport index_identities(const DerivativePack& pack);

// Derivative data of the reparameterized family T(alpha0 + J (k - k0)) at
// k0.  Omega is no longer diagonal there, so this is a reduced pack.
struct ReparamPack {
  Matrix b;             // B J
  RealMatrix omega;     // J^T Omega J
  Matrix w;             // recomputed through pinv(A)
  RealMatrix hessian;   // 2 Re W
  RealVector gradient;  // J^T grad
  double congruence_residual = 0.0;  // || W~ - J^T W J || / scale
  bool inertia_match = false;
  Inertia w_inertia;
};

ReparamPack reparameterize(const BlochFamily& family, const BandEigen& be,
                           const RealMatrix& jac, const NumericOptions& opt = {});

// Central finite-difference oracles; independent of the analytic path
// (these touch only evaluate() and the eigensolver).
RealVector fd_gradient(const BlochFamily& family, const Quasimomentum& alpha, int n,
                       double h = 1e-5);
RealMatrix fd_hessian(const BlochFamily& family, const Quasimomentum& alpha, int n,
                      double h = 1e-3);
// Same, for lambda_n(T(alpha0 + J dk)) as a function of dk at dk = 0.
RealMatrix fd_hessian_reparam(const BlochFamily& family, const Quasimomentum& alpha0,
                              int n, const RealMatrix& jac, double h = 1e-3);

}  // namespace bandcert
