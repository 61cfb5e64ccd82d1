#pragma once

#include <vector>

#include "bandcert/types.hpp"

namespace bandcert {

struct NotHermitianError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when the generalized Haynsworth identity fails to close, which
// signals an unreliable numerical rank decision rather than a wrong formula.
struct NumericalRankError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularEpsilonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Eigenvalue counts (i+, i-, i0).
struct Inertia {
  int plus = 0;
  int minus = 0;
  int zero = 0;

  int total() const { return plus + minus + zero; }
  bool operator==(const Inertia&) const = default;
};

std::string to_string(const Inertia& in);

struct InertiaDetail {
  Inertia in;
  // True when some |eigenvalue| fell in (tol, 10*tol]: the zero count is
  // then sensitive to the threshold and downstream verdicts should carry
  // a warning.
  bool borderline = false;
};

// values sorted ascending; column k of vectors is the unit eigenvector for
// values[k].  Deterministic: degenerate clusters are re-based canonically
// from the spectral projector and every column carries a fixed phase
// convention (largest-modulus component, lowest index on ties, real >= 0).
struct EigenDecomposition {
  RealVector values;
  Matrix vectors;

  double spectral_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

// Hermitian block matrix [[A, B], [B*, C]] with A of size m x m and C of
// size k x k.
struct BlockMatrix {
  Matrix a;
  Matrix b;
  Matrix c;

  Matrix assemble() const;
};

struct HaynsworthResult {
  Inertia inertia_a;
  Inertia inertia_schur_on_q;  // In_Q(M/A)
  int i_infty = 0;             // rk(B* P_Null(A) B)
  Matrix q_basis;              // orthonormal columns spanning Q = Null(B* P B)
  Inertia inertia_total;       // In(M), computed directly as the cross-check
};

EigenDecomposition eig_hermitian(const Matrix& m);

// Moore-Penrose pseudoinverse of a Hermitian matrix.  Eigenvalues with
// |lambda| <= tol are treated as zero; tol < 0 selects rank_rel * ||m||_2.
Matrix pinv(const Matrix& m, double tol = -1.0);

Inertia inertia(const Matrix& m, double tol = -1.0);
InertiaDetail inertia_detailed(const Matrix& m, double tol = -1.0);

// basis* m basis, i.e. m considered as an operator on the column span of
// basis.  basis must have orthonormal columns.
Matrix restrict_to(const Matrix& m, const Matrix& basis);

// Orthonormal columns spanning the numerical null space {v : |eig| <= tol}.
Matrix null_basis(const Matrix& m, double tol = -1.0);

// Orthogonal projector onto the numerical null space.
Matrix null_projector(const Matrix& m, double tol = -1.0);

// C - B* A^+ B.
Matrix schur_complement(const BlockMatrix& blk, double tol = -1.0);

// In(M) = In(A) + In_Q(M/A) + (i_inf, i_inf, -i_inf) with Q = Null(B* P B).
// The identity is verified against a direct inertia of the assembled M and a
// NumericalRankError is raised on mismatch.  tol applies to the null-space
// extraction of A; other rank decisions use their own relative defaults.
HaynsworthResult haynsworth_generalized(const BlockMatrix& blk, double tol = -1.0);

// Evaluates (C - B*(A + eps P)^{-1} B) restricted to Q for each eps and
// returns the maximum pairwise entrywise deviation; zero in exact
// arithmetic since the restriction is independent of eps.
double epsilon_schur_invariance_check(const BlockMatrix& blk,
                                      const std::vector<double>& eps_list);

}  // namespace bandcert
