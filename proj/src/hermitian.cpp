#include "bandcert/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bandcert {

namespace {

void require_hermitian(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw NotHermitianError(std::string(who) + ": matrix is not square");
  }
  if (!m.allFinite()) {
    throw NotHermitianError(std::string(who) + ": matrix has non-finite entries");
  }
  const double scale = max_abs(m);
  const double dev = max_abs(Matrix(m - m.adjoint()));
  if (dev > 1e-12 * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << who << ": matrix is not Hermitian, ||M - M*|| = " << dev
       << " vs scale " << scale;
    throw NotHermitianError(os.str());
  }
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Fixed phase convention: largest-modulus component (lowest index on ties)
// is made real and non-negative.
void fix_phase(Eigen::Ref<Vector> v) {
  Eigen::Index pivot = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best * (1.0 + 1e-12)) {
      best = a;
      pivot = i;
    }
  }
  if (best <= 0.0) return;
  const Complex z = v[pivot];
  v *= std::conj(z) / std::abs(z);
  v[pivot] = Complex(std::abs(v[pivot]), 0.0);
}

// Canonical basis of a degenerate eigenspace: depends only on the spectral
// projector, not on solver internals.  Gram-Schmidt over projected
// coordinate vectors, taken in coordinate order.
Matrix canonical_subspace_basis(const Matrix& projector, int k) {
  const Eigen::Index n = projector.rows();
  Matrix basis(n, k);
  int found = 0;
  for (Eigen::Index i = 0; i < n && found < k; ++i) {
    Vector w = projector.col(i);
    for (int j = 0; j < found; ++j) {
      w -= basis.col(j).dot(w) * basis.col(j);
    }
    const double nrm = w.norm();
    if (nrm > 1e-8) {
      basis.col(found) = w / nrm;
      fix_phase(basis.col(found));
      ++found;
    }
  }
  // Projector columns always span the subspace, so this only triggers if the
  // pivot threshold was too aggressive; retry accepting anything nonzero.
  if (found < k) {
    found = 0;
    for (Eigen::Index i = 0; i < n && found < k; ++i) {
      Vector w = projector.col(i);
      for (int j = 0; j < found; ++j) {
        w -= basis.col(j).dot(w) * basis.col(j);
      }
      const double nrm = w.norm();
      if (nrm > 1e-13) {
        basis.col(found) = w / nrm;
        fix_phase(basis.col(found));
        ++found;
      }
    }
  }
  if (found < k) {
    throw NumericalRankError("canonical_subspace_basis: projector rank deficient");
  }
  return basis;
}

double default_tol(const EigenDecomposition& ed, double tol) {
  return tol >= 0.0 ? tol : tol::rank_rel * ed.spectral_norm();
}

}  // namespace

std::string to_string(const Inertia& in) {
  std::ostringstream os;
  os << "(" << in.plus << "," << in.minus << "," << in.zero << ")";
  return os.str();
}

Matrix BlockMatrix::assemble() const {
  const Eigen::Index m = a.rows();
  const Eigen::Index k = c.rows();
  Matrix full(m + k, m + k);
  full.topLeftCorner(m, m) = a;
  full.topRightCorner(m, k) = b;
  full.bottomLeftCorner(k, m) = b.adjoint();
  full.bottomRightCorner(k, k) = c;
  return full;
}

EigenDecomposition eig_hermitian(const Matrix& m) {
  require_hermitian(m, "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver failed to converge");
  }
  EigenDecomposition ed{solver.eigenvalues(), solver.eigenvectors()};

  const double scale = std::max(ed.spectral_norm(), 1e-300);
  const double cluster_tol = 1e-13 * scale;
  const Eigen::Index n = ed.values.size();
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i + 1;
    while (j < n && ed.values[j] - ed.values[j - 1] <= cluster_tol) ++j;
    if (j - i > 1) {
      const Matrix vc = ed.vectors.middleCols(i, j - i);
      ed.vectors.middleCols(i, j - i) =
          canonical_subspace_basis(Matrix(vc * vc.adjoint()), int(j - i));
    } else {
      fix_phase(ed.vectors.col(i));
    }
    i = j;
  }
  return ed;
}

Matrix pinv(const Matrix& m, double tol) {
  const EigenDecomposition ed = eig_hermitian(m);
  const double t = default_tol(ed, tol);
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < ed.values.size(); ++k) {
    if (std::abs(ed.values[k]) > t) {
      out += (1.0 / ed.values[k]) * ed.vectors.col(k) * ed.vectors.col(k).adjoint();
    }
  }
  return symmetrize(out);
}

Inertia inertia(const Matrix& m, double tol) { return inertia_detailed(m, tol).in; }

InertiaDetail inertia_detailed(const Matrix& m, double tol) {
  const EigenDecomposition ed = eig_hermitian(m);
  const double t = default_tol(ed, tol);
  InertiaDetail out;
  for (Eigen::Index k = 0; k < ed.values.size(); ++k) {
    const double v = ed.values[k];
    if (v > t) {
      ++out.in.plus;
    } else if (v < -t) {
      ++out.in.minus;
    } else {
      ++out.in.zero;
    }
    const double a = std::abs(v);
    if (a > t && a <= 10.0 * t) out.borderline = true;
  }
  return out;
}

Matrix restrict_to(const Matrix& m, const Matrix& basis) {
  if (basis.rows() != m.rows()) {
    throw std::invalid_argument("restrict_to: basis row count mismatch");
  }
  const Matrix gram = basis.adjoint() * basis;
  const double dev =
      max_abs(Matrix(gram - Matrix::Identity(gram.rows(), gram.cols())));
  if (dev > 1e-11) {
    std::ostringstream os;
    os << "restrict_to: basis not orthonormal, ||B*B - I|| = " << dev;
    throw std::invalid_argument(os.str());
  }
  return symmetrize(basis.adjoint() * m * basis);
}

Matrix null_basis(const Matrix& m, double tol) {
  const EigenDecomposition ed = eig_hermitian(m);
  const double t = default_tol(ed, tol);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < ed.values.size(); ++k) {
    if (std::abs(ed.values[k]) <= t) idx.push_back(k);
  }
  Matrix basis(m.rows(), Eigen::Index(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) basis.col(Eigen::Index(k)) = ed.vectors.col(idx[k]);
  return basis;
}

Matrix null_projector(const Matrix& m, double tol) {
  const Matrix basis = null_basis(m, tol);
  return symmetrize(basis * basis.adjoint());
}

Matrix schur_complement(const BlockMatrix& blk, double tol) {
  return symmetrize(blk.c - blk.b.adjoint() * pinv(blk.a, tol) * blk.b);
}

HaynsworthResult haynsworth_generalized(const BlockMatrix& blk, double tol) {
  const Eigen::Index k = blk.c.rows();
  const EigenDecomposition ed_a = eig_hermitian(blk.a);
  const double tol_a = default_tol(ed_a, tol);

  const Matrix p = null_projector(blk.a, tol_a);
  const Matrix g = symmetrize(blk.b.adjoint() * p * blk.b);

  HaynsworthResult res;
  res.q_basis = null_basis(g);
  res.i_infty = int(k - res.q_basis.cols());
  res.inertia_a = inertia(blk.a, tol_a);
  res.inertia_schur_on_q = inertia(restrict_to(schur_complement(blk, tol_a), res.q_basis));
  res.inertia_total = inertia(blk.assemble());

  const Inertia predicted{res.inertia_a.plus + res.inertia_schur_on_q.plus + res.i_infty,
                          res.inertia_a.minus + res.inertia_schur_on_q.minus + res.i_infty,
                          res.inertia_a.zero + res.inertia_schur_on_q.zero - res.i_infty};
  if (!(predicted == res.inertia_total)) {
    std::ostringstream os;
    os << "haynsworth_generalized: inertia identity failed; In(M) = "
       << to_string(res.inertia_total) << " but In(A) + In_Q(M/A) + (i,i,-i) = "
       << to_string(predicted) << " with In(A) = " << to_string(res.inertia_a)
       << ", In_Q(M/A) = " << to_string(res.inertia_schur_on_q)
       << ", i_infty = " << res.i_infty
       << "; the numerical rank of A or B*PB is unreliable at tol " << tol_a;
    throw NumericalRankError(os.str());
  }
  return res;
}

double epsilon_schur_invariance_check(const BlockMatrix& blk,
                                      const std::vector<double>& eps_list) {
  if (eps_list.empty()) {
    throw std::invalid_argument("epsilon_schur_invariance_check: empty eps list");
  }
  for (double e : eps_list) {
    if (e == 0.0) {
      throw std::invalid_argument("epsilon_schur_invariance_check: eps must be nonzero");
    }
  }
  const Matrix p = null_projector(blk.a);
  const Matrix g = symmetrize(blk.b.adjoint() * p * blk.b);
  const Matrix q = null_basis(g);

  std::vector<Matrix> restricted;
  restricted.reserve(eps_list.size());
  for (double e : eps_list) {
    const Matrix shifted = symmetrize(blk.a + e * p);
    const EigenDecomposition ed = eig_hermitian(shifted);
    const double t = tol::rank_rel * ed.spectral_norm();
    if (ed.values.cwiseAbs().minCoeff() <= t) {
      std::ostringstream os;
      os << "epsilon_schur_invariance_check: A + eps*P singular for eps = " << e;
      throw SingularEpsilonError(os.str());
    }
    Matrix inv = Matrix::Zero(blk.a.rows(), blk.a.cols());
    for (Eigen::Index i = 0; i < ed.values.size(); ++i) {
      inv += (1.0 / ed.values[i]) * ed.vectors.col(i) * ed.vectors.col(i).adjoint();
    }
    restricted.push_back(
        restrict_to(symmetrize(blk.c - blk.b.adjoint() * inv * blk.b), q));
  }

  double worst = 0.0;
  for (size_t i = 0; i < restricted.size(); ++i) {
    for (size_t j = i + 1; j < restricted.size(); ++j) {
      worst = std::max(worst, max_abs(Matrix(restricted[i] - restricted[j])));
    }
  }
  return worst;
}

}  // namespace bandcert
