#include "bandcert/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bandcert {

namespace {

void require_band(const BlochFamily& family, int n) {
  if (n < 1 || n > family.size()) {
    throw std::invalid_argument("band index " + std::to_string(n) + " out of range 1.." +
                                std::to_string(family.size()));
  }
}

double spectral_diameter(const RealVector& values) {
  return values.size() ? values[values.size() - 1] - values[0] : 0.0;
}

// Shared assembly of the first/second derivative data at one eigenpair.
struct PointData {
  Matrix tmat;
  EigenDecomposition eig;
  Vector f;
  double lambda = 0.0;
  Matrix a;
  Matrix a_pinv;
  Matrix b;
  RealVector omega;
  Matrix w;
  RealVector gradient;
  double scale = 1.0;
};

PointData point_data(const BlochFamily& family, const Quasimomentum& alpha, int n,
                     const NumericOptions& opt) {
  PointData pd;
  pd.tmat = family.evaluate(alpha);
  pd.eig = eig_hermitian(pd.tmat);
  pd.lambda = pd.eig.values[n - 1];
  pd.f = pd.eig.vectors.col(n - 1);

  const int N = family.size();
  const int d = family.dimension();
  pd.a = pd.tmat - pd.lambda * Matrix::Identity(N, N);

  // A and T share eigenvectors, so A^+ comes from the shifted spectrum.
  double anorm = 0.0;
  for (Eigen::Index k = 0; k < pd.eig.values.size(); ++k) {
    anorm = std::max(anorm, std::abs(pd.eig.values[k] - pd.lambda));
  }
  const double tol_a = opt.rank_rel * anorm;
  pd.a_pinv = Matrix::Zero(N, N);
  for (Eigen::Index k = 0; k < pd.eig.values.size(); ++k) {
    const double nu = pd.eig.values[k] - pd.lambda;
    if (std::abs(nu) > tol_a) {
      pd.a_pinv += (1.0 / nu) * pd.eig.vectors.col(k) * pd.eig.vectors.col(k).adjoint();
    }
  }

  pd.b = Matrix(N, d);
  pd.omega = RealVector(d);
  for (int j = 0; j < d; ++j) {
    const Matrix& cj = family.coeffs()[size_t(j)];
    const Complex phase = std::polar(1.0, alpha[j]);
    pd.b.col(j) = Complex(0, 1) * (phase * (cj * pd.f) - std::conj(phase) * (cj.adjoint() * pd.f));
    pd.omega[j] = -std::real(phase * pd.f.dot(cj * pd.f));
  }
  Matrix omega_mat = Matrix::Zero(d, d);
  omega_mat.diagonal() = pd.omega.cast<Complex>();
  const Matrix w_raw = omega_mat - pd.b.adjoint() * pd.a_pinv * pd.b;
  pd.w = 0.5 * (w_raw + w_raw.adjoint().eval());
  pd.gradient = (pd.b.adjoint() * pd.f).real();
  pd.scale = std::max({1.0, std::abs(pd.lambda), anorm});
  return pd;
}

double band_value_only(const BlochFamily& family, const Quasimomentum& alpha, int n) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(family.evaluate(alpha),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[n - 1];
}

}  // namespace

BandEigen band_at(const BlochFamily& family, const Quasimomentum& alpha, int n,
                  const NumericOptions& opt) {
  require_band(family, n);
  const Matrix t = family.evaluate(alpha);
  const EigenDecomposition ed = eig_hermitian(t);

  BandEigen be;
  be.alpha = alpha;
  be.band = n;
  be.value = ed.values[n - 1];
  be.vec = ed.vectors.col(n - 1);
  be.gap = std::numeric_limits<double>::infinity();
  if (n > 1) be.gap = std::min(be.gap, be.value - ed.values[n - 2]);
  if (n < family.size()) be.gap = std::min(be.gap, ed.values[n] - be.value);
  be.simple = be.gap > opt.gap_rel * spectral_diameter(ed.values);
  return be;
}

DerivativePack derivative_pack(const BlochFamily& family, const BandEigen& be,
                               bool fd_check, const NumericOptions& opt) {
  require_band(family, be.band);
  if (!be.simple) {
    throw DegenerateEigenvalueError(
        "derivative_pack: eigenvalue is degenerate (gap " + std::to_string(be.gap) +
        "); band-touching points are out of scope");
  }

  const PointData pd = point_data(family, be.alpha, be.band, opt);
  const int N = family.size();
  const int d = family.dimension();

  DerivativePack pack;
  pack.alpha = be.alpha;
  pack.band = be.band;
  pack.value = pd.lambda;
  pack.f = pd.f;
  pack.b = pd.b;
  pack.omega = pd.omega;
  pack.w = pd.w;
  pack.gradient = pd.gradient;
  pack.hessian = 2.0 * pd.w.real();
  pack.a = pd.a;
  pack.scale = pd.scale;
  pack.structure_applicable = family.single_crossing();

  // Classify Null(Omega).  For single-crossing families this follows the
  // crossing-edge components of f (J'/J''); otherwise it falls back to a
  // rank decision on the diagonal of Omega itself.
  std::vector<bool> in_null(size_t(d), false);
  if (pack.structure_applicable) {
    pack.crossings = *family.crossings();
    const double fz = tol::vec_zero_rel * max_abs(pd.f);
    for (int j = 0; j < d; ++j) {
      const Crossing& cr = pack.crossings[size_t(j)];
      const double fu = std::abs(pd.f[cr.u]);
      const double fv = std::abs(pd.f[cr.v]);
      const bool prime = fu > fz && fv > fz;
      (prime ? pack.j_prime : pack.j_double_prime).push_back(j);
      in_null[size_t(j)] = !prime;
      if (fu <= fz && fv <= fz) pack.crossing_vanishing.push_back(j);
      for (double comp : {fu, fv}) {
        if (comp > fz && comp <= 10.0 * fz) {
          pack.warnings.push_back("borderline J'/J'' classification on generator " +
                                  std::to_string(j + 1) + ": |f| = " + std::to_string(comp));
          break;
        }
      }
      if (cr.loop()) {
        pack.warnings.push_back("generator " + std::to_string(j + 1) +
                                " is a loop crossing edge (u = v)");
      }
    }
  } else {
    const double tol_omega = opt.rank_rel * std::max(max_abs(pd.omega), 1e-300);
    for (int j = 0; j < d; ++j) in_null[size_t(j)] = std::abs(pd.omega[j]) <= tol_omega;
  }

  pack.omega_pinv_diag = RealVector::Zero(d);
  for (int j = 0; j < d; ++j) {
    if (!in_null[size_t(j)]) {
      pack.omega_pinv_diag[j] = 1.0 / pd.omega[j];
      if (pd.omega[j] > 0) {
        ++pack.omega_inertia.plus;
      } else {
        ++pack.omega_inertia.minus;
      }
    } else {
      ++pack.omega_inertia.zero;
    }
  }

  // Q = Null(B P B*), S = (A - B Omega^+ B*)_Q, i_infty = rk(B P B*).
  Matrix bpb = Matrix::Zero(N, N);
  for (int j = 0; j < d; ++j) {
    if (in_null[size_t(j)]) bpb += pd.b.col(j) * pd.b.col(j).adjoint();
  }
  bpb = 0.5 * (bpb + bpb.adjoint().eval());
  pack.q_basis = null_basis(bpb, opt.rank_rel * eig_hermitian(bpb).spectral_norm());
  pack.i_infty = N - int(pack.q_basis.cols());
  Matrix omega_pinv_mat = Matrix::Zero(d, d);
  omega_pinv_mat.diagonal() = pack.omega_pinv_diag.cast<Complex>();
  const Matrix reduced = pd.a - pd.b * omega_pinv_mat * pd.b.adjoint();
  pack.s = restrict_to(reduced, pack.q_basis);

  if (fd_check) {
    const RealMatrix fd = fd_hessian(family, be.alpha, be.band);
    const double rel =
        max_abs(RealMatrix(fd - pack.hessian)) / std::max(max_abs(pack.hessian), 1e-12);
    if (rel > 1e-3) {
      std::ostringstream os;
      os << "analytic Hessian disagrees with finite differences, relative error " << rel;
      pack.warnings.push_back(os.str());
    }
  }
  return pack;
}

double criticality_residual(const DerivativePack& pack) {
  if (pack.structure_applicable) {
    double worst = 0.0;
    for (size_t j = 0; j < pack.crossings.size(); ++j) {
      const Crossing& cr = pack.crossings[j];
      const Complex phase = std::polar(1.0, pack.alpha[int(j)]);
      const Complex prod = cr.h * phase * pack.f[cr.v] * std::conj(pack.f[cr.u]);
      worst = std::max(worst, 2.0 * std::abs(std::imag(prod)));
    }
    return worst;
  }
  return max_abs(pack.gradient);
}

Matrix bob_star(const DerivativePack& pack) {
  if (!pack.structure_applicable) {
    throw std::invalid_argument("bob_star: family is not single-crossing");
  }
  const double crit = criticality_residual(pack);
  if (crit > 1e-7 * pack.scale) {
    throw std::invalid_argument("bob_star: not a critical point (residual " +
                                std::to_string(crit) + ")");
  }
  const int N = int(pack.a.rows());
  Matrix omega_pinv_mat = Matrix::Zero(pack.omega.size(), pack.omega.size());
  omega_pinv_mat.diagonal() = pack.omega_pinv_diag.cast<Complex>();
  const Matrix direct = pack.b * omega_pinv_mat * pack.b.adjoint();

  // Entrywise crossing-edge formula; loop generators contribute zero.
  Matrix byedges = Matrix::Zero(N, N);
  for (int j : pack.j_prime) {
    const Crossing& cr = pack.crossings[size_t(j)];
    if (cr.loop()) continue;
    const Complex phase = std::polar(1.0, pack.alpha[j]);
    const double om = pack.omega[j];
    byedges(cr.u, cr.u) += om / std::norm(pack.f[cr.u]);
    byedges(cr.u, cr.v) += cr.h * phase;
    byedges(cr.v, cr.u) += std::conj(cr.h) * std::conj(phase);
    byedges(cr.v, cr.v) += om / std::norm(pack.f[cr.v]);
  }
  const double dev = max_abs(Matrix(direct - byedges));
  if (dev > 1e-9 * std::max(max_abs(direct), 1.0)) {
    throw NumericalRankError("bob_star: matrix route and crossing-edge formula disagree by " +
                             std::to_string(dev));
  }

  // Ran(B P B*) must be spanned by the standard basis vectors sitting on the
  // non-vanishing end of each J'' edge.
  std::vector<bool> expected(size_t(N), false);
  const double fz = tol::vec_zero_rel * max_abs(pack.f);
  for (int j : pack.j_double_prime) {
    const Crossing& cr = pack.crossings[size_t(j)];
    if (cr.loop()) continue;
    const double fu = std::abs(pack.f[cr.u]);
    const double fv = std::abs(pack.f[cr.v]);
    if (fu <= fz && fv > fz) expected[size_t(cr.u)] = true;
    if (fv <= fz && fu > fz) expected[size_t(cr.v)] = true;
  }
  for (int v = 0; v < N; ++v) {
    const bool in_range = pack.q_basis.row(v).norm() < 1e-6;
    if (expected[size_t(v)] != in_range) {
      throw NumericalRankError("bob_star: Ran(BPB*) does not match the expected basis at vertex " +
                               std::to_string(v + 1));
    }
  }
  return direct;
}

IndexIdentityReport index_identities(const DerivativePack& pack) {
  IndexIdentityReport rep;
  const Matrix na = null_basis(pack.a);
  rep.precondition_residual =
      na.cols() ? max_abs(Matrix(pack.b.adjoint() * na)) : 0.0;
  rep.precondition_ok =
      rep.precondition_residual <= 1e-7 * std::max(max_abs(pack.b), 1.0);
  if (!rep.precondition_ok) return rep;

  rep.in_w = inertia(pack.w);
  rep.in_omega = pack.omega_inertia;
  rep.in_s = inertia(pack.s);
  rep.in_a = inertia(pack.a);
  rep.i_infty = pack.i_infty;

  auto add = [&rep](const std::string& name, int lhs, int rhs) {
    rep.lines.push_back({name, lhs, rhs, lhs == rhs});
  };
  add("i-(W) = i-(Omega) + i-(S) + i_inf - i-(A)", rep.in_w.minus,
      rep.in_omega.minus + rep.in_s.minus + rep.i_infty - rep.in_a.minus);
  add("i0(W) = i0(Omega) + i0(S) - i_inf - i0(A)", rep.in_w.zero,
      rep.in_omega.zero + rep.in_s.zero - rep.i_infty - rep.in_a.zero);
  add("i+(W) = i+(Omega) + i+(S) + i_inf - i+(A)", rep.in_w.plus,
      rep.in_omega.plus + rep.in_s.plus + rep.i_infty - rep.in_a.plus);
  add("i+(W) = i+(Omega) - i-(S) - i0(S) + i-(A) + i0(A)", rep.in_w.plus,
      rep.in_omega.plus - rep.in_s.minus - rep.in_s.zero + rep.in_a.minus + rep.in_a.zero);
  rep.all_pass = std::all_of(rep.lines.begin(), rep.lines.end(),
                             [](const IndexIdentityLine& l) { return l.pass; });
  return rep;
}

ReparamPack reparameterize(const BlochFamily& family, const BandEigen& be,
                           const RealMatrix& jac, const NumericOptions& opt) {
  if (jac.rows() != family.dimension() || jac.cols() != family.dimension()) {
    throw std::invalid_argument("reparameterize: Jacobian size mismatch");
  }
  if (std::abs(jac.determinant()) <= 1e-10) {
    throw std::invalid_argument("reparameterize: Jacobian is singular, |det| = " +
                                std::to_string(std::abs(jac.determinant())));
  }
  const PointData pd = point_data(family, be.alpha, be.band, opt);

  ReparamPack rp;
  rp.b = pd.b * jac.cast<Complex>();
  rp.omega = jac.transpose() * RealMatrix(pd.omega.asDiagonal()) * jac;
  const Matrix w_raw = rp.omega.cast<Complex>() - rp.b.adjoint() * pd.a_pinv * rp.b;
  rp.w = 0.5 * (w_raw + w_raw.adjoint().eval());
  rp.hessian = 2.0 * rp.w.real();
  rp.gradient = jac.transpose() * pd.gradient;

  const Matrix congruence = jac.transpose().cast<Complex>() * pd.w * jac.cast<Complex>();
  rp.congruence_residual = max_abs(Matrix(rp.w - congruence)) / pd.scale;
  rp.w_inertia = inertia(rp.w);
  rp.inertia_match = rp.w_inertia == inertia(pd.w);
  return rp;
}

RealVector fd_gradient(const BlochFamily& family, const Quasimomentum& alpha, int n,
                       double h) {
  require_band(family, n);
  const int d = family.dimension();
  RealVector g(d);
  for (int j = 0; j < d; ++j) {
    RealVector up = alpha.components(), dn = alpha.components();
    up[j] += h;
    dn[j] -= h;
    g[j] = (band_value_only(family, Quasimomentum(up), n) -
            band_value_only(family, Quasimomentum(dn), n)) /
           (2.0 * h);
  }
  return g;
}

RealMatrix fd_hessian(const BlochFamily& family, const Quasimomentum& alpha, int n,
                      double h) {
  require_band(family, n);
  const int d = family.dimension();
  auto lam = [&](const RealVector& x) { return band_value_only(family, Quasimomentum(x), n); };
  const double center = lam(alpha.components());
  RealMatrix hess(d, d);
  for (int j = 0; j < d; ++j) {
    RealVector up = alpha.components(), dn = alpha.components();
    up[j] += h;
    dn[j] -= h;
    hess(j, j) = (lam(up) - 2.0 * center + lam(dn)) / (h * h);
    for (int k = j + 1; k < d; ++k) {
      RealVector pp = alpha.components(), pm = alpha.components(), mp = alpha.components(),
                 mm = alpha.components();
      pp[j] += h; pp[k] += h;
      pm[j] += h; pm[k] -= h;
      mp[j] -= h; mp[k] += h;
      mm[j] -= h; mm[k] -= h;
      hess(j, k) = hess(k, j) = (lam(pp) - lam(pm) - lam(mp) + lam(mm)) / (4.0 * h * h);
    }
  }
  return hess;
}

RealMatrix fd_hessian_reparam(const BlochFamily& family, const Quasimomentum& alpha0,
                              int n, const RealMatrix& jac, double h) {
  require_band(family, n);
  const int d = family.dimension();
  auto lam = [&](const RealVector& dk) {
    return band_value_only(family, Quasimomentum(alpha0.components() + jac * dk), n);
  };
  const double center = lam(RealVector::Zero(d));
  RealMatrix hess(d, d);
  for (int j = 0; j < d; ++j) {
    RealVector up = RealVector::Zero(d), dn = RealVector::Zero(d);
    up[j] = h;
    dn[j] = -h;
    hess(j, j) = (lam(up) - 2.0 * center + lam(dn)) / (h * h);
    for (int k = j + 1; k < d; ++k) {
      RealVector pp = RealVector::Zero(d), pm = pp, mp = pp, mm = pp;
      pp[j] = h;  pp[k] = h;
      pm[j] = h;  pm[k] = -h;
      mp[j] = -h; mp[k] = h;
      mm[j] = -h; mm[k] = -h;
      hess(j, k) = hess(k, j) = (lam(pp) - lam(pm) - lam(mp) + lam(mm)) / (4.0 * h * h);
    }
  }
  return hess;
}

}  // namespace bandcert
