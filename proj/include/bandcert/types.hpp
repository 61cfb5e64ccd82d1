#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace bandcert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr const char* kToolVersion = "0.1.0";

// Default tolerance knobs, shared across modules so rank decisions stay
// mutually consistent.
namespace tol {
inline constexpr double struct_zero = 1e-12;  // structural zeros, relative to max |entry|
inline constexpr double eig_residual = 1e-11; // eigendecomposition accuracy contract
inline constexpr double rank_rel = 1e-10;     // rank / null-space threshold, relative to spectral norm
inline constexpr double gap_rel = 1e-8;       // eigenvalue simplicity, relative to spectral diameter
inline constexpr double vec_zero_rel = 1e-8;  // eigenvector component zero threshold
inline constexpr double grad_default = 1e-12; // critical point residual target
inline constexpr double dedup_radius = 1e-6;  // critical point deduplication
}

// Runtime overrides for the two user-facing knobs (CLI --tol-gap / --tol-rank).
struct NumericOptions {
  double gap_rel = tol::gap_rel;
  double rank_rel = tol::rank_rel;
};

// Max |entry|; the entrywise norm used by the accuracy contracts.
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}
inline double max_abs(const RealMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}
inline double max_abs(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}
inline double max_abs(const RealVector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace bandcert
