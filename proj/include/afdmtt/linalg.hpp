// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "afdmtt/common.hpp"

namespace afdmtt {

struct SvdResult {
  MatC u;        // m x r, left singular vectors
  VecR s;        // r, singular values (descending)
  MatC v;        // n x r, right singular vectors (A = u * diag(s) * v^H)
};

/// Thin SVD with a deterministic phase convention: the largest-magnitude entry
/// of every left singular vector is rotated to the positive real axis (the
/// matching right vector absorbs the opposite rotation, so u*s*v^H is intact).
/// Keeps decompositions reproducible across runs; degenerate subspaces remain
/// basis-ambiguous as in any SVD.
inline SvdResult svd_econ(const MatC& a) {
  if (a.size() == 0) throw std::invalid_argument("svd_econ: empty matrix");
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult r{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Index k = 0; k < r.u.cols(); ++k) {
    Index imax = 0;
    r.u.col(k).cwiseAbs().maxCoeff(&imax);
    const cdouble piv = r.u(imax, k);
    if (std::abs(piv) > 0.0) {
      const cdouble rot = std::conj(piv) / std::abs(piv);
      r.u.col(k) *= rot;
      r.v.col(k) *= rot;
    }
  }
  return r;
}

/// Moore-Penrose pseudoinverse via the thin SVD. Singular values below
/// max(m,n) * eps * s_max are treated as zero.
inline MatC pinv(const MatC& a) {
  const SvdResult f = svd_econ(a);
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon() *
                     (f.s.size() > 0 ? f.s(0) : 0.0);
  MatC out = MatC::Zero(a.cols(), a.rows());
  for (Index k = 0; k < f.s.size(); ++k) {
    if (f.s(k) > tol) out += (1.0 / f.s(k)) * f.v.col(k) * f.u.col(k).adjoint();
  }
  return out;
}

struct EvdResult {
  VecC values;   // eigenvalues, in Eigen's deterministic order
  MatC vectors;  // matching right eigenvectors (columns)
};

/// Eigendecomposition of a general square complex matrix.
inline EvdResult evd(const MatC& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("evd: matrix must be square");
  Eigen::ComplexEigenSolver<MatC> es(a, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) throw std::runtime_error("evd: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

struct Rank1Result {
  VecC u;  // column factor, first entry pinned to 1
  VecC v;  // row factor carrying the scale: m ~= u * v^T
};

/// Best rank-1 approximation (dominant SVD pair) of m, scaled so that u(0) = 1
/// and v carries sigma_1 and all phase. Falls back to the largest-magnitude
/// entry of u for the pin when u(0) is numerically zero.
inline Rank1Result best_rank1(const MatC& m) {
  if (m.size() == 0 || m.norm() == 0.0)
    throw std::invalid_argument("best_rank1: zero or empty matrix");
  const SvdResult f = svd_econ(m);
  VecC u = f.u.col(0);
  VecC v = f.s(0) * f.v.col(0).conjugate();
  Index pin = 0;
  if (std::abs(u(0)) < 1e-12 * u.cwiseAbs().maxCoeff()) u.cwiseAbs().maxCoeff(&pin);
  const cdouble scale = u(pin);
  u /= scale;
  v *= scale;
  if (pin != 0) {
    // keep the contract best-effort for pathological inputs: renormalize on entry 0
    const cdouble s0 = u(0);
    if (std::abs(s0) > 0.0) { u /= s0; v *= s0; }
  }
  return {u, v};
}

}  // namespace afdmtt
