// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "afdmtt/linalg.hpp"

namespace afdmtt {

/// Dense order-3 complex tensor, mode-1-fastest layout: (i,j,k) lives at
/// linear offset i + d1*(j + d2*k). The same convention every factor-matrix
/// identity in this library is written against.
class ComplexTensor3 {
 public:
  ComplexTensor3() : d_{0, 0, 0} {}
  ComplexTensor3(Index d1, Index d2, Index d3) : d_{d1, d2, d3} {
    if (d1 < 0 || d2 < 0 || d3 < 0)
      throw std::invalid_argument("ComplexTensor3: negative dimension");
    data_.assign(static_cast<std::size_t>(d1 * d2 * d3), cdouble{0.0, 0.0});
  }

  Index dim(int mode) const { return d_[check_mode(mode)]; }
  std::array<Index, 3> dims() const { return d_; }
  Index size() const { return static_cast<Index>(data_.size()); }

  cdouble& operator()(Index i, Index j, Index k) {
    return data_[static_cast<std::size_t>(offset(i, j, k))];
  }
  const cdouble& operator()(Index i, Index j, Index k) const {
    return data_[static_cast<std::size_t>(offset(i, j, k))];
  }

  cdouble* data() { return data_.data(); }
  const cdouble* data() const { return data_.data(); }

  double frobenius_norm() const {
    double acc = 0.0;
    for (const cdouble& z : data_) acc += std::norm(z);
    return std::sqrt(acc);
  }

 private:
  static int check_mode(int mode) {
    if (mode < 0 || mode > 2) throw std::invalid_argument("tensor mode out of range");
    return mode;
  }
  Index offset(Index i, Index j, Index k) const {
    return i + d_[0] * (j + d_[1] * k);
  }

  std::array<Index, 3> d_;
  std::vector<cdouble> data_;
};

/// Mode-n unfolding, shape (d_n, prod of the others), with the remaining modes
/// enumerated in ascending order and the earlier one fastest. Mode 1 is a
/// straight reinterpretation of the storage.
inline MatC mode_unfold(const ComplexTensor3& t, int mode) {
  const auto d = t.dims();
  switch (mode) {
    case 1: {
      return Eigen::Map<const MatC>(t.data(), d[0], d[1] * d[2]);
    }
    case 2: {
      MatC m(d[1], d[0] * d[2]);
      for (Index k = 0; k < d[2]; ++k)
        for (Index jj = 0; jj < d[1]; ++jj)
          for (Index i = 0; i < d[0]; ++i) m(jj, i + d[0] * k) = t(i, jj, k);
      return m;
    }
    case 3: {
      MatC m(d[2], d[0] * d[1]);
      Eigen::Map<const MatC> flat(t.data(), d[0] * d[1], d[2]);
      m = flat.transpose();
      return m;
    }
    default:
      throw std::invalid_argument("mode_unfold: mode must be 1, 2 or 3");
  }
}

/// Inverse of mode_unfold for the given target dimensions.
inline ComplexTensor3 mode_fold(const MatC& m, int mode, std::array<Index, 3> dims) {
  ComplexTensor3 t(dims[0], dims[1], dims[2]);
  const Index expected_rows = dims[static_cast<std::size_t>(mode - 1)];
  if (mode < 1 || mode > 3) throw std::invalid_argument("mode_fold: mode must be 1, 2 or 3");
  if (m.rows() != expected_rows || m.size() != t.size())
    throw std::invalid_argument("mode_fold: shape mismatch");
  for (Index k = 0; k < dims[2]; ++k)
    for (Index jj = 0; jj < dims[1]; ++jj)
      for (Index i = 0; i < dims[0]; ++i) {
        cdouble v;
        if (mode == 1) v = m(i, jj + dims[1] * k);
        else if (mode == 2) v = m(jj, i + dims[0] * k);
        else v = m(k, i + dims[0] * jj);
        t(i, jj, k) = v;
      }
  return t;
}

/// Column-wise Khatri-Rao product: column r is kron(a_r, b_r), b-index fastest.
inline MatC khatri_rao(const MatC& a, const MatC& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("khatri_rao: column counts differ");
  MatC out(a.rows() * b.rows(), a.cols());
  for (Index r = 0; r < a.cols(); ++r)
    for (Index ia = 0; ia < a.rows(); ++ia)
      out.col(r).segment(ia * b.rows(), b.rows()) = a(ia, r) * b.col(r);
  return out;
}

/// Assemble sum_r w_r * a1_r o a2_r o a3_r from its factor matrices.
inline ComplexTensor3 cpd_construct(const VecC& weights, const MatC& a1,
                                    const MatC& a2, const MatC& a3) {
  const Index p = weights.size();
  if (a1.cols() != p || a2.cols() != p || a3.cols() != p)
    throw std::invalid_argument("cpd_construct: factor column counts must match weights");
  MatC unfold1 = a1 * weights.asDiagonal() * khatri_rao(a3, a2).transpose();
  return mode_fold(unfold1, 1, {a1.rows(), a2.rows(), a3.rows()});
}

/// Tensor-train factors of an order-3 tensor at a fixed internal rank p:
/// t(i,j,k) = sum_{r1,r2} head(i,r1) * core(r1,j,r2) * tail(r2,k).
struct TTCores {
  MatC head;           // d1 x p
  ComplexTensor3 core;  // p x d2 x p
  MatC tail;           // p x d3
};

/// Two-sweep truncated-SVD tensor-train factorization. Both truncations push
/// the singular values into the right factor, so the head and the core hold
/// orthonormal columns and the tail carries the scale.
inline TTCores tt_svd(const ComplexTensor3& t, Index p) {
  const auto d = t.dims();
  if (p < 1) throw std::invalid_argument("tt_svd: rank must be positive");
  if (p > std::min({d[0], d[2], d[1] * p}))
    throw std::invalid_argument("tt_svd: rank exceeds unfolding dimensions");

  const SvdResult f1 = svd_econ(mode_unfold(t, 1));
  if (f1.s.size() < p) throw std::invalid_argument("tt_svd: rank exceeds matrix rank bound");
  TTCores out;
  out.head = f1.u.leftCols(p);
  // right factor with singular values absorbed, shape p x (d2*d3)
  MatC v1 = f1.s.head(p).asDiagonal() * f1.v.leftCols(p).adjoint();

  // regroup (r, j+d2*k) -> (r + p*j, k) and split again
  MatC w(p * d[1], d[2]);
  for (Index k = 0; k < d[2]; ++k)
    for (Index jj = 0; jj < d[1]; ++jj)
      for (Index r = 0; r < p; ++r) w(r + p * jj, k) = v1(r, jj + d[1] * k);

  const SvdResult f2 = svd_econ(w);
  const Index p2 = std::min<Index>(p, f2.s.size());
  MatC u2 = MatC::Zero(p * d[1], p);
  u2.leftCols(p2) = f2.u.leftCols(p2);
  out.tail = MatC::Zero(p, d[2]);
  out.tail.topRows(p2) = f2.s.head(p2).asDiagonal() * f2.v.leftCols(p2).adjoint();

  out.core = ComplexTensor3(p, d[1], p);
  for (Index r2 = 0; r2 < p; ++r2)
    for (Index jj = 0; jj < d[1]; ++jj)
      for (Index r1 = 0; r1 < p; ++r1) out.core(r1, jj, r2) = u2(r1 + p * jj, r2);
  return out;
}

/// Contract tensor-train factors back to the full tensor.
inline ComplexTensor3 tt_contract(const TTCores& tt) {
  const Index p = tt.head.cols();
  const auto cd = tt.core.dims();
  if (cd[0] != p || cd[2] != tt.tail.rows())
    throw std::invalid_argument("tt_contract: core ranks disagree with head/tail");
  // (head x core) first: m1(i + d1*j, r2), then times tail
  const Index d1 = tt.head.rows(), d2 = cd[1], d3 = tt.tail.cols();
  MatC core2(p, d2 * p);
  for (Index r2 = 0; r2 < p; ++r2)
    for (Index jj = 0; jj < d2; ++jj)
      for (Index r1 = 0; r1 < p; ++r1) core2(r1, jj + d2 * r2) = tt.core(r1, jj, r2);
  MatC hc = tt.head * core2;  // d1 x (d2*p)
  MatC flat(d1 * d2, p);
  for (Index r2 = 0; r2 < p; ++r2)
    for (Index jj = 0; jj < d2; ++jj)
      for (Index i = 0; i < d1; ++i) flat(i + d1 * jj, r2) = hc(i, jj + d2 * r2);
  MatC full = flat * tt.tail;  // (d1*d2) x d3
  ComplexTensor3 out(d1, d2, d3);
  Eigen::Map<MatC>(out.data(), d1 * d2, d3) = full;
  return out;
}

/// Largest-relative-gap rank suggestion from a singular-value profile.
/// Diagnostic only; the estimator always runs at the configured path count.
inline Index rank_from_gap(const VecR& s) {
  if (s.size() < 2) return s.size();
  Index best = 1;
  double best_ratio = 0.0;
  for (Index k = 0; k + 1 < s.size(); ++k) {
    const double lo = std::max(s(k + 1), 1e-300);
    const double ratio = s(k) / lo;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = k + 1;
    }
  }
  return best;
}

}  // namespace afdmtt
