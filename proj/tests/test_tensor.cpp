// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "afdmtt/linalg.hpp"
#include "afdmtt/tensor.hpp"

using namespace afdmtt;

namespace {

std::mt19937_64 rng_for(unsigned tag) { return std::mt19937_64(1000u + tag); }

ComplexTensor3 random_tensor(Index a, Index b, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexTensor3 t(a, b, c);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = cdouble{g(rng), g(rng)};
  return t;
}

MatC random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatC m(r, c);
  for (Index jj = 0; jj < c; ++jj)
    for (Index i = 0; i < r; ++i) m(i, jj) = cdouble{g(rng), g(rng)};
  return m;
}

double rel_err(const ComplexTensor3& a, const ComplexTensor3& b) {
  double num = 0.0;
  for (Index i = 0; i < a.size(); ++i) num += std::norm(a.data()[i] - b.data()[i]);
  return std::sqrt(num) / b.frobenius_norm();
}

}  // namespace

TEST_CASE("unfold and fold round trip exactly in every mode") {
  auto rng = rng_for(1);
  const ComplexTensor3 t = random_tensor(3, 4, 5, rng);
  for (int mode : {1, 2, 3}) {
    const MatC u = mode_unfold(t, mode);
    const ComplexTensor3 back = mode_fold(u, mode, t.dims());
    REQUIRE(rel_err(back, t) == 0.0);
  }
}

TEST_CASE("unfold index conventions are mode-1 fastest") {
  ComplexTensor3 t(2, 3, 4);
  for (Index k = 0; k < 4; ++k)
    for (Index jj = 0; jj < 3; ++jj)
      for (Index i = 0; i < 2; ++i)
        t(i, jj, k) = cdouble{static_cast<double>(i + 10 * jj + 100 * k), 0.0};
  const MatC u1 = mode_unfold(t, 1);
  const MatC u2 = mode_unfold(t, 2);
  const MatC u3 = mode_unfold(t, 3);
  REQUIRE(u1.rows() == 2);
  REQUIRE(u2.rows() == 3);
  REQUIRE(u3.rows() == 4);
  for (Index k = 0; k < 4; ++k)
    for (Index jj = 0; jj < 3; ++jj)
      for (Index i = 0; i < 2; ++i) {
        const cdouble v = t(i, jj, k);
        REQUIRE(u1(i, jj + 3 * k) == v);
        REQUIRE(u2(jj, i + 2 * k) == v);
        REQUIRE(u3(k, i + 2 * jj) == v);
      }
}

TEST_CASE("khatri_rao columns are kron of the factor columns") {
  auto rng = rng_for(2);
  const MatC a = random_matrix(4, 3, rng);
  const MatC b = random_matrix(5, 3, rng);
  const MatC kr = khatri_rao(a, b);
  REQUIRE(kr.rows() == 20);
  for (Index r = 0; r < 3; ++r)
    for (Index i = 0; i < 4; ++i)
      for (Index jj = 0; jj < 5; ++jj)
        REQUIRE(std::abs(kr(jj + 5 * i, r) - a(i, r) * b(jj, r)) < 1e-15);
}

TEST_CASE("cpd_construct equals the brute force triple sum") {
  auto rng = rng_for(3);
  for (Index p = 1; p <= 4; ++p) {
    const Index d1 = 5, d2 = 4, d3 = 6;
    const MatC a1 = random_matrix(d1, p, rng);
    const MatC a2 = random_matrix(d2, p, rng);
    const MatC a3 = random_matrix(d3, p, rng);
    VecC w(p);
    std::normal_distribution<double> g;
    for (Index r = 0; r < p; ++r) w(r) = cdouble{g(rng), g(rng)};

    const ComplexTensor3 fast = cpd_construct(w, a1, a2, a3);
    ComplexTensor3 slow(d1, d2, d3);
    for (Index i = 0; i < d1; ++i)
      for (Index jj = 0; jj < d2; ++jj)
        for (Index k = 0; k < d3; ++k) {
          cdouble acc{0.0, 0.0};
          for (Index r = 0; r < p; ++r) acc += w(r) * a1(i, r) * a2(jj, r) * a3(k, r);
          slow(i, jj, k) = acc;
        }
    REQUIRE(rel_err(fast, slow) < 1e-12);
  }
}

TEST_CASE("svd_econ reconstructs and fixes the column phases deterministically") {
  auto rng = rng_for(4);
  const MatC m = random_matrix(7, 4, rng);
  const SvdResult f = svd_econ(m);
  REQUIRE((f.u.adjoint() * f.u - MatC::Identity(4, 4)).norm() < 1e-12);
  REQUIRE((f.v.adjoint() * f.v - MatC::Identity(4, 4)).norm() < 1e-12);
  REQUIRE((f.u * f.s.asDiagonal() * f.v.adjoint() - m).norm() < 1e-12 * m.norm());
  for (Index c = 0; c < f.u.cols(); ++c) {
    Index which = 0;
    f.u.col(c).cwiseAbs().maxCoeff(&which);
    const cdouble pivot = f.u(which, c);
    REQUIRE(pivot.real() > 0.0);
    REQUIRE(std::abs(pivot.imag()) < 1e-12 * std::abs(pivot));
  }
}

TEST_CASE("pinv satisfies the Moore-Penrose identities") {
  auto rng = rng_for(5);
  MatC m = random_matrix(6, 4, rng);
  SECTION("full rank") {}
  SECTION("rank deficient") { m.col(3) = m.col(0) + m.col(1); }
  const MatC g = pinv(m);
  REQUIRE((m * g * m - m).norm() < 1e-10 * m.norm());
  REQUIRE((g * m * g - g).norm() < 1e-10 * g.norm());
  REQUIRE(((m * g).adjoint() - m * g).norm() < 1e-10);
  REQUIRE(((g * m).adjoint() - g * m).norm() < 1e-10);
}

TEST_CASE("evd reproduces the eigen relation") {
  auto rng = rng_for(6);
  const MatC a = random_matrix(5, 5, rng);
  const EvdResult e = evd(a);
  REQUIRE((a * e.vectors - e.vectors * e.values.asDiagonal().toDenseMatrix()).norm() <
          1e-10 * a.norm());
}

TEST_CASE("best_rank1 recovers an exact rank-1 matrix with the pin convention") {
  auto rng = rng_for(7);
  std::normal_distribution<double> g;
  VecC u(5), v(4);
  for (Index i = 0; i < 5; ++i) u(i) = cdouble{g(rng), g(rng)};
  for (Index i = 0; i < 4; ++i) v(i) = cdouble{g(rng), g(rng)};
  const MatC m = u * v.transpose();
  const Rank1Result r = best_rank1(m);
  REQUIRE(std::abs(r.u(0) - cdouble{1.0, 0.0}) < 1e-12);
  REQUIRE((r.u * r.v.transpose() - m).norm() < 1e-12 * m.norm());
  REQUIRE_THROWS_AS(best_rank1(MatC::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("tt_svd reconstructs a noiseless low-rank tensor") {
  auto rng = rng_for(8);
  for (Index p = 1; p <= 4; ++p) {
    const MatC a1 = random_matrix(8, p, rng);
    const MatC a2 = random_matrix(6, p, rng);
    const MatC a3 = random_matrix(9, p, rng);
    const ComplexTensor3 t = cpd_construct(VecC::Ones(p), a1, a2, a3);
    const TTCores tt = tt_svd(t, p);
    REQUIRE(tt.head.cols() == p);
    REQUIRE((tt.head.adjoint() * tt.head - MatC::Identity(p, p)).norm() < 1e-10);
    REQUIRE(rel_err(tt_contract(tt), t) < 1e-10);
  }
}

TEST_CASE("tt_svd truncation error obeys the two-step singular value bound") {
  auto rng = rng_for(9);
  const ComplexTensor3 t = random_tensor(6, 5, 7, rng);
  const Index p = 3;
  const TTCores tt = tt_svd(t, p);
  const double err = [&] {
    const ComplexTensor3 back = tt_contract(tt);
    double num = 0.0;
    for (Index i = 0; i < t.size(); ++i) num += std::norm(back.data()[i] - t.data()[i]);
    return std::sqrt(num);
  }();

  // replay the two truncation steps to collect the discarded spectra
  const SvdResult f1 = svd_econ(mode_unfold(t, 1));
  double tail = 0.0;
  for (Index k = p; k < f1.s.size(); ++k) tail += f1.s(k) * f1.s(k);
  const MatC v1 = f1.s.head(p).asDiagonal() * f1.v.leftCols(p).adjoint();
  MatC w(p * 5, 7);
  for (Index k = 0; k < 7; ++k)
    for (Index jj = 0; jj < 5; ++jj)
      for (Index r = 0; r < p; ++r) w(r + p * jj, k) = v1(r, jj + 5 * k);
  const SvdResult f2 = svd_econ(w);
  for (Index k = p; k < f2.s.size(); ++k) tail += f2.s(k) * f2.s(k);

  REQUIRE(err <= std::sqrt(tail) + 1e-10);
}

TEST_CASE("rank gap diagnostic finds a clear spectral knee") {
  VecR s(6);
  s << 10.0, 8.0, 5.0, 0.01, 0.005, 0.001;
  REQUIRE(rank_from_gap(s) == 3);
}
