// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "afdmtt/estimator.hpp"

namespace afdmtt {

namespace detail {

/// O(n^3) Hungarian assignment (potentials form) on a square cost matrix.
/// Returns col_of_row.
inline std::vector<Index> hungarian(const MatR& cost) {
  const Index n = cost.rows();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = std::numeric_limits<double>::infinity();
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<Index> col_of_row(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] != 0)
      col_of_row[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return col_of_row;
}

}  // namespace detail

/// Match estimated paths to true paths by minimum total normalized distance in
/// (cos theta, nu, eta); widths follow the sampling priors so no coordinate
/// dominates. Exhaustive for small P, Hungarian beyond. Returns est_of_true.
inline std::vector<Index> align_paths(const EstimationResult& est, const PathSet& truth,
                                      const SystemConfig& cfg) {
  const Index p = static_cast<Index>(truth.size());
  if (est.theta.size() != p)
    throw std::invalid_argument("align_paths: path count mismatch");
  const double wnu = std::max(2.0 * cfg.nu_max, 1.0);
  const double weta = std::max(static_cast<double>(cfg.M_CPP - 1), 1.0);
  MatR cost(p, p);
  for (Index t = 0; t < p; ++t)
    for (Index r = 0; r < p; ++r) {
      const PathParams& tp = truth[static_cast<std::size_t>(t)];
      const double dc = (std::cos(est.theta(r)) - std::cos(tp.theta)) / 2.0;
      const double dn = (est.nu(r) - tp.nu) / wnu;
      const double de = (est.eta(r) - tp.eta) / weta;
      cost(t, r) = dc * dc + dn * dn + de * de;
    }
  if (p <= 6) {
    std::vector<Index> perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::vector<Index> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double acc = 0.0;
      for (Index t = 0; t < p; ++t) acc += cost(t, perm[static_cast<std::size_t>(t)]);
      if (acc < best_cost) {
        best_cost = acc;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  return detail::hungarian(cost);
}

struct ParamMse {
  double theta = 0.0;
  double nu = 0.0;
  double eta = 0.0;
  double gain = 0.0;
};

/// Mean squared parameter errors over aligned paths; gains compare the
/// effective (post-prefix) complex gains.
inline ParamMse param_mse(const EstimationResult& est, const PathSet& truth,
                          const std::vector<Index>& est_of_true, const SystemConfig& cfg) {
  const Index p = static_cast<Index>(truth.size());
  ParamMse out;
  for (Index t = 0; t < p; ++t) {
    const PathParams& tp = truth[static_cast<std::size_t>(t)];
    const Index r = est_of_true[static_cast<std::size_t>(t)];
    const double dth = est.theta(r) - tp.theta;
    const double dnu = est.nu(r) - tp.nu;
    const double det = est.eta(r) - tp.eta;
    out.theta += dth * dth;
    out.nu += dnu * dnu;
    out.eta += det * det;
    out.gain += std::norm(est.gains(r) - tp.alpha_tilde(cfg));
  }
  const double pd = static_cast<double>(p);
  out.theta /= pd;
  out.nu /= pd;
  out.eta /= pd;
  out.gain /= pd;
  return out;
}

/// Relative squared reconstruction error of a channel tensor.
inline double nmse(const ComplexTensor3& estimate, const ComplexTensor3& reference) {
  const auto da = estimate.dims(), db = reference.dims();
  if (da != db) throw std::invalid_argument("nmse: shape mismatch");
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < reference.size(); ++i) {
    num += std::norm(estimate.data()[i] - reference.data()[i]);
    den += std::norm(reference.data()[i]);
  }
  if (den == 0.0) throw std::invalid_argument("nmse: zero reference");
  return num / den;
}

namespace detail {

inline unsigned gray_encode(unsigned b) { return b ^ (b >> 1); }

inline unsigned gray_decode(unsigned g) {
  unsigned b = 0;
  for (; g; g >>= 1) b ^= g;
  return b;
}

inline Index qam_side(Index order) {
  Index side = 1;
  while (side * side < order) ++side;
  if (side * side != order || order < 4)
    throw std::invalid_argument("qam: order must be a square (4, 16, 64, 256)");
  return side;
}

}  // namespace detail

inline Index qam_bits_per_symbol(Index order) {
  const Index side = detail::qam_side(order);
  Index bits = 0;
  while ((Index{1} << bits) < side) ++bits;
  if ((Index{1} << bits) != side)
    throw std::invalid_argument("qam: order must be a power of four");
  return 2 * bits;
}

/// Gray-coded square QAM with unit average symbol energy. Within one symbol
/// the first half of the bits drives the in-phase axis, the second half the
/// quadrature axis, each through a binary-reflected Gray map.
inline VecC qam_modulate(const std::vector<std::uint8_t>& bits, Index order) {
  const Index side = detail::qam_side(order);
  const Index half = qam_bits_per_symbol(order) / 2;
  if (static_cast<Index>(bits.size()) % (2 * half) != 0)
    throw std::invalid_argument("qam_modulate: bit count not a multiple of bits/symbol");
  const double d = std::sqrt(3.0 / (2.0 * static_cast<double>(order - 1)));
  const auto axis = [&](std::size_t base) {
    unsigned g = 0;
    for (Index b = 0; b < half; ++b) g = (g << 1) | bits[base + static_cast<std::size_t>(b)];
    const unsigned level = detail::gray_decode(g);
    return d * (2.0 * static_cast<double>(level) - static_cast<double>(side - 1));
  };
  VecC out(static_cast<Index>(bits.size()) / (2 * half));
  for (Index s = 0; s < out.size(); ++s) {
    const std::size_t base = static_cast<std::size_t>(s * 2 * half);
    out(s) = cdouble{axis(base), axis(base + static_cast<std::size_t>(half))};
  }
  return out;
}

inline std::vector<std::uint8_t> qam_demodulate(const VecC& symbols, Index order) {
  const Index side = detail::qam_side(order);
  const Index half = qam_bits_per_symbol(order) / 2;
  const double d = std::sqrt(3.0 / (2.0 * static_cast<double>(order - 1)));
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(symbols.size() * 2 * half));
  const auto slice = [&](double x) {
    const double k = std::round((x / d + static_cast<double>(side - 1)) / 2.0);
    const long level = std::clamp(static_cast<long>(k), 0L, static_cast<long>(side - 1));
    return detail::gray_encode(static_cast<unsigned>(level));
  };
  for (Index s = 0; s < symbols.size(); ++s) {
    for (const double x : {symbols(s).real(), symbols(s).imag()}) {
      const unsigned g = slice(x);
      for (Index b = half - 1; b >= 0; --b)
        bits.push_back(static_cast<std::uint8_t>((g >> b) & 1u));
    }
  }
  return bits;
}

struct LmmseResult {
  VecC x_hat;
  VecR sinr;  // post-detection SINR per stream, unit-energy symbols
};

/// LMMSE detection through the normal equations: x_hat = (H^H H + sigma2 I)^-1
/// H^H y. The error variances e_k come from the same factorization and give
/// SINR_k = 1/e_k - 1.
inline LmmseResult lmmse_detect(const MatC& h, const VecC& y, double sigma2) {
  if (h.rows() != y.size()) throw std::invalid_argument("lmmse_detect: shape mismatch");
  MatC gram = h.adjoint() * h;
  gram.diagonal().array() += sigma2;
  const Eigen::LDLT<MatC> fac(gram);
  LmmseResult out;
  out.x_hat = fac.solve(h.adjoint() * y);
  const MatC err = sigma2 * fac.solve(MatC::Identity(h.cols(), h.cols()));
  out.sinr.resize(h.cols());
  for (Index k = 0; k < h.cols(); ++k) {
    const double e = std::max(err(k, k).real(), 1e-300);
    out.sinr(k) = 1.0 / e - 1.0;
  }
  return out;
}

inline double bit_error_rate(const std::vector<std::uint8_t>& tx,
                             const std::vector<std::uint8_t>& rx) {
  if (tx.size() != rx.size() || tx.empty())
    throw std::invalid_argument("bit_error_rate: size mismatch");
  std::size_t bad = 0;
  for (std::size_t i = 0; i < tx.size(); ++i) bad += (tx[i] != rx[i]) ? 1u : 0u;
  return static_cast<double>(bad) / static_cast<double>(tx.size());
}

/// Fraction of the frame grid spent on pilot and guards, the overhead factor
/// of the spectral efficiency.
inline double pilot_overhead(const SystemConfig& cfg) {
  return 2.0 * static_cast<double>(cfg.N) * static_cast<double>(cfg.M_guard) /
         (static_cast<double>(cfg.N_frame) * static_cast<double>(cfg.M));
}

inline double spectral_efficiency(double sinr, double overhead) {
  return (1.0 - overhead) * std::log2(1.0 + std::max(sinr, 0.0));
}

inline double spectral_efficiency(const VecR& sinr, double overhead) {
  if (sinr.size() == 0) return 0.0;
  double acc = 0.0;
  for (Index k = 0; k < sinr.size(); ++k) acc += std::log2(1.0 + std::max(sinr(k), 0.0));
  return (1.0 - overhead) * acc / static_cast<double>(sinr.size());
}

}  // namespace afdmtt
