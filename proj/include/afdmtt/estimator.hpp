// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "afdmtt/pilot.hpp"

namespace afdmtt {

struct EstimationDiagnostics {
  double residual = 0.0;       // relative Frobenius misfit of the denoised tensor
  int iterations = 0;          // structurally zero for the direct estimator
  Index rank_suggestion = 0;   // largest-gap read of the first unfolding spectrum
  std::vector<std::string> warnings;
};

struct EstimationResult {
  VecR theta;   // AoA per path, radians
  VecR nu;      // Doppler per path, Hz
  VecR eta;     // delay per path, fractional taps
  VecC gains;   // effective complex gains (alpha_tilde)
  std::vector<Index> main_rows;  // window row of each path's main lobe
  EstimationDiagnostics diagnostics;
};

struct EspritResult {
  VecC generators;  // unit-modulus, one per path
  MatC mixing;      // eigenvector matrix (the change of basis of the head factor)
};

/// Shift-invariance (ESPRIT) read of the orthonormal head factor: the
/// eigenvalues of pinv(G1 minus last row) * (G1 minus first row) are the
/// Vandermonde generators of the steering matrix in an arbitrary but
/// deterministic order. Generators are projected onto the unit circle.
inline EspritResult esprit_generators(const MatC& g1) {
  const Index rows = g1.rows(), p = g1.cols();
  if (rows < p + 1)
    throw std::invalid_argument("esprit_generators: need at least P+1 rows");
  const MatC under = g1.topRows(rows - 1);
  const MatC over = g1.bottomRows(rows - 1);
  const SvdResult f = svd_econ(under);
  if (f.s(f.s.size() - 1) <= 1e-10 * f.s(0))
    throw std::runtime_error("esprit_generators: head factor is rank deficient");
  const EvdResult e = evd(pinv(under) * over);
  EspritResult out;
  out.generators.resize(p);
  for (Index r = 0; r < p; ++r) {
    const double mag = std::abs(e.values(r));
    if (mag == 0.0) throw std::runtime_error("esprit_generators: zero eigenvalue");
    out.generators(r) = e.values(r) / mag;
  }
  for (Index a = 0; a < p; ++a)
    for (Index b = a + 1; b < p; ++b)
      if (std::abs(out.generators(a) - out.generators(b)) < 1e-8)
        throw std::runtime_error("esprit_generators: coinciding generators, paths not identifiable");
  out.mixing = e.vectors;
  return out;
}

/// Vandermonde matrix with the given unit-circle generators, first row all ones.
inline MatC vandermonde(const VecC& z, Index rows) {
  MatC v(rows, z.size());
  for (Index c = 0; c < z.size(); ++c) {
    v(0, c) = 1.0;
    for (Index r = 1; r < rows; ++r) v(r, c) = v(r - 1, c) * z(c);
  }
  return v;
}

namespace detail {

/// Principal-value lag-1 phase of a column, the common generator readout.
inline double lag1_phase(const VecC& col) {
  cdouble acc{0.0, 0.0};
  for (Index n = 0; n + 1 < col.size(); ++n) acc += std::conj(col(n)) * col(n + 1);
  return std::arg(acc);
}

}  // namespace detail

/// AoA from a unit-modulus generator: theta = acos(arg(z) / (2 pi spacing)).
/// Arguments outside [-1, 1] are clipped with a warning.
inline double aoa_from_generator(cdouble z, double spacing,
                                 std::vector<std::string>* warnings) {
  double c = std::arg(z) / (2.0 * pi * spacing);
  if (c < -1.0 || c > 1.0) {
    if (warnings) warnings->push_back("aoa readout clipped to the visible region");
    c = std::clamp(c, -1.0, 1.0);
  }
  return std::acos(c);
}

/// Doppler from the lag-1 self-correlation of a temporal column.
inline double doppler_from_column(const VecC& col, double t_sym) {
  if (col.size() < 2) throw std::invalid_argument("doppler readout needs N >= 2");
  return detail::lag1_phase(col) / (2.0 * pi * t_sym);
}

/// Fractional delay from one windowed response column: locate the main lobe,
/// take the linear two-lobe magnitude ratio as the fractional offset, and
/// invert the localization map at the already-estimated Doppler.
inline double delay_from_response(const VecC& col, double nu_hat, const SystemConfig& cfg,
                                  std::vector<std::string>* warnings, Index* main_row_out) {
  const Index rows = col.size();
  Index m_r = 0;
  col.cwiseAbs().maxCoeff(&m_r);
  const double main_mag = std::abs(col(m_r));
  if (main_mag == 0.0) throw std::runtime_error("delay readout: all-zero response column");

  double frac = 0.0;
  const double left = (m_r > 0) ? std::abs(col(m_r - 1)) : -1.0;
  const double right = (m_r + 1 < rows) ? std::abs(col(m_r + 1)) : -1.0;
  if (m_r == 0 || m_r + 1 == rows) {
    if (warnings) warnings->push_back("delay readout: main lobe at window edge");
    const double side = std::max(left, right);
    const double sign = (m_r == 0) ? 1.0 : -1.0;  // lean toward the interior
    if (side > 1e-9 * main_mag) frac = sign * side / (main_mag + side);
  } else if (std::max(left, right) > 1e-9 * main_mag) {
    const double sign = (right >= left) ? 1.0 : -1.0;
    const double side = std::max(left, right);
    frac = sign * side / (main_mag + side);
  }
  if (main_row_out) *main_row_out = m_r;
  // absolute main-lobe bin is row_offset + m_r; with m_pilot - row_offset =
  // M_region - 1 the localization inversion reads:
  const double num = static_cast<double>(cfg.M_region - 1 - m_r) + nu_hat * cfg.T() - frac;
  return num / (2.0 * static_cast<double>(cfg.M) * cfg.c1);
}

/// Per-path complex gains from a denoised observation tensor: strip the
/// spatial and temporal factors rebuilt at the estimated parameters by a
/// mode-3 least squares, then divide each main-lobe entry by the model kernel
/// value at the estimated delay/Doppler (and the transmitted pilot value).
inline VecC gains_from_denoised(const ComplexTensor3& z, const VecR& theta_hat,
                                const VecR& nu_hat, const VecR& eta_hat,
                                const std::vector<Index>& main_rows,
                                const SystemConfig& cfg) {
  const Index p = theta_hat.size();
  VecC gen(p);
  for (Index r = 0; r < p; ++r)
    gen(r) = cis(2.0 * pi * cfg.antenna_spacing * std::cos(theta_hat(r)));
  const MatC a1 = vandermonde(gen, cfg.N_BS);
  VecC genb(p);
  for (Index r = 0; r < p; ++r) genb(r) = cis(2.0 * pi * nu_hat(r) * cfg.T_sym());
  const MatC a2 = vandermonde(genb, cfg.N);

  const MatC a3s = mode_unfold(z, 3) * pinv(khatri_rao(a2, a1)).transpose();
  VecC gains(p);
  const Index off = cfg.window_offset();
  for (Index r = 0; r < p; ++r) {
    PathParams est;
    est.nu = nu_hat(r);
    est.eta = eta_hat(r);
    const cdouble model =
        h_entry(off + main_rows[static_cast<std::size_t>(r)], cfg.m_pilot, est, cfg) *
        cfg.pilot_value();
    if (std::abs(model) == 0.0)
      throw std::runtime_error("gain readout: vanishing model kernel");
    gains(r) = a3s(main_rows[static_cast<std::size_t>(r)], r) / model;
  }
  return gains;
}

/// Direct tensor-train estimator: one TT factorization, one shift-invariance
/// eigenread on the head, a per-path rank-1 split of the coupled core, and
/// closed-form parameter readouts. No iterations anywhere.
inline EstimationResult estimate(const PilotObservation& obs, const SystemConfig& cfg) {
  const Index p = cfg.P;
  const auto dims = obs.y.dims();
  if (dims[0] != cfg.N_BS || dims[1] != cfg.N || dims[2] != cfg.M_region)
    throw std::invalid_argument("estimate: observation shape disagrees with config");
  if (cfg.N_BS < p + 1) throw std::invalid_argument("estimate: need N_BS >= P+1");
  if (cfg.N < 2 || cfg.N < p) throw std::invalid_argument("estimate: need N >= max(2, P)");
  if (cfg.M_region < p) throw std::invalid_argument("estimate: need M_region >= P");

  EstimationResult res;
  const SvdResult spectrum = svd_econ(mode_unfold(obs.y, 1));
  res.diagnostics.rank_suggestion = rank_from_gap(spectrum.s);

  const TTCores tt = tt_svd(obs.y, p);
  const EspritResult es = esprit_generators(tt.head);

  res.theta.resize(p);
  for (Index r = 0; r < p; ++r)
    res.theta(r) = aoa_from_generator(es.generators(r), cfg.antenna_spacing,
                                      &res.diagnostics.warnings);
  const MatC a1_hat = vandermonde(es.generators, cfg.N_BS);

  // Couple the head back onto the core; each row of the result folds into a
  // rank-1 (temporal) x (basis-change) matrix for one path.
  const MatC t2 = pinv(a1_hat) * (tt.head * mode_unfold(tt.core, 1));
  MatC a2_hat(cfg.N, p);
  MatC m2_invt(p, p);
  for (Index r = 0; r < p; ++r) {
    MatC slab(cfg.N, p);
    for (Index r2 = 0; r2 < p; ++r2)
      for (Index n = 0; n < cfg.N; ++n) slab(n, r2) = t2(r, n + cfg.N * r2);
    const Rank1Result rk = best_rank1(slab);
    VecC u = rk.u;
    for (Index n = 0; n < cfg.N; ++n) {
      const double mag = std::abs(u(n));
      if (mag > 0.0) u(n) /= mag;  // magnitude noise belongs to the basis change
    }
    a2_hat.col(r) = u;
    m2_invt.col(r) = rk.v;
  }
  const MatC a3_hat = tt.tail.transpose() * m2_invt;

  res.nu.resize(p);
  for (Index r = 0; r < p; ++r) res.nu(r) = doppler_from_column(a2_hat.col(r), cfg.T_sym());
  res.eta.resize(p);
  res.main_rows.assign(static_cast<std::size_t>(p), 0);
  for (Index r = 0; r < p; ++r)
    res.eta(r) = delay_from_response(a3_hat.col(r), res.nu(r), cfg,
                                     &res.diagnostics.warnings, &res.main_rows[static_cast<std::size_t>(r)]);

  const ComplexTensor3 denoised = tt_contract(tt);
  res.gains = gains_from_denoised(denoised, res.theta, res.nu, res.eta, res.main_rows, cfg);

  double diff = 0.0;
  for (Index i = 0; i < obs.y.size(); ++i)
    diff += std::norm(denoised.data()[i] - obs.y.data()[i]);
  const double ref = obs.y.frobenius_norm();
  res.diagnostics.residual = ref > 0.0 ? std::sqrt(diff) / ref : 0.0;
  res.diagnostics.iterations = 0;
  return res;
}

/// Estimated path set in channel terms; inverse of the alpha_tilde mapping so
/// that rebuilt channels carry the estimated effective gains exactly.
inline PathSet paths_from_estimate(const EstimationResult& res, const SystemConfig& cfg) {
  PathSet out(static_cast<std::size_t>(res.theta.size()));
  for (Index r = 0; r < res.theta.size(); ++r) {
    PathParams& p = out[static_cast<std::size_t>(r)];
    p.theta = res.theta(r);
    p.nu = res.nu(r);
    p.eta = res.eta(r);
    p.alpha = res.gains(r) * cis(-2.0 * pi * p.nu * (cfg.T_cpp() - p.tau(cfg)));
  }
  return out;
}

inline ComplexTensor3 reconstruct_channel(const EstimationResult& res,
                                          const SystemConfig& cfg, Index n_symbols) {
  return build_staf_channel(paths_from_estimate(res, cfg), cfg, n_symbols);
}

struct CpAlsOptions {
  int max_iter = 200;
  double tol = 1e-8;
  std::uint64_t seed = 0x5eed;
};

struct CpdResult {
  MatC a1, a2, a3;
  VecR lambda;
  int iterations = 0;
  double fit = 0.0;  // 1 - relative misfit
};

/// Classical alternating-least-squares CP decomposition, the baseline the
/// direct estimator is benchmarked against. Random Gaussian init, Hadamard
/// gram inverses, per-sweep fit check.
inline CpdResult cp_als(const ComplexTensor3& t, Index rank, const CpAlsOptions& opt = {}) {
  const auto d = t.dims();
  if (rank < 1) throw std::invalid_argument("cp_als: rank must be positive");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto randm = [&](Index r, Index c) {
    MatC m(r, c);
    for (Index jj = 0; jj < c; ++jj)
      for (Index i = 0; i < r; ++i) m(i, jj) = cdouble{g(rng), g(rng)};
    return m;
  };
  CpdResult res;
  res.a1 = randm(d[0], rank);
  res.a2 = randm(d[1], rank);
  res.a3 = randm(d[2], rank);
  res.lambda = VecR::Ones(rank);

  const MatC y1 = mode_unfold(t, 1), y2 = mode_unfold(t, 2), y3 = mode_unfold(t, 3);
  const double ynorm = t.frobenius_norm();
  if (ynorm == 0.0) throw std::invalid_argument("cp_als: zero tensor");

  const auto solve_mode = [&](const MatC& unfold, const MatC& fa, const MatC& fb) -> MatC {
    // rows of unfold indexed by this mode; columns follow kron(fa, fb)
    const MatC kr = khatri_rao(fa, fb);
    const MatC gram = (fa.adjoint() * fa).cwiseProduct(fb.adjoint() * fb);
    return unfold * kr.conjugate() * pinv(gram).transpose();
  };
  const auto renorm = [&](MatC& f) {
    for (Index r = 0; r < rank; ++r) {
      const double n = f.col(r).norm();
      res.lambda(r) = n;
      if (n > 0.0) f.col(r) /= n;
    }
  };

  double prev_fit = -1.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    res.a1 = solve_mode(y1, res.a3, res.a2);
    renorm(res.a1);
    res.a2 = solve_mode(y2, res.a3, res.a1);
    renorm(res.a2);
    res.a3 = solve_mode(y3, res.a2, res.a1);
    renorm(res.a3);

    VecC w(rank);
    for (Index r = 0; r < rank; ++r) w(r) = res.lambda(r);
    const ComplexTensor3 model = cpd_construct(w, res.a1, res.a2, res.a3);
    double diff = 0.0;
    for (Index i = 0; i < t.size(); ++i) diff += std::norm(model.data()[i] - t.data()[i]);
    res.fit = 1.0 - std::sqrt(diff) / ynorm;
    res.iterations = it;
    if (prev_fit >= 0.0 && std::abs(res.fit - prev_fit) < opt.tol) break;
    prev_fit = res.fit;
  }
  return res;
}

/// Same parameter readouts as the direct estimator, driven by CP-ALS factors.
inline EstimationResult cp_als_estimate(const PilotObservation& obs, const SystemConfig& cfg,
                                        const CpAlsOptions& opt = {}) {
  const Index p = cfg.P;
  const CpdResult cp = cp_als(obs.y, p, opt);
  EstimationResult res;
  res.diagnostics.iterations = cp.iterations;
  res.diagnostics.residual = 1.0 - cp.fit;

  res.theta.resize(p);
  res.nu.resize(p);
  res.eta.resize(p);
  res.main_rows.assign(static_cast<std::size_t>(p), 0);
  for (Index r = 0; r < p; ++r) {
    const cdouble z = cis(detail::lag1_phase(cp.a1.col(r)));
    res.theta(r) = aoa_from_generator(z, cfg.antenna_spacing, &res.diagnostics.warnings);
    res.nu(r) = doppler_from_column(cp.a2.col(r), cfg.T_sym());
  }
  for (Index r = 0; r < p; ++r)
    res.eta(r) = delay_from_response(cp.a3.col(r), res.nu(r), cfg,
                                     &res.diagnostics.warnings, &res.main_rows[static_cast<std::size_t>(r)]);
  VecC w(p);
  for (Index r = 0; r < p; ++r) w(r) = cp.lambda(r);
  const ComplexTensor3 denoised = cpd_construct(w, cp.a1, cp.a2, cp.a3);
  res.gains = gains_from_denoised(denoised, res.theta, res.nu, res.eta, res.main_rows, cfg);
  return res;
}

}  // namespace afdmtt
