// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "afdmtt/pilot.hpp"

namespace afdmtt {

/// Signatures of the pilot observation: column i is the vectorized (antenna
/// fastest, window row slowest) rank-1 response of path i to the pilot, and
/// the derivative block stacks d/dtheta, d/dnu, d/deta columns type-major.
/// Parameter ordering everywhere in this header: [theta_1..theta_P,
/// nu_1..nu_P, eta_1..eta_P].
struct SignatureSet {
  MatC phi;   // L x P, L = N_BS * N * M_region
  MatC dphi;  // L x 3P
};

inline SignatureSet signatures(const PathSet& paths, const SystemConfig& cfg) {
  const Index p = static_cast<Index>(paths.size());
  const Index nb = cfg.N_BS, nn = cfg.N, nm = cfg.M_region;
  const Index big = nb * nn * nm;
  const Index off = cfg.window_offset();
  SignatureSet s;
  s.phi.resize(big, p);
  s.dphi.resize(big, 3 * p);
  for (Index i = 0; i < p; ++i) {
    const PathParams& path = paths[static_cast<std::size_t>(i)];
    const VecC a = steering_vector(path.theta, nb, cfg.antenna_spacing);
    VecC da(nb);
    const double dstep = -2.0 * pi * cfg.antenna_spacing * std::sin(path.theta);
    for (Index k = 0; k < nb; ++k) da(k) = a(k) * (j1c * dstep * static_cast<double>(k));
    VecC b(nn), db(nn);
    for (Index n = 0; n < nn; ++n) {
      b(n) = cis(2.0 * pi * path.nu * static_cast<double>(n) * cfg.T_sym());
      db(n) = b(n) * (j1c * 2.0 * pi * static_cast<double>(n) * cfg.T_sym());
    }
    VecC c(nm), dc_nu(nm), dc_eta(nm);
    for (Index m = 0; m < nm; ++m) {
      c(m) = h_entry(off + m, cfg.m_pilot, path, cfg) * cfg.pilot_value();
      dc_nu(m) = h_entry_dnu(off + m, cfg.m_pilot, path, cfg) * cfg.pilot_value();
      dc_eta(m) = h_entry_deta(off + m, cfg.m_pilot, path, cfg) * cfg.pilot_value();
    }
    for (Index m = 0; m < nm; ++m)
      for (Index n = 0; n < nn; ++n)
        for (Index k = 0; k < nb; ++k) {
          const Index row = k + nb * (n + nn * m);
          s.phi(row, i) = c(m) * b(n) * a(k);
          s.dphi(row, i) = c(m) * b(n) * da(k);
          s.dphi(row, p + i) = dc_nu(m) * b(n) * a(k) + c(m) * db(n) * a(k);
          s.dphi(row, 2 * p + i) = dc_eta(m) * b(n) * a(k);
        }
  }
  return s;
}

/// Per-entry noise variance that the simulator would add to this scene's
/// pilot tensor at the given SNR (noise is calibrated to the mean received
/// pilot power per tensor entry).
inline double noise_variance_for(const PathSet& paths, const SystemConfig& cfg,
                                 double snr_db) {
  const SignatureSet s = signatures(paths, cfg);
  VecC g(static_cast<Index>(paths.size()));
  for (Index i = 0; i < g.size(); ++i)
    g(i) = paths[static_cast<std::size_t>(i)].alpha_tilde(cfg);
  const VecC y = s.phi * g;
  const double p_sig = y.squaredNorm() / static_cast<double>(y.size());
  return p_sig * std::pow(10.0, -snr_db / 10.0);
}

/// Dense observation covariance Phi diag(gain_var) Phi^H + sigma2 I. Only for
/// small validation scenes; the production paths below never form it.
inline MatC covariance_dense(const SignatureSet& s, const VecR& gain_var, double sigma2) {
  if (gain_var.size() != s.phi.cols())
    throw std::invalid_argument("covariance_dense: gain variance count mismatch");
  MatC r = s.phi * gain_var.asDiagonal().toDenseMatrix().cast<cdouble>() * s.phi.adjoint();
  r.diagonal().array() += sigma2;
  return r;
}

namespace detail {

/// Solve R X = B for R = Phi G Phi^H + sigma2 I without forming R, via the
/// matrix inversion lemma. G must have strictly positive entries.
inline MatC lowrank_solve(const MatC& phi, const VecR& gain_var, double sigma2,
                          const MatC& b) {
  const Index p = phi.cols();
  MatC k = phi.adjoint() * phi;
  for (Index i = 0; i < p; ++i) {
    if (!(gain_var(i) > 0.0))
      throw std::invalid_argument("lowrank_solve: gain variances must be positive");
    k(i, i) += sigma2 / gain_var(i);
  }
  const MatC pb = phi.adjoint() * b;
  return (b - phi * k.ldlt().solve(pb)) / sigma2;
}

}  // namespace detail

/// Fisher information of the path parameters under the stochastic-gain model:
/// observation zero-mean circular Gaussian with covariance R(xi), so
/// J_ab = tr(R^-1 dR_a R^-1 dR_b) with rank-two covariance derivatives. The
/// 3P x 3P result uses the type-major ordering of SignatureSet.
inline MatR fisher_matrix(const SignatureSet& s, const VecR& gain_var, double sigma2) {
  const Index p = s.phi.cols();
  if (s.dphi.cols() != 3 * p || gain_var.size() != p)
    throw std::invalid_argument("fisher_matrix: inconsistent signature set");
  const MatC rp = detail::lowrank_solve(s.phi, gain_var, sigma2, s.phi);
  const MatC rd = detail::lowrank_solve(s.phi, gain_var, sigma2, s.dphi);
  const MatC gpp = s.phi.adjoint() * rp;   // P x P
  const MatC gpd = s.phi.adjoint() * rd;   // P x 3P
  const MatC gdd = s.dphi.adjoint() * rd;  // 3P x 3P
  MatR j(3 * p, 3 * p);
  for (Index a = 0; a < 3 * p; ++a) {
    const Index ia = a % p;
    for (Index b = a; b < 3 * p; ++b) {
      const Index ib = b % p;
      const cdouble t = gpd(ia, b) * gpd(ib, a) + gpp(ia, ib) * gdd(b, a);
      const double val = gain_var(ia) * gain_var(ib) * 2.0 * t.real();
      j(a, b) = val;
      j(b, a) = val;
    }
  }
  return j;
}

/// Average CRB per parameter type: mean over paths of the matching diagonal
/// entries of J^-1. Returns (theta, nu, eta).
inline VecR crb_from_fisher(const MatR& fisher, Index p) {
  if (fisher.rows() != 3 * p) throw std::invalid_argument("crb_from_fisher: size mismatch");
  const MatR inv = fisher.ldlt().solve(MatR::Identity(3 * p, 3 * p));
  VecR out(3);
  for (Index t = 0; t < 3; ++t) {
    double acc = 0.0;
    for (Index i = 0; i < p; ++i) acc += inv(t * p + i, t * p + i);
    out(t) = acc / static_cast<double>(p);
  }
  return out;
}

/// Post-integration SNR of each path: gain variance times signature energy
/// over the noise variance.
inline VecR path_snr(const SignatureSet& s, const VecR& gain_var, double sigma2) {
  VecR x(s.phi.cols());
  for (Index i = 0; i < x.size(); ++i)
    x(i) = gain_var(i) * s.phi.col(i).squaredNorm() / sigma2;
  return x;
}

/// Probability that noncoherent detection picks a fully ambiguous (signature-
/// orthogonal) hypothesis over the true one, saddlepoint-approximated at the
/// symmetric tilt: exp(psi) * Q(sqrt(sum (2x/(2+x))^2 / 2)).
inline double p_na(const VecR& x) {
  double psi = 0.0, curv = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    psi += std::log(4.0 * (1.0 + xi) / ((2.0 + xi) * (2.0 + xi)));
    const double t = 2.0 * xi / (2.0 + xi);
    psi += t * t / 4.0;
    curv += t * t;
  }
  return std::exp(psi) * q_func(std::sqrt(0.5 * curv));
}

struct ZzbResult {
  VecR bound;  // (theta, nu, eta) mean-square bounds
  VecR crb;    // matching CRB values
  double ambiguity = 0.0;  // the P_NA factor
};

/// Ziv-Zakai bound per parameter type over uniform priors: ambiguity plateau
/// plus the CRB-governed local term gated by a chi-square (3 dof) valley
/// threshold. Prior widths come from the sampling ranges.
inline ZzbResult zzb(const PathSet& paths, const SystemConfig& cfg, const VecR& gain_var,
                     double sigma2, const PathRanges& ranges) {
  const Index p = static_cast<Index>(paths.size());
  const SignatureSet s = signatures(paths, cfg);
  const VecR x = path_snr(s, gain_var, sigma2);
  const double pna = p_na(x);
  const VecR crb = crb_from_fisher(fisher_matrix(s, gain_var, sigma2), p);

  double curv = 0.0;
  for (Index i = 0; i < p; ++i) {
    const double t = 2.0 * x(i) / (2.0 + x(i));
    curv += t * t;
  }
  VecR zeta(3);
  zeta(0) = ranges.theta_max - ranges.theta_min;
  zeta(1) = 2.0 * ranges.nu_abs_max;
  zeta(2) = ranges.eta_max;

  ZzbResult out;
  out.bound.resize(3);
  out.crb = crb;
  out.ambiguity = pna;
  const double kd = static_cast<double>(p);  // prior-volume dimension per type
  for (Index t = 0; t < 3; ++t) {
    const double plateau = pna * zeta(t) * zeta(t) / ((kd + 1.0) * (kd + 2.0));
    const double h2 = std::min(2.0 * crb(t) * curv, kd * zeta(t) * zeta(t));
    const double local = crb(t) * reg_lower_gamma_3_2(h2 / (8.0 * crb(t)));
    out.bound(t) = plateau + local;
  }
  return out;
}

/// Chernoff cumulant generating function of the log-likelihood ratio between
/// two zero-mean circular Gaussians: mu(s) = -log det((1-s) R0^-1 + s R1^-1)
/// - (1-s) log det R0 - s log det R1. Zero at s = 0 and s = 1 by construction.
inline double cgf_mu(const MatC& r0, const MatC& r1, double s) {
  const auto logdet = [](const MatC& m) {
    const Eigen::LLT<MatC> ch(m);
    if (ch.info() != Eigen::Success)
      throw std::runtime_error("cgf_mu: covariance is not positive definite");
    return 2.0 * ch.matrixLLT().diagonal().array().abs().log().sum();
  };
  const MatC i0 = r0.llt().solve(MatC::Identity(r0.rows(), r0.cols()));
  const MatC i1 = r1.llt().solve(MatC::Identity(r1.rows(), r1.cols()));
  const MatC mix = (1.0 - s) * i0 + s * i1;
  return -logdet(mix) - (1.0 - s) * logdet(r0) - s * logdet(r1);
}

/// Second derivative of the CGF: with C(s) = (1-s) R0^-1 + s R1^-1 and
/// Delta = R1^-1 - R0^-1, mu''(s) = tr((C^-1 Delta)^2).
inline double cgf_mu_dd(const MatC& r0, const MatC& r1, double s) {
  const MatC i0 = r0.llt().solve(MatC::Identity(r0.rows(), r0.cols()));
  const MatC i1 = r1.llt().solve(MatC::Identity(r1.rows(), r1.cols()));
  const MatC delta = i1 - i0;
  const MatC mix = (1.0 - s) * i0 + s * i1;
  const MatC t = mix.ldlt().solve(delta);
  return (t * t).trace().real();
}

}  // namespace afdmtt
