// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <vector>

#include "afdmtt/tensor.hpp"
#include "afdmtt/waveform.hpp"

namespace afdmtt {

/// One propagation path. Delay is kept in fractional taps (eta = l + iota with
/// iota in (-1/2, 1/2]); Doppler in Hz; AoA in radians off the array axis.
struct PathParams {
  double theta = pi / 2;
  double nu = 0.0;
  double eta = 0.0;
  cdouble alpha = {1.0, 0.0};

  double tau(const SystemConfig& cfg) const { return eta * cfg.T_s(); }

  /// Joint delay-Doppler localization in affine-frequency taps.
  double loc(const SystemConfig& cfg) const {
    return nu * cfg.T() - 2.0 * static_cast<double>(cfg.M) * cfg.c1 * eta;
  }

  /// Effective gain after the prefix removal re-references the path phase:
  /// alpha * e^{j 2 pi nu (T_cpp - tau)}.
  cdouble alpha_tilde(const SystemConfig& cfg) const {
    return alpha * cis(2.0 * pi * nu * (cfg.T_cpp() - tau(cfg)));
  }
};

using PathSet = std::vector<PathParams>;

/// Sampling ranges for random path draws; priors for the bounds reuse these.
struct PathRanges {
  double theta_min = pi / 6;
  double theta_max = 5 * pi / 6;
  double nu_abs_max = 0.0;
  double eta_max = 0.0;

  static PathRanges from_config(const SystemConfig& cfg) {
    PathRanges r;
    r.nu_abs_max = cfg.nu_max;
    r.eta_max = static_cast<double>(cfg.M_CPP - 1);
    return r;
  }
};

/// Uniform path draws with a resolvability guard: any two paths must sit at
/// least one affine-frequency tap apart in loc. Gains have unit magnitude and
/// uniform phase.
inline PathSet sample_paths(const SystemConfig& cfg, const PathRanges& ranges,
                            std::mt19937_64& rng, int max_retries = 1000) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    PathSet paths(static_cast<std::size_t>(cfg.P));
    for (auto& p : paths) {
      p.theta = ranges.theta_min + (ranges.theta_max - ranges.theta_min) * u01(rng);
      p.nu = ranges.nu_abs_max * (2.0 * u01(rng) - 1.0);
      p.eta = ranges.eta_max * u01(rng);
      p.alpha = cis(2.0 * pi * u01(rng));
    }
    bool ok = true;
    for (std::size_t a = 0; a < paths.size() && ok; ++a)
      for (std::size_t b = a + 1; b < paths.size() && ok; ++b)
        if (std::abs(paths[a].loc(cfg) - paths[b].loc(cfg)) < 1.0) ok = false;
    if (ok) return paths;
  }
  throw std::runtime_error("sample_paths: could not satisfy the resolvability guard");
}

/// ULA steering vector, entries e^{j 2 pi spacing k cos(theta)}, k = 0..N_BS-1.
inline VecC steering_vector(double theta, Index n_bs, double spacing) {
  if (n_bs < 1) throw std::invalid_argument("steering_vector: need at least one antenna");
  VecC a(n_bs);
  const double step = 2.0 * pi * spacing * std::cos(theta);
  for (Index k = 0; k < n_bs; ++k) a(k) = cis(step * static_cast<double>(k));
  return a;
}

namespace detail {

/// Periodic Dirichlet kernel D(u) = e^{-j pi u (1-1/M)} sin(pi u)/(M sin(pi u/M))
/// and its derivative, evaluated stably across the removable singularities at
/// u = 0 (mod M) where |D| = 1.
struct Dirichlet {
  cdouble value;
  cdouble deriv;
};

inline Dirichlet dirichlet(double u, Index m_size) {
  const double m_d = static_cast<double>(m_size);
  const double q = std::nearbyint(u / m_d);
  const double w = u - q * m_d;
  // sin(pi u) = parity_m * sin(pi w), sin(pi u / M) = parity_q * sin(pi w / M)
  const long long qi = static_cast<long long>(q);
  const bool flip = ((qi % 2 != 0) && (m_size % 2 == 0));  // parity of q*(M-1)
  const double par = flip ? -1.0 : 1.0;

  double s, ds;  // sin-ratio and its derivative in w
  if (std::abs(w) < 1e-5) {
    const double a = pi * w;
    const double f = (1.0 - 1.0 / (m_d * m_d)) / 6.0;
    s = 1.0 - a * a * f;
    ds = -2.0 * pi * a * f;
  } else {
    const double sn = std::sin(pi * w), sd = m_d * std::sin(pi * w / m_d);
    const double cn = pi * std::cos(pi * w), cd = pi * std::cos(pi * w / m_d);
    s = sn / sd;
    ds = (cn * sd - sn * cd) / (sd * sd);
  }
  const cdouble ph = cis(-pi * u * (1.0 - 1.0 / m_d));
  const cdouble dph = -j1c * pi * (1.0 - 1.0 / m_d);
  return {par * ph * s, par * ph * (dph * s + ds)};
}

}  // namespace detail

/// Input-output kernel of the sampled chirp transform for one path: the
/// quadratic-phase factor times the Dirichlet spreading function at
/// u = m - m' - loc. Unit path gain; the caller applies alpha_tilde.
inline cdouble h_entry(Index m, Index m_prime, const PathParams& path,
                       const SystemConfig& cfg) {
  const double m_d = static_cast<double>(cfg.M);
  const double eta = path.eta;
  const double phase =
      (2.0 * pi / m_d) *
      (m_d * cfg.c1 * eta * eta - static_cast<double>(m_prime) * eta +
       m_d * cfg.c2 * (static_cast<double>(m_prime) * static_cast<double>(m_prime) -
                       static_cast<double>(m) * static_cast<double>(m)));
  const double u = static_cast<double>(m - m_prime) - path.loc(cfg);
  return cis(phase) * detail::dirichlet(u, cfg.M).value;
}

/// d h_entry / d nu and / d eta, needed by the Fisher information. The kernel
/// depends on nu only through loc; eta also enters the quadratic phase.
inline cdouble h_entry_dnu(Index m, Index m_prime, const PathParams& path,
                           const SystemConfig& cfg) {
  const double m_d = static_cast<double>(cfg.M);
  const double eta = path.eta;
  const double phase =
      (2.0 * pi / m_d) *
      (m_d * cfg.c1 * eta * eta - static_cast<double>(m_prime) * eta +
       m_d * cfg.c2 * (static_cast<double>(m_prime) * static_cast<double>(m_prime) -
                       static_cast<double>(m) * static_cast<double>(m)));
  const double u = static_cast<double>(m - m_prime) - path.loc(cfg);
  // du/dnu = -T
  return cis(phase) * detail::dirichlet(u, cfg.M).deriv * (-cfg.T());
}

inline cdouble h_entry_deta(Index m, Index m_prime, const PathParams& path,
                            const SystemConfig& cfg) {
  const double m_d = static_cast<double>(cfg.M);
  const double eta = path.eta;
  const double phase =
      (2.0 * pi / m_d) *
      (m_d * cfg.c1 * eta * eta - static_cast<double>(m_prime) * eta +
       m_d * cfg.c2 * (static_cast<double>(m_prime) * static_cast<double>(m_prime) -
                       static_cast<double>(m) * static_cast<double>(m)));
  const double u = static_cast<double>(m - m_prime) - path.loc(cfg);
  const auto d = detail::dirichlet(u, cfg.M);
  const cdouble dphase =
      j1c * (2.0 * pi / m_d) * (2.0 * m_d * cfg.c1 * eta - static_cast<double>(m_prime));
  // du/deta = +2*M*c1
  const double du = 2.0 * m_d * cfg.c1;
  return cis(phase) * (dphase * d.value + d.deriv * du);
}

/// Spatial-time-affine-frequency channel tensor (N_BS x n_symbols x M) for a
/// unit transmit on subcarrier m_pilot: the per-path kernel column scaled by
/// steering and per-symbol Doppler rotation, summed over paths.
inline ComplexTensor3 build_staf_channel(const PathSet& paths, const SystemConfig& cfg,
                                         Index n_symbols) {
  ComplexTensor3 h(cfg.N_BS, n_symbols, cfg.M);
  for (const PathParams& p : paths) {
    VecC col(cfg.M);
    for (Index m = 0; m < cfg.M; ++m) col(m) = h_entry(m, cfg.m_pilot, p, cfg);
    const VecC a = steering_vector(p.theta, cfg.N_BS, cfg.antenna_spacing);
    const cdouble at = p.alpha_tilde(cfg);
    for (Index n = 0; n < n_symbols; ++n) {
      const cdouble rot = at * cis(2.0 * pi * p.nu * static_cast<double>(n) * cfg.T_sym());
      for (Index m = 0; m < cfg.M; ++m) {
        const cdouble c = rot * col(m);
        for (Index nb = 0; nb < cfg.N_BS; ++nb) h(nb, n, m) += a(nb) * c;
      }
    }
  }
  return h;
}

/// Brute-force receiver-side oracle: evaluates the transmitted analog frame as
/// its exact chirp sum (no interpolation) at every delayed, Doppler-shifted
/// sample instant and accumulates the paths per antenna. Output is one sample
/// stream per antenna covering the whole frame, prefixes included.
inline MatC time_domain_receive(const std::vector<AfdmSymbol>& frame, const PathSet& paths,
                                const SystemConfig& cfg) {
  const Index n_sym = static_cast<Index>(frame.size());
  const Index sym_len = cfg.M + cfg.M_CPP;
  for (const PathParams& p : paths)
    if (p.tau(cfg) > cfg.T_cpp() || p.eta < 0.0)
      throw std::invalid_argument("time_domain_receive: path delay outside the prefix");

  // Recover the chirp coefficients of each symbol; the DAFT is unitary so this
  // is exact and keeps the oracle independent of how the frame was filled.
  std::vector<std::vector<std::pair<Index, cdouble>>> coeffs(frame.size());
  for (Index n = 0; n < n_sym; ++n) {
    const VecC x = demodulate(remove_cpp(frame[static_cast<std::size_t>(n)], cfg), cfg);
    for (Index m = 0; m < cfg.M; ++m)
      if (std::abs(x(m)) > 1e-14 * std::sqrt(static_cast<double>(cfg.M)))
        coeffs[static_cast<std::size_t>(n)].emplace_back(m, x(m));
  }

  const double ts = cfg.T_s();
  const double tsym = cfg.T_sym();
  const double root_m = std::sqrt(static_cast<double>(cfg.M));
  // Half-open symbol supports; the tiny nudge keeps exact-boundary instants
  // (integer delays) in the symbol they belong to despite rounding.
  const double t_eps = 0.5e-6 * ts;
  const auto s_analog = [&](double t) -> cdouble {
    if (t < -t_eps) return {0.0, 0.0};
    const auto n = static_cast<Index>(std::floor((t + t_eps) / tsym));
    if (n >= n_sym) return {0.0, 0.0};
    const double u = (t - static_cast<double>(n) * tsym - cfg.T_cpp()) / ts;
    cdouble acc{0.0, 0.0};
    for (const auto& [m, xm] : coeffs[static_cast<std::size_t>(n)]) {
      const double md = static_cast<double>(m);
      acc += xm * cis(2.0 * pi * (cfg.c1 * u * u + md * u / static_cast<double>(cfg.M) +
                                  cfg.c2 * md * md));
    }
    return acc / root_m;
  };

  MatC r = MatC::Zero(cfg.N_BS, n_sym * sym_len);
  for (const PathParams& p : paths) {
    const VecC a = steering_vector(p.theta, cfg.N_BS, cfg.antenna_spacing);
    const double tau = p.tau(cfg);
    for (Index idx = 0; idx < n_sym * sym_len; ++idx) {
      const double t = static_cast<double>(idx) * ts;
      const cdouble contrib =
          p.alpha * cis(2.0 * pi * p.nu * (t - tau)) * s_analog(t - tau);
      if (contrib != cdouble{0.0, 0.0}) r.col(idx) += a * contrib;
    }
  }
  return r;
}

/// Additive white Gaussian noise at the requested SNR against the supplied
/// per-entry signal power; each complex entry gets total variance
/// signal_power / 10^(snr_db/10).
inline void awgn(ComplexTensor3& t, double snr_db, std::mt19937_64& rng,
                 double signal_power) {
  if (signal_power < 0.0) throw std::invalid_argument("awgn: negative signal power");
  const double var = signal_power * std::pow(10.0, -snr_db / 10.0);
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  cdouble* d = t.data();
  for (Index i = 0; i < t.size(); ++i) d[i] += cdouble{g(rng), g(rng)};
}

inline void awgn(MatC& m, double snr_db, std::mt19937_64& rng, double signal_power) {
  if (signal_power < 0.0) throw std::invalid_argument("awgn: negative signal power");
  const double var = signal_power * std::pow(10.0, -snr_db / 10.0);
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) m(r, c) += cdouble{g(rng), g(rng)};
}

}  // namespace afdmtt
