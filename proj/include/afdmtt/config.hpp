// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "afdmtt/common.hpp"

namespace afdmtt {

/// Maximum Doppler shift (Hz) for a velocity in km/h at carrier f_c, with the
/// conventional 3e8 m/s propagation speed.
inline double doppler_from_velocity(double v_kmh, double f_c) {
  return (v_kmh / 3.6) * f_c / 3.0e8;
}

/// Smallest chirp rate giving full delay-Doppler resolvability when the
/// Doppler spread is alpha_max taps and k_nu guard taps are added on top:
/// c1 = (2*(ceil(alpha_max) + k_nu) + 1) / (2M).
inline double choose_c1(Index m, double alpha_max, Index k_nu = 0) {
  if (m <= 0) throw std::invalid_argument("choose_c1: M must be positive");
  const double a = std::ceil(alpha_max) + static_cast<double>(k_nu);
  return (2.0 * a + 1.0) / (2.0 * static_cast<double>(m));
}

/// Static description of one MIMO-AFDM link: waveform numerology, array size,
/// and the embedded-pilot layout. All estimator and bound code reads geometry
/// from here.
struct SystemConfig {
  Index M = 1024;       // subcarriers (chirps) per symbol
  Index N = 11;         // pilot-bearing symbols per frame
  Index N_frame = 14;   // total symbols per frame
  Index M_CPP = 72;     // chirp-periodic prefix length, samples
  double delta_f = 30e3;
  double f_c = 15e9;
  double c1 = 1.0 / 2048.0;
  double c2 = 0.0;
  Index N_BS = 16;      // receive antennas (ULA)
  double antenna_spacing = 0.5;  // in wavelengths
  Index m_pilot = 512;
  Index M_guard = 72;   // guard half-width around the pilot subcarrier
  Index M_region = 75;  // extraction window height
  Index P = 5;          // propagation paths / decomposition rank
  double nu_max = doppler_from_velocity(300.0, 15e9);
  double pilot_boost = 1.0;

  double T() const { return 1.0 / delta_f; }
  double T_s() const { return T() / static_cast<double>(M); }
  double T_sym() const { return static_cast<double>(M + M_CPP) * T_s(); }
  double T_cpp() const { return static_cast<double>(M_CPP) * T_s(); }
  double alpha_max() const { return nu_max * T(); }
  cdouble pilot_value() const { return {std::sqrt(pilot_boost), 0.0}; }
  Index window_offset() const { return m_pilot - M_region + 1; }

  void validate() const {
    if (M < 2 || N < 1 || N_frame < N) throw std::invalid_argument("config: bad frame sizes");
    if (M_CPP < 0 || M_CPP > M) throw std::invalid_argument("config: bad M_CPP");
    if (delta_f <= 0 || f_c <= 0) throw std::invalid_argument("config: bad frequencies");
    if (N_BS < 1) throw std::invalid_argument("config: bad N_BS");
    if (antenna_spacing <= 0) throw std::invalid_argument("config: bad antenna spacing");
    if (m_pilot < 0 || m_pilot >= M) throw std::invalid_argument("config: pilot subcarrier out of range");
    if (M_region < 1 || M_region > m_pilot + 1)
      throw std::invalid_argument("config: extraction window must fit below the pilot");
    if (M_guard < M_CPP || M_guard > M / 2)
      throw std::invalid_argument("config: guard must cover at least the prefix length");
    if (P < 1) throw std::invalid_argument("config: bad path count");
    if (!(c2 < 1.0 / (2.0 * static_cast<double>(M))))
      throw std::invalid_argument("config: c2 must stay below 1/(2M)");
    if (pilot_boost <= 0) throw std::invalid_argument("config: bad pilot boost");
  }

  /// Derived-default helper: window high enough for every main lobe plus its
  /// larger neighbor given delays up to M_CPP-1 taps and Doppler alpha_max.
  Index default_region() const {
    return M_CPP + static_cast<Index>(std::ceil(alpha_max())) + 2;
  }
};

/// Table-scale default used by tests and presets at a reduced M.
inline SystemConfig scaled_config(Index m, Index n_bs, Index n, Index p, Index m_cpp) {
  SystemConfig cfg;
  cfg.M = m;
  cfg.N = n;
  cfg.N_frame = n + 3;
  cfg.M_CPP = m_cpp;
  cfg.N_BS = n_bs;
  cfg.P = p;
  cfg.c1 = 1.0 / (2.0 * static_cast<double>(m));
  cfg.m_pilot = m / 2;
  cfg.M_region = cfg.default_region();
  cfg.M_guard = cfg.M_region - 1;
  cfg.validate();
  return cfg;
}

}  // namespace afdmtt
