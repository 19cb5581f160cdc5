// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "afdmtt/channel.hpp"

namespace afdmtt {

/// Embedded-pilot frame layout: which cells of the (subcarrier x symbol) grid
/// carry data. Pilot-bearing symbols reserve the pilot cell and a guard band
/// [m_pilot - M_guard, m_pilot + M_guard]; later symbols are all data.
struct FrameLayout {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> data_mask;  // M x N_frame

  Index data_cell_count() const { return data_mask.count(); }
};

inline FrameLayout frame_layout(const SystemConfig& cfg) {
  cfg.validate();
  FrameLayout fl;
  fl.data_mask.setConstant(cfg.M, cfg.N_frame, true);
  const Index lo = std::max<Index>(0, cfg.m_pilot - cfg.M_guard);
  const Index hi = std::min<Index>(cfg.M - 1, cfg.m_pilot + cfg.M_guard);
  for (Index n = 0; n < cfg.N; ++n)
    for (Index m = lo; m <= hi; ++m) fl.data_mask(m, n) = false;
  return fl;
}

/// Fill a transmit grid (M x N_frame): the pilot value on (m_pilot, n) for
/// every pilot-bearing symbol, zeros in the guards, and the supplied data
/// symbols scanned symbol-major into the data cells. An empty data vector
/// leaves a pilot-only frame.
inline MatC build_frame(const SystemConfig& cfg, const VecC& data) {
  const FrameLayout fl = frame_layout(cfg);
  if (data.size() != 0 && data.size() != fl.data_cell_count())
    throw std::invalid_argument("build_frame: data length must match the layout");
  MatC grid = MatC::Zero(cfg.M, cfg.N_frame);
  for (Index n = 0; n < cfg.N; ++n) grid(cfg.m_pilot, n) = cfg.pilot_value();
  if (data.size() > 0) {
    Index next = 0;
    for (Index n = 0; n < cfg.N_frame; ++n)
      for (Index m = 0; m < cfg.M; ++m)
        if (fl.data_mask(m, n)) grid(m, n) = data(next++);
  }
  return grid;
}

/// The truncated observation the estimator actually consumes: the M_region
/// affine-frequency rows ending at the pilot bin, over the pilot-bearing
/// symbols and all antennas.
struct PilotObservation {
  ComplexTensor3 y;   // N_BS x N x M_region
  Index row_offset = 0;  // absolute bin of window row 0: m_pilot - M_region + 1
};

/// Slice the extraction window out of per-antenna demodulated grids
/// (each M x at-least-N).
inline PilotObservation extract_pilot_tensor(const std::vector<MatC>& grids,
                                             const SystemConfig& cfg) {
  if (static_cast<Index>(grids.size()) != cfg.N_BS)
    throw std::invalid_argument("extract_pilot_tensor: need one grid per antenna");
  const Index off = cfg.window_offset();
  if (off < 0 || cfg.m_pilot >= cfg.M)
    throw std::invalid_argument("extract_pilot_tensor: window leaves the subcarrier range");
  PilotObservation obs;
  obs.row_offset = off;
  obs.y = ComplexTensor3(cfg.N_BS, cfg.N, cfg.M_region);
  for (Index nb = 0; nb < cfg.N_BS; ++nb) {
    const MatC& g = grids[static_cast<std::size_t>(nb)];
    if (g.rows() != cfg.M || g.cols() < cfg.N)
      throw std::invalid_argument("extract_pilot_tensor: grid shape mismatch");
    for (Index n = 0; n < cfg.N; ++n)
      for (Index r = 0; r < cfg.M_region; ++r) obs.y(nb, n, r) = g(off + r, n);
  }
  return obs;
}

/// Ground-truth factor matrices of the pilot observation model: steering,
/// per-symbol Doppler rotation, and the windowed kernel response scaled by the
/// transmitted pilot value. With the diagonal core of alpha_tilde gains these
/// reassemble the noiseless observation exactly.
struct PilotFactors {
  MatC a1;  // N_BS x P
  MatC a2;  // N x P
  MatC a3;  // M_region x P
  VecC gains;  // alpha_tilde per path
};

inline PilotFactors pilot_factors(const PathSet& paths, const SystemConfig& cfg) {
  const Index p_count = static_cast<Index>(paths.size());
  PilotFactors f;
  f.a1.resize(cfg.N_BS, p_count);
  f.a2.resize(cfg.N, p_count);
  f.a3.resize(cfg.M_region, p_count);
  f.gains.resize(p_count);
  const Index off = cfg.window_offset();
  for (Index r = 0; r < p_count; ++r) {
    const PathParams& p = paths[static_cast<std::size_t>(r)];
    f.a1.col(r) = steering_vector(p.theta, cfg.N_BS, cfg.antenna_spacing);
    for (Index n = 0; n < cfg.N; ++n)
      f.a2(n, r) = cis(2.0 * pi * p.nu * static_cast<double>(n) * cfg.T_sym());
    for (Index m = 0; m < cfg.M_region; ++m)
      f.a3(m, r) = h_entry(off + m, cfg.m_pilot, p, cfg) * cfg.pilot_value();
    f.gains(r) = p.alpha_tilde(cfg);
  }
  return f;
}

}  // namespace afdmtt
