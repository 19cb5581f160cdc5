// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "afdmtt/bounds.hpp"
#include "afdmtt/metrics.hpp"

namespace afdmtt {

enum class Scenario { mse, nmse, ber, se, runtime, bounds };

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::mse: return "mse";
    case Scenario::nmse: return "nmse";
    case Scenario::ber: return "ber";
    case Scenario::se: return "se";
    case Scenario::runtime: return "runtime";
    case Scenario::bounds: return "bounds";
  }
  return "unknown";
}

inline Scenario scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::mse, Scenario::nmse, Scenario::ber, Scenario::se,
                     Scenario::runtime, Scenario::bounds})
    if (name == scenario_name(s)) return s;
  throw std::invalid_argument("unknown scenario: " + name);
}

struct SweepSpec {
  Scenario scenario = Scenario::mse;
  std::vector<double> snr_db = {20.0};
  int trials = 10;
  std::uint64_t master_seed = 1;
  Index qam_order = 16;
  int cp_max_iter = 200;
  double cp_tol = 1e-8;
};

struct TrialRecord {
  Scenario scenario;
  double snr_db = 0.0;
  int trial = 0;
  std::string metric;
  double value = 0.0;
  double runtime_s = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Per-path per-symbol input-output matrices of the chirp transform, plus the
/// cross grams needed to assemble stacked-antenna normal equations cheaply.
struct EffectiveChannel {
  std::vector<MatC> kernels;   // P matrices, M x M
  std::vector<VecC> steering;  // P vectors, N_BS
  VecC gains;                  // effective gains
  VecR doppler;
  MatC steer_gram;                      // steering inner products, P x P
  std::vector<std::vector<MatC>> gram;  // gram[i][j] = K_i^H K_j, i <= j
};

inline EffectiveChannel build_effective_channel(const PathSet& paths,
                                                const SystemConfig& cfg) {
  const std::size_t p = paths.size();
  EffectiveChannel ch;
  ch.kernels.reserve(p);
  ch.steering.reserve(p);
  ch.gains.resize(static_cast<Index>(p));
  ch.doppler.resize(static_cast<Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    const PathParams& path = paths[i];
    MatC k(cfg.M, cfg.M);
    for (Index mp = 0; mp < cfg.M; ++mp)
      for (Index m = 0; m < cfg.M; ++m) k(m, mp) = h_entry(m, mp, path, cfg);
    ch.kernels.push_back(std::move(k));
    ch.steering.push_back(steering_vector(path.theta, cfg.N_BS, cfg.antenna_spacing));
    ch.gains(static_cast<Index>(i)) = path.alpha_tilde(cfg);
    ch.doppler(static_cast<Index>(i)) = path.nu;
  }
  ch.steer_gram.resize(static_cast<Index>(p), static_cast<Index>(p));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t jj = 0; jj < p; ++jj)
      ch.steer_gram(static_cast<Index>(i), static_cast<Index>(jj)) =
          ch.steering[i].dot(ch.steering[jj]);  // conjugates the left argument
  ch.gram.resize(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t jj = i; jj < p; ++jj)
      ch.gram[i].push_back(ch.kernels[i].adjoint() * ch.kernels[jj]);
  return ch;
}

/// Sum of kernel grams weighted by the per-symbol path coefficients and the
/// steering inner products: H_n^H H_n of the antenna-stacked channel.
inline MatC stacked_gram(const EffectiveChannel& ch, const VecC& coeff, Index m_size) {
  const std::size_t p = ch.kernels.size();
  MatC acc = MatC::Zero(m_size, m_size);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t jj = 0; jj < p; ++jj) {
      const cdouble w = std::conj(coeff(static_cast<Index>(i))) *
                        coeff(static_cast<Index>(jj)) *
                        ch.steer_gram(static_cast<Index>(i), static_cast<Index>(jj));
      if (jj >= i)
        acc.noalias() += w * ch.gram[i][jj - i];
      else
        acc.noalias() += w * ch.gram[jj][i - jj].adjoint();
    }
  return acc;
}

struct DetectedFrame {
  std::vector<std::uint8_t> bits;
  VecC x_hat;  // equalized data cells in frame scan order
};

/// Equalize every data cell of a received frame against the channel model in
/// `ch`: subtract the modeled pilot from pilot-bearing symbols, then solve
/// per-symbol LMMSE normal equations restricted to the data columns.
inline DetectedFrame detect_frame(const std::vector<MatC>& grids, const EffectiveChannel& ch,
                                  const SystemConfig& cfg, double sigma2, Index qam_order) {
  const FrameLayout fl = frame_layout(cfg);
  const std::size_t p = ch.kernels.size();
  DetectedFrame out;
  std::vector<cdouble> eq_acc;

  for (Index n = 0; n < cfg.N_frame; ++n) {
    VecC coeff(static_cast<Index>(p));
    for (std::size_t i = 0; i < p; ++i)
      coeff(static_cast<Index>(i)) =
          ch.gains(static_cast<Index>(i)) *
          cis(2.0 * pi * ch.doppler(static_cast<Index>(i)) * static_cast<double>(n) *
              cfg.T_sym());

    // beamform the antennas onto each path's steering direction
    std::vector<VecC> beam(p, VecC::Zero(cfg.M));
    for (std::size_t i = 0; i < p; ++i) {
      VecC z = VecC::Zero(cfg.M);
      for (Index b = 0; b < cfg.N_BS; ++b)
        z += std::conj(ch.steering[i](b)) * grids[static_cast<std::size_t>(b)].col(n);
      beam[i] = z;
    }
    // modeled pilot leaves the beamformed observations before equalization
    if (n < cfg.N) {
      for (std::size_t i = 0; i < p; ++i) {
        VecC pil = VecC::Zero(cfg.M);
        for (std::size_t jj = 0; jj < p; ++jj)
          pil += (coeff(static_cast<Index>(jj)) *
                  ch.steer_gram(static_cast<Index>(i), static_cast<Index>(jj))) *
                 ch.kernels[jj].col(cfg.m_pilot);
        beam[i] -= pil * cfg.pilot_value();
      }
    }

    std::vector<Index> cols;
    cols.reserve(static_cast<std::size_t>(cfg.M));
    for (Index m = 0; m < cfg.M; ++m)
      if (fl.data_mask(m, n)) cols.push_back(m);
    if (cols.empty()) continue;
    const Index nd = static_cast<Index>(cols.size());

    VecC rhs = VecC::Zero(cfg.M);
    for (std::size_t i = 0; i < p; ++i)
      rhs.noalias() +=
          std::conj(coeff(static_cast<Index>(i))) * (ch.kernels[i].adjoint() * beam[i]);
    const MatC full = stacked_gram(ch, coeff, cfg.M);

    MatC gram(nd, nd);
    VecC rhs_d(nd);
    for (Index a = 0; a < nd; ++a) {
      rhs_d(a) = rhs(cols[static_cast<std::size_t>(a)]);
      for (Index b = 0; b < nd; ++b)
        gram(a, b) = full(cols[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
    }
    gram.diagonal().array() += sigma2;
    const VecC x_hat = gram.ldlt().solve(rhs_d);

    const auto bits = qam_demodulate(x_hat, qam_order);
    out.bits.insert(out.bits.end(), bits.begin(), bits.end());
    for (Index a = 0; a < nd; ++a) eq_acc.push_back(x_hat(a));
  }
  out.x_hat.resize(static_cast<Index>(eq_acc.size()));
  for (std::size_t i = 0; i < eq_acc.size(); ++i)
    out.x_hat(static_cast<Index>(i)) = eq_acc[i];
  return out;
}

}  // namespace detail

/// Monte Carlo sweep over SNR points. Every trial draws its own path set from
/// a deterministic per-trial seed, so runs are reproducible and individual
/// trials can be replayed in isolation.
inline std::vector<TrialRecord> run_sweep(const SystemConfig& cfg, const SweepSpec& spec) {
  cfg.validate();
  std::vector<TrialRecord> records;
  const PathRanges ranges = PathRanges::from_config(cfg);

  for (std::size_t si = 0; si < spec.snr_db.size(); ++si) {
    const double snr = spec.snr_db[si];
    for (int trial = 0; trial < spec.trials; ++trial) {
      const std::uint64_t seed =
          mix_seed(mix_seed(spec.master_seed, static_cast<std::uint64_t>(si)),
                   static_cast<std::uint64_t>(trial));
      std::mt19937_64 rng(seed);
      const PathSet paths = sample_paths(cfg, ranges, rng);
      const auto emit = [&](const std::string& metric, double value, double rt) {
        records.push_back({spec.scenario, snr, trial, metric, value, rt, seed});
      };

      switch (spec.scenario) {
        case Scenario::mse: {
          const PilotFactors pf = pilot_factors(paths, cfg);
          ComplexTensor3 y = cpd_construct(pf.gains, pf.a1, pf.a2, pf.a3);
          const double psig = y.frobenius_norm() * y.frobenius_norm() /
                              static_cast<double>(y.size());
          awgn(y, snr, rng, psig);
          const PilotObservation obs{std::move(y), cfg.window_offset()};
          const auto t0 = detail::Clock::now();
          const EstimationResult est = estimate(obs, cfg);
          const double rt = detail::seconds_since(t0);
          const auto perm = align_paths(est, paths, cfg);
          const ParamMse mse = param_mse(est, paths, perm, cfg);
          emit("theta_mse", mse.theta, rt);
          emit("nu_mse", mse.nu, rt);
          emit("eta_mse", mse.eta, rt);
          emit("gain_mse", mse.gain, rt);
          break;
        }
        case Scenario::nmse: {
          const PilotFactors pf = pilot_factors(paths, cfg);
          ComplexTensor3 y = cpd_construct(pf.gains, pf.a1, pf.a2, pf.a3);
          const double psig = y.frobenius_norm() * y.frobenius_norm() /
                              static_cast<double>(y.size());
          awgn(y, snr, rng, psig);
          const PilotObservation obs{std::move(y), cfg.window_offset()};
          const ComplexTensor3 truth = build_staf_channel(paths, cfg, cfg.N);

          auto t0 = detail::Clock::now();
          const EstimationResult est = estimate(obs, cfg);
          const ComplexTensor3 rec = reconstruct_channel(est, cfg, cfg.N);
          emit("tt_nmse", nmse(rec, truth), detail::seconds_since(t0));

          t0 = detail::Clock::now();
          CpAlsOptions opt;
          opt.max_iter = spec.cp_max_iter;
          opt.tol = spec.cp_tol;
          opt.seed = mix_seed(seed, 0xa15);
          const EstimationResult alt = cp_als_estimate(obs, cfg, opt);
          const ComplexTensor3 rec2 = reconstruct_channel(alt, cfg, cfg.N);
          emit("cpals_nmse", nmse(rec2, truth), detail::seconds_since(t0));
          break;
        }
        case Scenario::ber:
        case Scenario::se: {
          const FrameLayout fl = frame_layout(cfg);
          const Index bits_per = qam_bits_per_symbol(spec.qam_order);
          std::vector<std::uint8_t> tx_bits(
              static_cast<std::size_t>(fl.data_cell_count() * bits_per));
          std::uniform_int_distribution<int> coin(0, 1);
          for (auto& b : tx_bits) b = static_cast<std::uint8_t>(coin(rng));
          const VecC data = qam_modulate(tx_bits, spec.qam_order);
          const MatC grid = build_frame(cfg, data);

          std::vector<AfdmSymbol> frame;
          frame.reserve(static_cast<std::size_t>(cfg.N_frame));
          for (Index n = 0; n < cfg.N_frame; ++n)
            frame.push_back(add_cpp(modulate(grid.col(n), cfg), cfg));
          MatC rx = time_domain_receive(frame, paths, cfg);
          const double psig = rx.squaredNorm() / static_cast<double>(rx.size());
          const double sigma2 = psig * std::pow(10.0, -snr / 10.0);
          awgn(rx, snr, rng, psig);

          const Index sym_len = cfg.M + cfg.M_CPP;
          std::vector<MatC> grids(static_cast<std::size_t>(cfg.N_BS));
          for (Index b = 0; b < cfg.N_BS; ++b) {
            MatC g(cfg.M, cfg.N_frame);
            for (Index n = 0; n < cfg.N_frame; ++n) {
              AfdmSymbol sym;
              sym.samples = rx.row(b).segment(n * sym_len, sym_len).transpose();
              g.col(n) = demodulate(remove_cpp(sym, cfg), cfg);
            }
            grids[static_cast<std::size_t>(b)] = std::move(g);
          }

          const auto t0 = detail::Clock::now();
          const PilotObservation obs = extract_pilot_tensor(grids, cfg);
          const EstimationResult est = estimate(obs, cfg);
          const detail::EffectiveChannel est_ch =
              detail::build_effective_channel(paths_from_estimate(est, cfg), cfg);
          const detail::DetectedFrame det =
              detail::detect_frame(grids, est_ch, cfg, sigma2, spec.qam_order);
          const double rt = detail::seconds_since(t0);

          const detail::EffectiveChannel true_ch = detail::build_effective_channel(paths, cfg);
          const detail::DetectedFrame genie =
              detail::detect_frame(grids, true_ch, cfg, sigma2, spec.qam_order);

          if (spec.scenario == Scenario::ber) {
            emit("tt_ber", bit_error_rate(tx_bits, det.bits), rt);
            emit("perfect_ber", bit_error_rate(tx_bits, genie.bits), rt);
          } else {
            // SINR measured from the equalizer output against the known data
            const double oh = pilot_overhead(cfg);
            const double sig = data.squaredNorm();
            const auto pooled = [&](const VecC& x_hat) {
              const double res = (x_hat - data).squaredNorm();
              return sig / std::max(res, 1e-300);
            };
            emit("tt_se", spectral_efficiency(pooled(det.x_hat), oh), rt);
            emit("perfect_se", spectral_efficiency(pooled(genie.x_hat), oh), rt);
          }
          break;
        }
        case Scenario::runtime: {
          const PilotFactors pf = pilot_factors(paths, cfg);
          ComplexTensor3 y = cpd_construct(pf.gains, pf.a1, pf.a2, pf.a3);
          const double psig = y.frobenius_norm() * y.frobenius_norm() /
                              static_cast<double>(y.size());
          awgn(y, snr, rng, psig);
          const PilotObservation obs{std::move(y), cfg.window_offset()};

          auto t0 = detail::Clock::now();
          (void)estimate(obs, cfg);
          const double rt_tt = detail::seconds_since(t0);
          emit("tt_runtime", rt_tt, rt_tt);

          CpAlsOptions opt;
          opt.max_iter = spec.cp_max_iter;
          opt.tol = spec.cp_tol;
          opt.seed = mix_seed(seed, 0xa15);
          t0 = detail::Clock::now();
          const EstimationResult alt = cp_als_estimate(obs, cfg, opt);
          const double rt_cp = detail::seconds_since(t0);
          emit("cpals_runtime", rt_cp, rt_cp);
          emit("cpals_iters", static_cast<double>(alt.diagnostics.iterations), rt_cp);
          break;
        }
        case Scenario::bounds: {
          const auto t0 = detail::Clock::now();
          const double sigma2 = noise_variance_for(paths, cfg, snr);
          VecR gv(cfg.P);
          for (Index i = 0; i < cfg.P; ++i)
            gv(i) = std::norm(paths[static_cast<std::size_t>(i)].alpha);
          const ZzbResult zb = zzb(paths, cfg, gv, sigma2, ranges);
          const double rt = detail::seconds_since(t0);
          emit("crb_theta", zb.crb(0), rt);
          emit("crb_nu", zb.crb(1), rt);
          emit("crb_eta", zb.crb(2), rt);
          emit("zzb_theta", zb.bound(0), rt);
          emit("zzb_nu", zb.bound(1), rt);
          emit("zzb_eta", zb.bound(2), rt);
          emit("p_na", zb.ambiguity, rt);
          break;
        }
      }
    }
  }
  return records;
}

/// Fixed-format CSV so that identical sweeps serialize byte-identically apart
/// from the wall-clock column.
inline void write_csv(const std::vector<TrialRecord>& records, std::ostream& os) {
  os << "scenario,snr_db,trial,metric,value,runtime_s,seed\n";
  char buf[160];
  for (const TrialRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%d,%s,%.12e,%.6e,%llu\n", scenario_name(r.scenario),
                  r.snr_db, r.trial, r.metric.c_str(), r.value, r.runtime_s,
                  static_cast<unsigned long long>(r.seed));
    os << buf;
  }
}

}  // namespace afdmtt
