// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <unsupported/Eigen/FFT>

#include "afdmtt/config.hpp"

namespace afdmtt {

/// One AFDM symbol in time domain, chirp-periodic prefix included.
struct AfdmSymbol {
  VecC samples;  // length M + M_CPP
};

namespace detail {

inline VecC fft_unscaled(const VecC& x) {
  Eigen::FFT<double> fft;
  std::vector<cdouble> in(x.data(), x.data() + x.size()), out(x.size());
  fft.fwd(out, in);
  return Eigen::Map<VecC>(out.data(), static_cast<Index>(out.size()));
}

inline VecC ifft_scaled(const VecC& x) {
  Eigen::FFT<double> fft;
  std::vector<cdouble> in(x.data(), x.data() + x.size()), out(x.size());
  fft.inv(out, in);
  return Eigen::Map<VecC>(out.data(), static_cast<Index>(out.size()));
}

}  // namespace detail

/// Unitary DAFT synthesis: s = Lambda_c1^H F^H Lambda_c2^H x, with the DFT
/// normalized by 1/sqrt(M) both ways. Output has no prefix yet.
inline VecC modulate(const VecC& x, const SystemConfig& cfg) {
  if (x.size() != cfg.M) throw std::invalid_argument("modulate: input length != M");
  const double m_d = static_cast<double>(cfg.M);
  VecC pre(cfg.M);
  for (Index m = 0; m < cfg.M; ++m)
    pre(m) = x(m) * cis(2.0 * pi * cfg.c2 * static_cast<double>(m) * static_cast<double>(m));
  VecC s = std::sqrt(m_d) * detail::ifft_scaled(pre);
  for (Index u = 0; u < cfg.M; ++u)
    s(u) *= cis(2.0 * pi * cfg.c1 * static_cast<double>(u) * static_cast<double>(u));
  return s;
}

/// Unitary DAFT analysis, the exact inverse of modulate.
inline VecC demodulate(const VecC& s, const SystemConfig& cfg) {
  if (s.size() != cfg.M) throw std::invalid_argument("demodulate: input length != M");
  const double m_d = static_cast<double>(cfg.M);
  VecC pre(cfg.M);
  for (Index u = 0; u < cfg.M; ++u)
    pre(u) = s(u) * cis(-2.0 * pi * cfg.c1 * static_cast<double>(u) * static_cast<double>(u));
  VecC x = detail::fft_unscaled(pre) / std::sqrt(m_d);
  for (Index m = 0; m < cfg.M; ++m)
    x(m) *= cis(-2.0 * pi * cfg.c2 * static_cast<double>(m) * static_cast<double>(m));
  return x;
}

/// Prepend the chirp-periodic prefix. The prefix continues the symbol's chirp
/// analytically: s[p] = s[p+M] * e^{-j 2 pi c1 (M^2 + 2 M p)} for p in
/// [-M_CPP, -1], which reduces to a cyclic prefix when 2*M*c1 is an integer.
inline AfdmSymbol add_cpp(const VecC& body, const SystemConfig& cfg) {
  if (body.size() != cfg.M) throw std::invalid_argument("add_cpp: input length != M");
  AfdmSymbol sym;
  sym.samples.resize(cfg.M + cfg.M_CPP);
  const double m_d = static_cast<double>(cfg.M);
  for (Index p = 0; p < cfg.M_CPP; ++p) {
    const double u = static_cast<double>(p - cfg.M_CPP);  // in [-M_CPP, -1]
    sym.samples(p) = body(p - cfg.M_CPP + cfg.M) *
                     cis(-2.0 * pi * cfg.c1 * (m_d * m_d + 2.0 * m_d * u));
  }
  sym.samples.tail(cfg.M) = body;
  return sym;
}

/// Drop the prefix samples again.
inline VecC remove_cpp(const AfdmSymbol& sym, const SystemConfig& cfg) {
  if (sym.samples.size() != cfg.M + cfg.M_CPP)
    throw std::invalid_argument("remove_cpp: symbol length != M + M_CPP");
  return sym.samples.tail(cfg.M);
}

}  // namespace afdmtt
