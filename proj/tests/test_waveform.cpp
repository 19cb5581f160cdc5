// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "afdmtt/waveform.hpp"

using namespace afdmtt;

namespace {

SystemConfig chirp_cfg(Index m, Index m_cpp, double c1, double c2) {
  SystemConfig cfg;
  cfg.M = m;
  cfg.M_CPP = m_cpp;
  cfg.c1 = c1;
  cfg.c2 = c2;
  return cfg;
}

VecC random_vec(Index n, unsigned tag) {
  std::mt19937_64 rng(2000u + tag);
  std::normal_distribution<double> g;
  VecC x(n);
  for (Index i = 0; i < n; ++i) x(i) = cdouble{g(rng), g(rng)};
  return x;
}

}  // namespace

TEST_CASE("modulate is unitary and demodulate inverts it") {
  for (Index m : {Index{4}, Index{32}, Index{1024}}) {
    const SystemConfig cfg =
        chirp_cfg(m, m / 4, 1.0 / (2.0 * static_cast<double>(m)),
                  1.0 / (4.0 * static_cast<double>(m) * static_cast<double>(m)));
    const VecC x = random_vec(m, static_cast<unsigned>(m));
    const VecC s = modulate(x, cfg);
    REQUIRE(std::abs(s.norm() - x.norm()) < 1e-12 * x.norm());
    REQUIRE((demodulate(s, cfg) - x).norm() < 1e-12 * x.norm());
  }
}

TEST_CASE("zero affine parameters reduce modulate to the inverse DFT") {
  const Index m = 16;
  const SystemConfig cfg = chirp_cfg(m, 4, 0.0, 0.0);
  const VecC x = random_vec(m, 3);
  const VecC s = modulate(x, cfg);
  for (Index u = 0; u < m; ++u) {
    cdouble acc{0.0, 0.0};
    for (Index n = 0; n < m; ++n)
      acc += x(n) * cis(2.0 * pi * static_cast<double>(u) * static_cast<double>(n) /
                        static_cast<double>(m));
    acc /= std::sqrt(static_cast<double>(m));
    REQUIRE(std::abs(s(u) - acc) < 1e-13);
  }
}

TEST_CASE("explicit four point chirp transform matrix") {
  const Index m = 4;
  const double c1 = 1.0 / 8.0, c2 = 1.0 / 32.0;
  const SystemConfig cfg = chirp_cfg(m, 1, c1, c2);
  MatC a(m, m);
  for (Index u = 0; u < m; ++u)
    for (Index n = 0; n < m; ++n)
      a(u, n) = cis(2.0 * pi * (c1 * static_cast<double>(u * u) +
                                static_cast<double>(u * n) / static_cast<double>(m) +
                                c2 * static_cast<double>(n * n))) /
                std::sqrt(static_cast<double>(m));
  for (Index n = 0; n < m; ++n) {
    VecC e = VecC::Zero(m);
    e(n) = 1.0;
    REQUIRE((modulate(e, cfg) - a.col(n)).norm() < 1e-14);
  }
  const VecC x = random_vec(m, 4);
  REQUIRE((modulate(x, cfg) - a * x).norm() < 1e-13);
}

TEST_CASE("prefix samples continue the chirp and strip off again") {
  const Index m = 32, cpp = 8;
  const SystemConfig cfg = chirp_cfg(m, cpp, 3.0 / 64.0, 0.0);
  const VecC body = random_vec(m, 5);
  const AfdmSymbol sym = add_cpp(body, cfg);
  REQUIRE(sym.samples.size() == m + cpp);
  REQUIRE((remove_cpp(sym, cfg) - body).norm() == 0.0);
  const double m_d = static_cast<double>(m);
  for (Index p = 0; p < cpp; ++p) {
    const double u = static_cast<double>(p - cpp);
    const cdouble want =
        body(p - cpp + m) * cis(-2.0 * pi * cfg.c1 * (m_d * m_d + 2.0 * m_d * u));
    REQUIRE(std::abs(sym.samples(p) - want) < 1e-15);
  }
}

TEST_CASE("integer 2 M c1 degenerates the prefix to a cyclic copy") {
  const Index m = 16, cpp = 4;
  const SystemConfig cfg = chirp_cfg(m, cpp, 1.0 / static_cast<double>(m), 0.0);
  const VecC body = random_vec(m, 6);
  const AfdmSymbol sym = add_cpp(body, cfg);
  for (Index p = 0; p < cpp; ++p)
    REQUIRE(std::abs(sym.samples(p) - body(p - cpp + m)) < 1e-12);
}

TEST_CASE("timing identities of the configuration") {
  SystemConfig cfg;
  REQUIRE(cfg.T() * cfg.delta_f == 1.0);
  REQUIRE(cfg.T_sym() == static_cast<double>(cfg.M + cfg.M_CPP) * cfg.T_s());
  REQUIRE(cfg.T_cpp() == static_cast<double>(cfg.M_CPP) * cfg.T_s());
  REQUIRE(cfg.alpha_max() == cfg.nu_max * cfg.T());
}

TEST_CASE("vehicle speed maps to the documented maximum Doppler") {
  const double nu = doppler_from_velocity(300.0, 15e9);
  REQUIRE(nu == Catch::Approx(4166.6666666667).margin(1e-6));
  REQUIRE(std::round(nu) == 4167.0);
}

TEST_CASE("first affine parameter selection") {
  SystemConfig cfg;
  REQUIRE(choose_c1(1024, cfg.alpha_max()) == Catch::Approx(3.0 / 2048.0));
  REQUIRE(choose_c1(1024, cfg.alpha_max(), 2) == Catch::Approx(7.0 / 2048.0));
  // the evaluation sections instead fix c1 = 1/(2M); the default config does too
  REQUIRE(cfg.c1 == 1.0 / 2048.0);
}

TEST_CASE("modulate rejects wrong lengths") {
  SystemConfig cfg;
  REQUIRE_THROWS_AS(modulate(VecC::Zero(3), cfg), std::invalid_argument);
  REQUIRE_THROWS_AS(demodulate(VecC::Zero(3), cfg), std::invalid_argument);
  REQUIRE_THROWS_AS(add_cpp(VecC::Zero(3), cfg), std::invalid_argument);
}
