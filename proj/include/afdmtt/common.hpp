// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace afdmtt {

using cdouble = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double pi = std::numbers::pi;
inline constexpr cdouble j1c{0.0, 1.0};

/// e^{j*phase} without going through std::polar's magnitude branch.
inline cdouble cis(double phase) { return {std::cos(phase), std::sin(phase)}; }

/// Gaussian right-tail probability Q(x).
inline double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Regularized lower incomplete gamma P(3/2, x), the only order the bounds need.
/// Closed form: P(3/2,x) = erf(sqrt(x)) - 2*sqrt(x/pi)*exp(-x).
inline double reg_lower_gamma_3_2(double x) {
  if (x <= 0.0) return 0.0;
  const double s = std::sqrt(x);
  return std::erf(s) - 2.0 * s * std::exp(-x) / std::sqrt(pi);
}

/// 64-bit mix used to derive independent per-trial RNG streams.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace afdmtt
