#pragma once

// Complex Gamma via the Lanczos approximation (g = 7, nine terms) with the
// reflection formula on the left half-plane. Relative accuracy is about
// 1e-15 away from the poles.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace hyperlab::special {

using cplx = std::complex<double>;

namespace detail {
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
}  // namespace detail

/// log sin(w) without overflow for large |Im w|.
inline cplx log_sin(cplx w) {
  const cplx i{0.0, 1.0};
  if (w.imag() > 10.0) return -i * w - std::log(2.0 * i) + std::log(std::exp(2.0 * i * w) - 1.0);
  if (w.imag() < -10.0) return i * w - std::log(2.0 * i) + std::log(1.0 - std::exp(-2.0 * i * w));
  return std::log(std::sin(w));
}

/// log Gamma(z) on the principal sheet of each term (imaginary part is only
/// meaningful modulo 2 pi, which is all exponentiation needs).
inline cplx lgamma(cplx z) {
  using std::numbers::pi;
  if (z.real() < 0.5) {
    // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
    return std::log(pi) - log_sin(pi * z) - lgamma(1.0 - z);
  }
  z -= 1.0;
  cplx x = detail::kLanczosCoeffs[0];
  for (int i = 1; i < 9; ++i) x += detail::kLanczosCoeffs[i] / (z + static_cast<double>(i));
  const cplx t = z + detail::kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline cplx gamma(cplx z) { return std::exp(lgamma(z)); }

/// Surface area of the unit sphere S^{n-1} in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace hyperlab::special
