// Faddeeva function by Weideman's rational expansion (N = 40 terms). Relative
// error stays near 1e-14 over the closed upper half plane.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "sfwm/model.hpp"

namespace sfwm::model {
namespace {

constexpr int kTerms = 40;

struct WeidemanTable {
  double L;
  std::array<double, kTerms> c;
};

WeidemanTable build_table() {
  constexpr int M = 2 * kTerms;
  constexpr int M2 = 2 * M;
  WeidemanTable tab{};
  tab.L = std::sqrt(kTerms / std::numbers::sqrt2);
  std::array<long double, M2> f{};
  // f[0] is the k = -M node where tan diverges and the sample is zero.
  for (int k = -M + 1; k <= M - 1; ++k) {
    const long double t = tab.L * std::tan(static_cast<long double>(k) * std::numbers::pi_v<long double> / M / 2);
    f[k + M] = std::exp(-t * t) * (tab.L * tab.L + t * t);
  }
  std::array<long double, M2> shifted{};
  for (int i = 0; i < M2; ++i) shifted[i] = f[(i + M) % M2];
  for (int j = 1; j <= kTerms; ++j) {
    long double re = 0;
    for (int i = 0; i < M2; ++i)
      re += shifted[i] * std::cos(2 * std::numbers::pi_v<long double> * i * j / M2);
    tab.c[j - 1] = static_cast<double>(re / M2);
  }
  return tab;
}

const WeidemanTable& table() {
  static const WeidemanTable tab = build_table();
  return tab;
}

cplx faddeeva_upper(cplx z) {
  const auto& tab = table();
  const cplx iz(-z.imag(), z.real());
  const cplx den = tab.L - iz;
  const cplx Z = (tab.L + iz) / den;
  cplx p = tab.c[kTerms - 1];
  for (int n = kTerms - 2; n >= 0; --n) p = p * Z + tab.c[n];
  return 2.0 * p / (den * den) + (1.0 / std::sqrt(std::numbers::pi)) / den;
}

}  // namespace

cplx faddeeva(cplx z) {
  if (z.imag() >= 0) return faddeeva_upper(z);
  return 2.0 * std::exp(-z * z) - faddeeva_upper(-z);
}

cplx doppler_resolvent(cplx z, double d) {
  // Im z > 0: i sqrt(pi)/d w(z/d); the lower half follows by conjugation.
  if (z.imag() >= 0) {
    return cplx(0.0, std::sqrt(std::numbers::pi) / d) * faddeeva_upper(z / d);
  }
  return std::conj(cplx(0.0, std::sqrt(std::numbers::pi) / d) * faddeeva_upper(std::conj(z) / d));
}

}  // namespace sfwm::model
