#pragma once
// Independent reference integrals: adaptive Gauss-Kronrod from Boost, used only by tests.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sfwm::test {

using cplx = std::complex<double>;

inline double gk(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, tol);
}

/// int dw exp(-w^2/d^2)/(sqrt(pi) d) f(w) over the real line.
inline cplx gaussian_average(const std::function<cplx(double)>& f, double d) {
  const double norm = 1.0 / (std::sqrt(std::numbers::pi) * d);
  const auto w = [&](double x) { return std::exp(-x * x / (d * d)) * norm; };
  // The weight is below 1e-62 beyond 12 d; panels of width d/4 keep nearby poles resolved.
  cplx sum = 0.0;
  for (int k = -48; k < 48; ++k) {
    const double a = k * d / 4, b = (k + 1) * d / 4;
    sum += cplx(gk([&](double x) { return w(x) * f(x).real(); }, a, b),
                gk([&](double x) { return w(x) * f(x).imag(); }, a, b));
  }
  return sum;
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace sfwm::test
