#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle.hpp"
#include "sfwm/error.hpp"
#include "sfwm/model.hpp"

using namespace sfwm;
using model::cplx;
using test::rel_err;

TEST_SUITE("model") {

TEST_CASE("faddeeva on the imaginary axis matches the scaled complementary error function") {
  CHECK(std::abs(model::faddeeva({0.0, 0.0}) - cplx(1.0, 0.0)) < 1e-14);
  for (double y : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    const double ref = std::exp(y * y) * std::erfc(y);
    CHECK(std::abs(model::faddeeva({0.0, y}).real() - ref) <= 1e-12 * ref);
  }
}

TEST_CASE("faddeeva approaches i/(sqrt(pi) z) far from the origin") {
  const cplx z(300.0, 200.0);
  const cplx asym = cplx(0.0, 1.0) / (std::sqrt(std::numbers::pi) * z);
  CHECK(rel_err(model::faddeeva(z), asym) < 1e-5);
}

TEST_CASE("doppler_average moments") {
  model::SourceParams p;
  const double d = p.gamma_doppler;
  CHECK(std::abs(model::doppler_average([](double) { return cplx(1.0, 0.0); }, p) - cplx(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(model::doppler_average([](double w) { return cplx(w, 0.0); }, p)) < 1e-12 * d);
  const cplx m2 = model::doppler_average([](double w) { return cplx(w * w, 0.0); }, p);
  CHECK(std::abs(m2 - cplx(d * d / 2, 0.0)) < 1e-10 * d * d);
}

TEST_CASE("doppler_average agrees with adaptive quadrature on random rational integrands") {
  model::SourceParams p;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> re(-80.0, 80.0), im(15.0, 40.0), coef(-2.0, 2.0);
  std::bernoulli_distribution flip(0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_poles = 1 + trial % 3;
    std::vector<cplx> poles, coefs;
    for (int k = 0; k < n_poles; ++k) {
      poles.emplace_back(re(rng), flip(rng) ? im(rng) : -im(rng));
      coefs.emplace_back(coef(rng), coef(rng));
    }
    const bool squared = trial % 4 == 3;
    const auto f = [&](double w) {
      cplx s = 0.0;
      for (int k = 0; k < n_poles; ++k) s += coefs[k] / (w - poles[k]);
      return squared ? s * s : s;
    };
    CAPTURE(trial);
    CHECK(rel_err(model::doppler_average(f, p), test::gaussian_average(f, p.gamma_doppler)) < 1e-8);
  }
}

TEST_CASE("doppler_resolvent matches quadrature for poles on both sides of the axis") {
  for (cplx z : {cplx(5.0, 30.0), cplx(-20.0, -25.0), cplx(0.0, 0.5), cplx(-339.0, 0.5)}) {
    const auto f = [&](double w) { return 1.0 / (w - z); };
    CAPTURE(z);
    CHECK(rel_err(model::doppler_resolvent(z, 55.0), test::gaussian_average(f, 55.0)) < 1e-8);
  }
}

TEST_CASE("kernels vanish where their prefactors do") {
  model::SourceParams p;
  auto q = p;
  q.omega_p = 0.0;
  CHECK(std::abs(model::kappa_bar(0.3, q)) == 0.0);
  q = p;
  q.alpha = 0.0;
  CHECK(std::abs(model::kappa_bar(0.3, q)) == 0.0);
  CHECK(std::abs(model::rho_bar(0.3, q)) == 0.0);
  q = p;
  q.gamma_dec = 0.0;
  CHECK(std::abs(model::rho_bar(0.0, q)) == 0.0);
}

TEST_CASE("kernels agree with the adaptive-quadrature oracle") {
  model::SourceParams p;
  for (double delta : {0.0, 0.1}) {
    CAPTURE(delta);
    const cplx k_ref = test::gaussian_average([&](double w) { return model::kappa_integrand(delta, w, p); }, p.gamma_doppler);
    const cplx r_ref = test::gaussian_average([&](double w) { return model::rho_integrand(delta, w, p); }, p.gamma_doppler);
    CHECK(rel_err(model::kappa_bar(delta, p), k_ref) < 1e-8);
    CHECK(rel_err(model::rho_bar(delta, p), r_ref) < 1e-8);
  }
}

TEST_CASE("closed-form and Gauss-Hermite kernels agree at two-photon resonance") {
  model::SourceParams p;
  const auto gh = model::KernelMethod::kGaussHermite;
  CHECK(rel_err(model::kappa_bar(0.0, p, gh), model::kappa_bar(0.0, p)) < 1e-8);
  CHECK(rel_err(model::rho_bar(0.0, p, gh), model::rho_bar(0.0, p)) < 1e-8);
}

TEST_CASE("kernel scaling is exactly linear in alpha and the pump Rabi frequency") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dd(-3.0, 3.0);
  model::SourceParams p;
  for (int i = 0; i < 3; ++i) {
    const double delta = dd(rng);
    auto a2 = p;
    a2.alpha *= 2.7;
    auto w2 = p;
    w2.omega_p *= 1.9;
    const cplx k = model::kappa_bar(delta, p), r = model::rho_bar(delta, p);
    CHECK(rel_err(model::kappa_bar(delta, a2), 2.7 * k) < 1e-10);
    CHECK(rel_err(model::kappa_bar(delta, w2), 1.9 * k) < 1e-10);
    CHECK(rel_err(model::rho_bar(delta, a2), 2.7 * r) < 1e-10);
  }
}

TEST_CASE("optical depth conversion") {
  model::SourceParams p;
  CHECK(model::od_convert(0.0, p) == 0.0);
  CHECK(model::od_convert(370.0, p) == doctest::Approx(5.96).epsilon(0.01));
  CHECK(model::od_convert(93.0, p) == doctest::Approx(1.50).epsilon(0.01));
  double prev = -1.0;
  for (double a = 0.0; a <= 1000.0; a += 12.5) {
    const double m = model::od_convert(a, p);
    CHECK(m > prev);
    CHECK(model::od_invert(m, p) == doctest::Approx(a).epsilon(1e-14));
    prev = m;
  }
  CHECK_THROWS_AS(model::od_convert(-1.0, p), InvalidArgument);
}

TEST_CASE("phase mismatch vanishes for the collinear copropagating case") {
  const auto g = model::BeamGeometry::copropagating();
  CHECK(std::abs(model::phase_mismatch(g, {0.0, 0.0, 0.0, 0.0})) <= 1e-12);
}

TEST_CASE("jitter average is reproducible and reports a standard error") {
  const auto g = model::BeamGeometry::copropagating();
  const auto a = model::jitter_average(g, 20000, 3), b = model::jitter_average(g, 20000, 3);
  CHECK(a.mean_abs == b.mean_abs);
  CHECK(a.std_error > 0.0);
  CHECK(a.std_error < 0.05 * a.mean_abs);
}

TEST_CASE("ultimate brightness limit") {
  CHECK(model::ultimate_brightness_limit({0.0}) == 0.0);
  CHECK(model::ultimate_brightness_limit({0.25}) == doctest::Approx(std::numbers::pi / 2 * 1e6).epsilon(1e-12));
  CHECK(model::ultimate_brightness_limit({1.0 / (2 * std::numbers::pi)}) == doctest::Approx(1e6).epsilon(1e-12));
}

TEST_CASE("invalid parameters are rejected") {
  model::SourceParams p;
  p.alpha = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.omega_c = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

}
