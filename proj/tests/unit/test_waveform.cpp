#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sfwm/defaults.hpp"
#include "sfwm/error.hpp"
#include "sfwm/waveform.hpp"

using namespace sfwm;
using model::cplx;

namespace {

model::SourceParams high_od() { return {}; }

model::SourceParams low_od() {
  model::SourceParams p;
  p.alpha = defaults::kAlphaLow;
  p.gamma_dec = defaults::kGammaDecLow;
  return p;
}

constexpr std::array<double, 5> kOdSet = {1.44, 2.08, 3.28, 4.96, 6.08};

// G2 at tau by summing the amplitude directly, either ascending or descending in delta.
double direct_g2(const std::vector<cplx>& amp, const wave::SpectralGrid& grid, double tau, double gamma, bool reverse) {
  const auto x = grid.nodes();
  const double t = tau * gamma;
  cplx s = 0.0;
  const size_t n = amp.size();
  for (size_t k = 0; k < n; ++k) {
    const size_t i = reverse ? n - 1 - k : k;
    s += amp[i] * std::exp(cplx(0.0, -x[i] * t));
  }
  return std::norm(s * (gamma * grid.step() / (2.0 * std::numbers::pi)));
}

}  // namespace

TEST_SUITE("waveform") {

TEST_CASE("Parseval holds for the reference parameter sets") {
  for (const auto& p : {high_od(), low_od()}) {
    const double a = wave::integrated_rate(wave::wavepacket(p));
    const double b = wave::spectral_rate(wave::spectrum(p));
    CHECK(std::abs(a - b) <= 1e-6 * b);
  }
}

TEST_CASE("zero optical depth gives a zero amplitude everywhere") {
  auto p = high_od();
  p.alpha = 0.0;
  const wave::SpectralGrid g;
  for (const auto& a : wave::amplitude_spectrum(g.nodes(), p)) CHECK(std::abs(a) == 0.0);
  CHECK(wave::integrated_rate(wave::wavepacket(p)) == 0.0);
}

TEST_CASE("G2 is non-negative with one region above half maximum") {
  for (const auto& p : {high_od(), low_od()}) {
    const auto wp = wave::wavepacket(p);
    CHECK(*std::min_element(wp.values.begin(), wp.values.end()) >= 0.0);
    CHECK_FALSE(wave::fwhm(wp.tau_grid, wp.values).multiple_crossings);
  }
}

TEST_CASE("doubling the pump Rabi frequency scales G2 and F by four") {
  auto p = high_od();
  const auto wp1 = wave::wavepacket(p);
  const auto sp1 = wave::spectrum(p);
  p.omega_p *= 2.0;
  const auto wp2 = wave::wavepacket(p);
  const auto sp2 = wave::spectrum(p);
  const double peak = wp1.peak();
  double worst = 0.0;
  for (size_t i = 0; i < wp1.values.size(); ++i) worst = std::max(worst, std::abs(wp2.values[i] - 4.0 * wp1.values[i]));
  CHECK(worst <= 1e-12 * 4.0 * peak);
  for (size_t i = 0; i < sp1.values.size(); i += 997) CHECK(sp2.values[i] == doctest::Approx(4.0 * sp1.values[i]).epsilon(1e-12));
  CHECK(sp2.fwhm == doctest::Approx(sp1.fwhm).epsilon(1e-6));
  CHECK(wave::integrated_rate(wp2) == doctest::Approx(4.0 * wave::integrated_rate(wp1)).epsilon(1e-12));
}

TEST_CASE("FFT values match a direct sum evaluated in either direction") {
  const auto p = high_od();
  const wave::SpectralGrid g;
  const auto amp = wave::amplitude_spectrum(g.nodes(), p);
  const auto wp = wave::wavepacket(p, g);
  const size_t ipk = std::max_element(wp.values.begin(), wp.values.end()) - wp.values.begin();
  for (size_t m : {ipk, ipk + 40, ipk + 200, ipk - 10}) {
    const double fwd = direct_g2(amp, g, wp.tau_grid[m], p.gamma_nat, false);
    const double rev = direct_g2(amp, g, wp.tau_grid[m], p.gamma_nat, true);
    CAPTURE(m);
    CHECK(std::abs(fwd - rev) <= 1e-9 * fwd);
    CHECK(std::abs(wp.values[m] - fwd) <= 1e-9 * wp.peak());
  }
}

TEST_CASE("integral ratio between parameter sets matches a denser grid") {
  const wave::SpectralGrid dense{defaults::kDeltaHalfSpan, 1 << 18};
  const double coarse = wave::integrated_rate(wave::wavepacket(high_od())) / wave::integrated_rate(wave::wavepacket(low_od()));
  const double fine =
      wave::spectral_rate(wave::spectrum(high_od(), dense)) / wave::spectral_rate(wave::spectrum(low_od(), dense));
  CHECK(coarse == doctest::Approx(fine).epsilon(1e-6));
}

TEST_CASE("pair rate rises and linewidth narrows with optical depth") {
  double prev_rate = 0.0, prev_lw = 1e300;
  for (double od : kOdSet) {
    auto p = high_od();
    p.alpha = model::od_invert(od, p);
    const double rate = wave::spectral_rate(wave::spectrum(p));
    const double lw = wave::spectrum(p).fwhm;
    CAPTURE(od);
    CHECK(rate > prev_rate);
    CHECK(lw < prev_lw);
    prev_rate = rate;
    prev_lw = lw;
  }
}

TEST_CASE("normalized temporal profile depends only weakly on the pump detuning") {
  auto p = high_od();
  const auto a = wave::wavepacket(p);
  p.delta_p *= 0.5;
  const auto b = wave::wavepacket(p);
  const double pa = a.peak(), pb = b.peak();
  double worst = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) worst = std::max(worst, std::abs(a.values[i] / pa - b.values[i] / pb));
  MESSAGE("max deviation of the normalized profile for half the pump detuning: " << worst);
  CHECK(worst < 0.05);
}

TEST_CASE("fwhm on analytic shapes") {
  std::vector<double> x, lor, gau;
  const double gl = 0.7, sigma = 1.3;
  for (int i = -4000; i <= 4000; ++i) {
    const double t = i * 0.005;
    x.push_back(t);
    lor.push_back(1.0 / (1.0 + (t / gl) * (t / gl)));
    gau.push_back(std::exp(-t * t / (2 * sigma * sigma)));
  }
  CHECK(wave::fwhm(x, lor).width == doctest::Approx(2 * gl).epsilon(1e-4));
  CHECK(wave::fwhm(x, gau).width == doctest::Approx(2 * sigma * std::sqrt(2 * std::log(2.0))).epsilon(1e-4));
  CHECK(wave::fwhm({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}).width == doctest::Approx(1.0));
  CHECK_THROWS_AS(wave::fwhm({0.0, 1.0}, {1.0, 0.0}), FwhmError);
}

TEST_CASE("grid guards") {
  CHECK_THROWS_AS(wave::wavepacket(high_od(), wave::SpectralGrid{1.0, 4096}), GridError);
  CHECK_THROWS_AS(wave::wavepacket(high_od(), wave::SpectralGrid{40.0, 5000}), InvalidArgument);
  CHECK_THROWS_AS(wave::check_tails({cplx(1.0), cplx(2.0), cplx(1.0)}), GridError);
}

}
