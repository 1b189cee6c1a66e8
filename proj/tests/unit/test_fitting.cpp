#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sfwm/error.hpp"
#include "sfwm/fitting.hpp"
#include "sfwm/waveform.hpp"

using namespace sfwm;
using fit::PhenomParams;

namespace {

constexpr double kBin = 0.8e-9;

std::vector<double> bin_centres(int n = 2000, double start = -200e-9) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(start + (i + 0.5) * kBin);
  return t;
}

std::vector<double> sample(const std::vector<double>& t, const PhenomParams& p) {
  std::vector<double> y;
  for (double ti : t) y.push_back(fit::eval_phenomenological(ti, p));
  return y;
}

fit::FitOptions noiseless() {
  fit::FitOptions o;
  o.poisson_weights = false;
  o.compute_linewidth = false;
  return o;
}

}  // namespace

TEST_SUITE("fitting") {

TEST_CASE("phenomenological curve limits and special value") {
  const PhenomParams p{80.0, 7.0, 3.0, 10e-9, 1.4, 5e-9, 70e-9, 60e-9};
  CHECK(fit::eval_phenomenological(-1.0, p) == doctest::Approx(2 * p.epsilon + p.baseline).epsilon(1e-12));
  CHECK(fit::eval_phenomenological(1.0, p) == doctest::Approx(p.baseline).epsilon(1e-12));
  const PhenomParams q{1.0, 0.0, 0.0, 0.0, 1.0, 1e-8, 1e-8, 5e-8};
  CHECK(fit::eval_phenomenological(0.0, q) == doctest::Approx(1.0 + std::erf(5.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central differences") {
  const PhenomParams p{80.0, 7.0, 3.0, 10e-9, 1.4, 5e-9, 70e-9, 60e-9};
  for (double t : {-30e-9, 5e-9, 40e-9, 120e-9}) {
    const auto g = fit::phenomenological_gradient(t, p);
    const auto base = p.as_array();
    for (int k = 0; k < 8; ++k) {
      auto hi = base, lo = base;
      const double h = 1e-4 * (base[k] != 0.0 ? std::abs(base[k]) : 1e-9);
      hi[k] += h;
      lo[k] -= h;
      const double fd = (fit::eval_phenomenological(t, PhenomParams::from_array(hi)) -
                         fit::eval_phenomenological(t, PhenomParams::from_array(lo))) /
                        (2 * h);
      CAPTURE(t);
      CAPTURE(k);
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("noiseless curves are recovered for random admissible parameters") {
  std::mt19937_64 rng(11);
  auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const auto t = bin_centres();
  for (int trial = 0; trial < 25; ++trial) {
    const PhenomParams truth{u(50, 500), u(1, 20), u(0.5, 10), u(-20e-9, 40e-9), u(0.8, 3.0),
                             u(2e-9, 10e-9), u(30e-9, 150e-9), u(40e-9, 150e-9)};
    const auto f = fit::fit_curve(t, sample(t, truth), kBin, noiseless());
    const auto got = f.params.as_array(), want = truth.as_array();
    for (int k = 0; k < 8; ++k) {
      CAPTURE(trial);
      CAPTURE(PhenomParams::names[k]);
      CHECK(std::abs(got[k] - want[k]) <= 1e-6 * std::abs(want[k]));
    }
  }
}

TEST_CASE("fitted FWHM under Poisson noise is unbiased at the high-OD scale") {
  // About 170 counts/bin at the peak over a baseline of 50.
  PhenomParams truth{1.0, 50.0, 2.0, 0.0, 1.5, 5e-9, 90e-9, 60e-9};
  const auto t = bin_centres();
  double top = 0.0;
  for (double ti : t) top = std::max(top, fit::eval_phenomenological(ti, truth) - truth.baseline);
  truth.a_amp = (170.0 - truth.baseline) / top;
  std::vector<double> fine_t, fine_y;
  for (double ti = t.front(); ti <= t.back(); ti += kBin / 10) {
    fine_t.push_back(ti);
    fine_y.push_back(fit::eval_phenomenological(ti, truth) - truth.baseline);
  }
  const double true_fwhm = wave::fwhm(fine_t, fine_y).width;
  const auto mean = sample(t, truth);

  std::mt19937_64 rng(5);
  std::vector<double> widths;
  for (int r = 0; r < 100; ++r) {
    std::vector<double> y;
    for (double m : mean) y.push_back(static_cast<double>(std::poisson_distribution<long>(m)(rng)));
    fit::FitOptions o;
    o.compute_linewidth = false;
    widths.push_back(fit::fit_curve(t, y, kBin, o).temporal_fwhm);
  }
  double m = 0, s = 0;
  for (double x : widths) m += x;
  m /= widths.size();
  for (double x : widths) s += (x - m) * (x - m);
  s = std::sqrt(s / (widths.size() - 1));
  int inside = 0;
  for (double x : widths) inside += std::abs(x - true_fwhm) <= 3 * s;
  MESSAGE("true FWHM " << true_fwhm * 1e9 << " ns, mean " << m * 1e9 << " ns, sd " << s * 1e9 << " ns");
  CHECK(inside >= 97);
  CHECK(std::abs(m - true_fwhm) <= s);
}

TEST_CASE("linewidth of an exponential decay") {
  const double tau = 50e-9;
  const auto r = fit::linewidth_from_curve([&](double t) { return t >= 0 ? std::exp(-t / tau) : 0.0; }, -2e-6, 20e-6, 0.1e-9);
  CHECK(r.fwhm_hz == doctest::Approx(1.0 / (2 * std::numbers::pi * tau)).epsilon(1e-3));
  CHECK(r.lorentz_residual < 1e-2);
}

TEST_CASE("linewidth from a fit ignores amplitude and time offset") {
  const auto t = bin_centres();
  const PhenomParams p{120.0, 10.0, 4.0, 15e-9, 1.3, 4e-9, 80e-9, 70e-9};
  fit::WavePacketFit f;
  f.params = p;
  const double lw = fit::linewidth_from_fit(f).fwhm_hz;
  auto q = f;
  q.params.a_amp *= 3.7;
  q.params.epsilon *= 3.7;
  CHECK(std::abs(fit::linewidth_from_fit(q).fwhm_hz - lw) <= 1e-9 * lw);
  q = f;
  q.params.t0 += 37e-9;
  CHECK(std::abs(fit::linewidth_from_fit(q).fwhm_hz - lw) <= 1e-9 * lw);
}

TEST_CASE("scaling fits recover exact inputs") {
  std::vector<double> P, sbr, lw, s_prod, rate;
  for (int p = 2; p <= 16; p += 2) {
    P.push_back(p);
    sbr.push_back(fit::eval_scaling(fit::ScalingModel::kSbr, 10.0, 4.0, p));
    lw.push_back(fit::eval_scaling(fit::ScalingModel::kLinewidth, 0.02, 0.9, p));
    s_prod.push_back(fit::eval_scaling(fit::ScalingModel::kS, 8e5, 6.0, p));
    rate.push_back(2.3e4 * p);
  }
  const auto a = fit::fit_scaling(P, sbr, fit::ScalingModel::kSbr);
  CHECK(std::abs(a.param_a - 10.0) <= 1e-8 * 10.0);
  CHECK(std::abs(a.param_b - 4.0) <= 1e-8 * 4.0);
  const auto b = fit::fit_scaling(P, lw, fit::ScalingModel::kLinewidth);
  CHECK(b.param_a == doctest::Approx(0.02).epsilon(1e-10));
  CHECK(b.param_b == doctest::Approx(0.9).epsilon(1e-10));
  const auto c = fit::fit_scaling(P, s_prod, fit::ScalingModel::kS);
  CHECK(c.asymptote == doctest::Approx(fit::eval_scaling(fit::ScalingModel::kS, 8e5, 6.0, 64.0)).epsilon(0.01));
  CHECK(fit::fit_scaling(P, rate, fit::ScalingModel::kRate).residual_norm < 1e-12);
}

TEST_CASE("scaling fits under 1% noise stay within 5 sigma") {
  struct Case {
    fit::ScalingModel m;
    double a, b;
  };
  const Case cases[] = {{fit::ScalingModel::kSbr, 300.0, 20.0},
                        {fit::ScalingModel::kLinewidth, 0.03, 0.9},
                        {fit::ScalingModel::kBrightness, 4e5, 6.0},
                        {fit::ScalingModel::kS, 1e6, 8.0}};
  std::mt19937_64 rng(99);
  constexpr int kTrials = 200;
  for (const auto& c : cases) {
    std::vector<double> fa, fb, sa;
    for (int trial = 0; trial < kTrials; ++trial) {
      std::vector<double> P, y;
      for (int p = 2; p <= 16; p += 2) {
        P.push_back(p);
        const double v = fit::eval_scaling(c.m, c.a, c.b, p);
        y.push_back(v * (1.0 + 0.01 * std::normal_distribution<double>()(rng)));
      }
      const auto f = fit::fit_scaling(P, y, c.m);
      fa.push_back(f.param_a);
      fb.push_back(f.param_b);
      sa.push_back(f.sigma_a);
    }
    // Spread of the estimates over the trials.
    const auto sd = [](const std::vector<double>& v, double truth) {
      double acc = 0;
      for (double x : v) acc += (x - truth) * (x - truth);
      return std::sqrt(acc / v.size());
    };
    const double sd_a = sd(fa, c.a), sd_b = sd(fb, c.b);
    const std::string model_name = fit::to_string(c.m);
    CAPTURE(model_name);
    for (int i = 0; i < kTrials; ++i) {
      CHECK(std::abs(fa[i] - c.a) <= 5 * sd_a);
      CHECK(std::abs(fb[i] - c.b) <= 5 * sd_b);
    }
    // The reported standard error tracks the observed spread.
    std::sort(sa.begin(), sa.end());
    CHECK(sa[kTrials / 2] == doctest::Approx(sd_a).epsilon(0.5));
  }
}

TEST_CASE("scaling fit needs three points") {
  CHECK_THROWS_AS(fit::fit_scaling({1.0, 2.0}, {1.0, 2.0}, fit::ScalingModel::kSbr), RankError);
}

}
