#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sfwm/analysis.hpp"
#include "sfwm/error.hpp"

using namespace sfwm;
using namespace sfwm::analysis;

namespace {

const Calibration& cal() { return default_calibration(); }

OperatingPoint point_b() {
  auto op = OperatingPoint::at_temperature(defaults::kLowT, 16.0);
  op.od_measured = defaults::kLowOdPoint;
  return op;
}

// Full theory sweep over the standard grid, computed once.
const std::vector<SweepRecord>& full_sweep() {
  static const auto t = sweep(standard_grid(), cal());
  return t;
}

std::vector<double> column(const std::vector<SweepRecord>& s, double (*get)(const SweepRecord&)) {
  std::vector<double> v;
  for (const auto& r : s) v.push_back(get(r));
  return v;
}

std::vector<double> pumps(const std::vector<SweepRecord>& s) {
  return column(s, [](const SweepRecord& r) { return r.op.pump_mw; });
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("trigger-rate law") {
  OperatingPoint op;
  op.od_measured = 6.08;
  op.pump_mw = 16.0;
  CHECK(trigger_rates(op).r_t == doctest::Approx(1.22e5).epsilon(0.01));
  op.pump_mw = 0.0;
  CHECK(trigger_rates(op).r_t == 0.0);
  CHECK(trigger_rates(op).r_s == 0.0);
  op.pump_mw = 16.0;
  op.od_measured = 1.44;
  CHECK(trigger_rates(op).r_t == doctest::Approx(2.88e4).epsilon(0.01));
  CHECK(trigger_rates(op).r_t == doctest::Approx(1.8e3 * 16.0).epsilon(0.05));
  op.od_measured = 8.0;
  CHECK(trigger_rates(op).extrapolated);
}

TEST_CASE("Cauchy-Schwarz factor") {
  CHECK(cauchy_schwarz(0.0, 1.0, 1.0) == 1.0);
  CHECK(cauchy_schwarz(2.7, 1.95, 1.97) == doctest::Approx(3.56).epsilon(0.05 / 3.56));
  CHECK(cauchy_schwarz(3.0, 2.0, 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(cauchy_schwarz(1.0, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("brightness and fraction of the limit") {
  const auto b = brightness(3.7e5, 960e3);
  CHECK(b.brightness == doctest::Approx(3.85e5).epsilon(0.005));
  CHECK(b.fraction == doctest::Approx(0.245).epsilon(0.01));
  CHECK(brightness(0.0, 1e6).brightness == 0.0);
  CHECK(brightness(4.06e4, 2.9e6).brightness == doctest::Approx(1.4e4).epsilon(0.01));
}

TEST_CASE("success probability of a signal-free histogram is zero") {
  CoincidenceHistogram h;
  h.counts.assign(h.n_bins(), 20);
  h.n_triggers = 1000;
  fit::WavePacketFit f;
  f.params = {0.0, 20.0, 0.0, 0.0, 1.0, 5e-9, 80e-9, 60e-9};
  CHECK(success_probability(h, f) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("calibration reproduces its anchors") {
  const auto& c = cal();
  CHECK(c.calibrated());
  CHECK(generation_rate(OperatingPoint::at_temperature(65.0, 16.0), c) == doctest::Approx(3.7e5).epsilon(1e-9));
  // Low-OD baseline: counts per bin accumulated over the reference duration.
  const auto rec = predict_point(point_b(), c);
  CHECK(rec.background_per_bin * defaults::kDuration == doctest::Approx(defaults::kBaselineLowOd).epsilon(0.01));
}

TEST_CASE("zero pump leaves only detector noise in the background") {
  auto op = OperatingPoint::at_temperature(65.0, 0.0);
  CHECK(generation_rate(op, cal()) == 0.0);
  const detect::DetectorConfig d;
  const auto b = point_budget(op, cal(), 0.0, d);
  const double as = d.dark_as, s = d.dark_s + d.leak_s_per_mw * op.coupling_mw + d.fluorescence_s;
  CHECK(b.background_rate == doctest::Approx(as * s * defaults::kBinWidth).epsilon(1e-12));
}

TEST_CASE("anchor point prediction") {
  const auto r = predict_point(OperatingPoint::at_temperature(65.0, 16.0), cal());
  REQUIRE(r.ok());
  CHECK(r.generation_rate == doctest::Approx(3.7e5).epsilon(1e-9));
  CHECK(r.linewidth_hz == doctest::Approx(960e3).epsilon(0.15));
  CHECK(r.brightness == doctest::Approx(3.8e5).epsilon(0.15));
}

TEST_CASE("low-OD pair rate") {
  CHECK(generation_rate(point_b(), cal()) == doctest::Approx(5.1e4).epsilon(0.20));
}

TEST_CASE("rate rises and curves upward with optical depth") {
  // 16 mW, coupling 5.4 Gamma, gamma at the mean of the two representative points.
  auto c = cal();
  c.gamma_low_t = c.gamma_high_t = 0.5 * (cal().gamma_low_t + cal().gamma_high_t);
  std::vector<double> r;
  for (double od = 1.4; od <= 6.1 + 1e-9; od += 0.47) {
    auto op = OperatingPoint::at_temperature(65.0, 16.0);
    op.od_measured = od;
    r.push_back(generation_rate(op, c));
  }
  for (size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
  for (size_t i = 2; i < r.size(); ++i) CHECK(r[i] - 2 * r[i - 1] + r[i - 2] > 0.0);
}

TEST_CASE("theory sweep at high OD obeys the scaling laws") {
  const auto s = series(full_sweep(), 65.0);
  REQUIRE(s.size() == 8);
  const auto P = pumps(s);
  const auto rate = fit::fit_scaling(P, column(s, [](const SweepRecord& r) { return r.generation_rate; }), fit::ScalingModel::kRate);
  CHECK(rate.residual_norm < 1e-6);
  const auto sbr = fit::fit_scaling(P, column(s, [](const SweepRecord& r) { return r.sbr; }), fit::ScalingModel::kSbr);
  CHECK(std::isfinite(sbr.param_a));
  CHECK(std::isfinite(sbr.param_b));
  for (size_t i = 1; i < s.size(); ++i)
    if (P[i - 1] >= std::sqrt(sbr.param_b)) CHECK(s[i].sbr < s[i - 1].sbr);
  const auto S = fit::fit_scaling(P, column(s, [](const SweepRecord& r) { return r.s_product; }), fit::ScalingModel::kS);
  CHECK(fit::eval_scaling(fit::ScalingModel::kS, S.param_a, S.param_b, 16.0) /
            fit::eval_scaling(fit::ScalingModel::kS, S.param_a, S.param_b, 64.0) >
        0.9);
}

TEST_CASE("sweep covers the standard grid with exact brightness") {
  const auto& t = full_sweep();
  CHECK(t.size() == 40);
  for (const auto& r : t) {
    REQUIRE(r.ok());
    CHECK(r.brightness == r.generation_rate / (r.linewidth_hz * 1e-6));
  }
}

TEST_CASE("S product at 16 mW sits near the fitted asymptote") {
  for (double temp : defaults::kTemperatures) {
    const auto s = series(full_sweep(), temp);
    const auto f = fit::fit_scaling(pumps(s), column(s, [](const SweepRecord& r) { return r.s_product; }), fit::ScalingModel::kS);
    CAPTURE(temp);
    CHECK(s.back().s_product == doctest::Approx(f.param_a).epsilon(0.10));
  }
}

TEST_CASE("asymptotic S limit grows with optical depth") {
  double prev = 0.0;
  for (double temp : defaults::kTemperatures) {
    const auto s = series(full_sweep(), temp);
    const auto f = fit::fit_scaling(pumps(s), column(s, [](const SweepRecord& r) { return r.s_product; }), fit::ScalingModel::kS);
    CAPTURE(temp);
    CAPTURE(f.param_a);
    CHECK(f.param_a > prev);
    prev = f.param_a;
  }
}

TEST_CASE("sweep order and values do not depend on the thread count") {
  std::vector<OperatingPoint> g;
  for (double p : {16.0, 4.0, 10.0}) g.push_back(OperatingPoint::at_temperature(53.0, p));
  SweepOptions one, many;
  one.threads = 1;
  many.threads = 3;
  const auto a = sweep(g, cal(), one), b = sweep(g, cal(), many);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].op.pump_mw == b[i].op.pump_mw);
    CHECK(a[i].sbr == b[i].sbr);
    CHECK(a[i].linewidth_hz == b[i].linewidth_hz);
  }
  CHECK(a.front().op.pump_mw == 4.0);
}

TEST_CASE("a failing sweep point is reported, not thrown") {
  std::vector<OperatingPoint> g{OperatingPoint::at_temperature(65.0, 16.0)};
  g.front().pump_mw = -1.0;
  const auto t = sweep(g, cal());
  REQUIRE(t.size() == 1);
  CHECK_FALSE(t.front().ok());
}

TEST_CASE("Monte Carlo SBR agrees with theory") {
  for (const auto& op : {OperatingPoint::at_temperature(65.0, 16.0), point_b()}) {
    const auto th = predict_point(op, cal());
    SimOptions so;
    so.duration_s = 30.0;
    so.seed = 17;
    const auto mc = simulate_point(op, cal(), so);
    const double sigma = mc.sbr.sigma;
    CAPTURE(op.temp_c);
    CAPTURE(sigma);
    CAPTURE(th.sbr);
    CAPTURE(mc.sbr.value);
    CHECK(std::abs(mc.sbr.value - th.sbr) <= 3 * sigma);
  }
}

}
