#include "sfwm/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "sfwm/error.hpp"
#include "sfwm/rng.hpp"
#include "sfwm/waveform.hpp"

namespace sfwm::analysis {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

// Piecewise-linear through (xs, ys), extended linearly past the ends.
template <size_t N>
double interp(const std::array<double, N>& xs, const std::array<double, N>& ys, double x) {
  size_t i = 1;
  while (i + 1 < N && x > xs[i]) ++i;
  const double f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + f * (ys[i] - ys[i - 1]);
}

model::SourceParams unit_pump(model::SourceParams p) {
  p.omega_p = 1.0;
  return p;
}

struct UnitSpectrum {
  double rate = 0.0;       // integral of G2 at unit pump Rabi frequency, s^-1
  double linewidth = 0.0;  // Hz
};

UnitSpectrum unit_spectrum(const model::SourceParams& params) {
  const auto sp = wave::spectrum(unit_pump(params));
  return {wave::spectral_rate(sp), sp.fwhm};
}

double fitted_peak(const std::vector<double>& centers, double bin_width, const fit::PhenomParams& p) {
  double peak = -std::numeric_limits<double>::infinity();
  if (centers.empty()) return peak;
  const double step = bin_width / 10.0;
  for (double t = centers.front(); t <= centers.back(); t += step)
    peak = std::max(peak, fit::eval_phenomenological(t, p));
  return peak;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id) { return Philox(seed).substream(id)(); }

}  // namespace

// ---- operating points -----------------------------------------------------------------------

void OperatingPoint::validate() const {
  require(pump_mw >= 0 && pump_mw <= 64, "pump_mw must lie in [0, 64]");
  require(od_measured > 0, "od_measured must be > 0");
  require(coupling_mw >= 0, "coupling_mw must be >= 0");
}

double od_for_temperature(double temp_c) {
  const auto& t = defaults::kTemperatures;
  require(temp_c >= t.front() && temp_c <= t.back(),
          "temperature " + std::to_string(temp_c) + " C outside the tabulated range [38, 65]");
  return interp(t, defaults::kOdMeasured, temp_c);
}

OperatingPoint OperatingPoint::at_temperature(double temp_c, double pump_mw) {
  OperatingPoint op;
  op.temp_c = temp_c;
  op.pump_mw = pump_mw;
  op.od_measured = od_for_temperature(temp_c);
  return op;
}

std::vector<OperatingPoint> standard_grid() {
  std::vector<OperatingPoint> grid;
  for (double t : defaults::kTemperatures)
    for (int p = 2; p <= 16; p += 2) grid.push_back(OperatingPoint::at_temperature(t, p));
  return grid;
}

// ---- calibration --------------------------------------------------------------------------------

void Calibration::validate() const {
  require(rate_scale >= 0, "calibration.rate_scale must be >= 0");
  require(omega_p_per_sqrt_mw > 0, "calibration.omega_p_per_sqrt_mw must be > 0");
  require(background_window_s > 0, "calibration.background_window_s must be > 0");
  require(gamma_slope >= 0, "calibration.gamma_slope must be >= 0");
  require(gamma_low_t >= 0 && gamma_high_t >= 0, "calibration gamma endpoints must be >= 0");
  require(high_t > low_t, "calibration.high_t must exceed low_t");
  require(anchor_rate > 0 && anchor_pump_mw > 0 && anchor_od > 0, "calibration anchor must be > 0");
  require(low_od_point > 0 && baseline_low_od > 0, "calibration low-OD anchor must be > 0");
}

double gamma_for(const OperatingPoint& op, const Calibration& cal) {
  const double f = std::clamp((op.temp_c - cal.low_t) / (cal.high_t - cal.low_t), 0.0, 1.0);
  const double g0 = cal.gamma_low_t + f * (cal.gamma_high_t - cal.gamma_low_t);
  return std::max(0.0, g0 + cal.gamma_slope * (op.pump_mw - cal.anchor_pump_mw));
}

model::SourceParams source_params(const OperatingPoint& op, const Calibration& cal) {
  op.validate();
  model::SourceParams p;
  p.alpha = model::od_invert(op.od_measured, p);
  p.omega_p = cal.omega_p_per_sqrt_mw * std::sqrt(op.pump_mw);
  p.gamma_dec = gamma_for(op, cal);
  return p;
}

Calibration calibrate(Calibration cal, const detect::DetectorConfig& det) {
  cal.validate();
  OperatingPoint anchor;
  anchor.pump_mw = cal.anchor_pump_mw;
  anchor.temp_c = cal.anchor_temp_c;
  anchor.od_measured = cal.anchor_od;
  const auto pa = rate_params(anchor, cal);
  cal.rate_scale = cal.anchor_rate / (unit_spectrum(pa).rate * pa.omega_p * pa.omega_p);

  // The low-OD baseline fixes the Stokes singles not explained by pairs and detector noise.
  OperatingPoint low = anchor;
  low.temp_c = cal.low_od_temp_c;
  low.od_measured = cal.low_od_point;
  cal.unpaired_s_per_mw = 0.0;
  const double rate_b = generation_rate(low, cal);
  const auto b = point_budget(low, cal, rate_b, det);
  const double stokes_needed = cal.baseline_low_od / (b.trigger_rate * defaults::kBinWidth * defaults::kDuration);
  const double extra = det.eff_s > 0 ? (stokes_needed - b.stokes_rate) / det.eff_s : 0.0;
  cal.unpaired_s_per_mw = std::max(0.0, extra) / low.pump_mw;
  return cal;
}

const Calibration& default_calibration() {
  static const Calibration cal = calibrate();
  return cal;
}

// ---- rates ------------------------------------------------------------------------------------------

TriggerRates trigger_rates(const OperatingPoint& op) {
  op.validate();
  TriggerRates r;
  const double kt = defaults::kTriggerPerOdPerMw * op.od_measured;
  const double ks = interp(defaults::kOdMeasured, defaults::kKs, op.od_measured);
  r.r_t = kt * op.pump_mw;
  // Equal to k_s P at the reference power; the excess over R_t grows as P^2.
  r.r_s = r.r_t + (ks - kt) * op.pump_mw * op.pump_mw / defaults::kSinglesReferenceMw;
  r.extrapolated = op.od_measured < 1.0 || op.od_measured > 7.0;
  return r;
}

model::SourceParams rate_params(const OperatingPoint& op, const Calibration& cal) {
  auto p = source_params(op, cal);
  p.gamma_dec = std::max(0.0, p.gamma_dec - cal.gamma_slope * (op.pump_mw - cal.anchor_pump_mw));
  return p;
}

double generation_rate(const OperatingPoint& op, const Calibration& cal) {
  require(cal.rate_scale > 0, "calibration has no rate scale");
  const auto p = rate_params(op, cal);
  return cal.rate_scale * unit_spectrum(p).rate * p.omega_p * p.omega_p;
}

PointBudget point_budget(const OperatingPoint& op, const Calibration& cal, double rate,
                         const detect::DetectorConfig& det, double bin_width_s) {
  require(rate >= 0, "generation rate must be >= 0");
  PointBudget b;
  b.detector = det;
  b.detector.pump_mw = op.pump_mw;
  b.detector.coupling_mw = op.coupling_mw;
  b.detector.validate();
  const double ea = b.detector.eff_as, es = b.detector.eff_s;
  const double r_t = trigger_rates(op).r_t;
  b.generation_rate = rate;
  b.coincidence_rate = rate * ea * es;
  b.unpaired_as = ea > 0 ? std::max(0.0, r_t - rate * ea - b.detector.spurious_as()) / ea : 0.0;
  b.unpaired_s = std::max(0.0, cal.unpaired_s_per_mw) * op.pump_mw;
  b.trigger_rate = (rate + b.unpaired_as) * ea + b.detector.spurious_as();
  b.stokes_rate = (rate + b.unpaired_s) * es + b.detector.spurious_s();
  b.background_rate = b.trigger_rate * b.stokes_rate * bin_width_s;
  return b;
}

// ---- figures of merit -------------------------------------------------------------------------------

const char* to_string(Mode m) { return m == Mode::kTheory ? "theory" : "mc"; }

BrightnessResult brightness(double rate, double linewidth_hz) {
  require(linewidth_hz > 0, "linewidth must be > 0");
  require(rate >= 0, "rate must be >= 0");
  BrightnessResult r;
  r.brightness = rate / (linewidth_hz * 1e-6);
  r.fraction = r.brightness / model::ultimate_brightness_limit({defaults::kLimitRatio});
  return r;
}

double cauchy_schwarz(double r_sb, double g_aa, double g_ss) {
  require(g_aa > 0 && g_ss > 0, "auto-correlations must be > 0");
  require(r_sb >= 0, "r_sb must be >= 0");
  return (1.0 + r_sb) * (1.0 + r_sb) / (g_aa * g_ss);
}

double success_probability(const CoincidenceHistogram& hist, const fit::WavePacketFit& fit) {
  if (hist.n_triggers == 0) throw InvalidArgument("success_probability: histogram has zero triggers");
  const double above = static_cast<double>(hist.total()) - fit.params.baseline * hist.counts.size();
  return std::max(0.0, above) / static_cast<double>(hist.n_triggers);
}

// ---- theory path --------------------------------------------------------------------------------------

SweepRecord predict_point(const OperatingPoint& op, const Calibration& cal, const TheoryOptions& opts) {
  require(cal.calibrated(), "predict_point needs a calibrated Calibration");
  opts.histogram.validate();
  const auto params = source_params(op, cal);
  const auto us = unit_spectrum(params);
  SweepRecord rec;
  rec.op = op;
  rec.mode = Mode::kTheory;
  rec.generation_rate = generation_rate(op, cal);
  rec.linewidth_hz = us.linewidth;
  const auto tr = trigger_rates(op);
  rec.r_t = tr.r_t;
  rec.r_s = tr.r_s;
  const auto b = point_budget(op, cal, rec.generation_rate, opts.detector, opts.histogram.bin_width_s);
  rec.background_per_bin = b.background_rate;
  rec.detected_pair_rate = b.coincidence_rate;

  const auto wp = detect::wavepacket_for_bins(unit_pump(params), opts.histogram.bin_width_s);
  if (rec.generation_rate > 0) {
    const auto e = detect::synthesize_histogram(wp, b.coincidence_rate, b.background_rate, opts.histogram);
    const double base = b.background_rate * opts.histogram.duration_s;
    double sum = 0.0;
    for (double v : e.values) sum += v;
    rec.success_probability =
        b.trigger_rate > 0 ? (sum - base * e.values.size()) / (b.trigger_rate * opts.histogram.duration_s) : 0.0;
    if (opts.fit_sbr) {
      fit::FitOptions fo;
      fo.compute_linewidth = false;
      const auto f = fit::fit_curve(e.centers, e.values, opts.histogram.bin_width_s, fo);
      rec.temporal_fwhm_s = f.temporal_fwhm;
      const double peak = fitted_peak(e.centers, opts.histogram.bin_width_s, f.params);
      if (f.params.baseline > 0) {
        rec.sbr = (peak - f.params.baseline) / f.params.baseline;
      } else {
        rec.sbr_infinite = true;
        rec.sbr = std::numeric_limits<double>::infinity();
      }
    } else {
      const double peak = *std::max_element(e.values.begin(), e.values.end());
      rec.sbr = base > 0 ? (peak - base) / base : std::numeric_limits<double>::infinity();
      rec.sbr_infinite = !(base > 0);
      rec.temporal_fwhm_s = wave::fwhm(wp.tau_grid, wp.values).width;
    }
  } else {
    rec.temporal_fwhm_s = wave::fwhm(wp.tau_grid, wp.values).width;
  }
  const auto br = brightness(rec.generation_rate, rec.linewidth_hz);
  rec.brightness = br.brightness;
  rec.s_product = rec.sbr_infinite ? std::numeric_limits<double>::infinity() : rec.brightness * rec.sbr;
  return rec;
}

// ---- Monte Carlo path -------------------------------------------------------------------------------------

detect::DetectedStreams simulate_detected(const detect::PairStreamConfig& cfg, const detect::DetectorConfig& det,
                                          double duration_s, double chunk_s) {
  cfg.validate();
  det.validate();
  require(duration_s > 0 && chunk_s > 0, "duration and chunk length must be > 0");
  double chunk = chunk_s;
  if (cfg.statistics == detect::Statistics::kThermal)
    chunk = std::max(1.0, std::round(chunk_s / cfg.coherence_time_s)) * cfg.coherence_time_s;
  const auto n_chunks = static_cast<std::uint64_t>(std::ceil(duration_s / chunk - 1e-12));
  detect::DetectedStreams out;
  for (std::uint64_t k = 0; k < n_chunks; ++k) {
    const double t0 = k * chunk;
    const double len = std::min(chunk, duration_s - t0);
    if (len <= 0) break;
    auto c = cfg;
    c.seed = derive_seed(cfg.seed, 2 * k);
    const auto ev = detect::simulate_pair_stream(c, len);
    const auto d = detect::detect(ev, det, len, derive_seed(cfg.seed, 2 * k + 1));
    const detect::Timestamp off = detect::to_ticks(t0);
    for (auto t : d.anti_stokes) out.anti_stokes.push_back(t + off);
    for (auto t : d.stokes) out.stokes.push_back(t + off);
  }
  std::sort(out.anti_stokes.begin(), out.anti_stokes.end());
  std::sort(out.stokes.begin(), out.stokes.end());
  return out;
}

SimResult simulate_point(const OperatingPoint& op, const Calibration& cal, const SimOptions& opts) {
  require(cal.calibrated(), "simulate_point needs a calibrated Calibration");
  require(opts.duration_s > 0, "sim duration must be > 0");
  const auto params = source_params(op, cal);
  const double rate = generation_rate(op, cal);
  auto hc = opts.histogram;
  hc.duration_s = opts.duration_s;
  hc.validate();
  const auto b = point_budget(op, cal, rate, opts.detector, hc.bin_width_s);

  const auto wp = detect::wavepacket_for_bins(unit_pump(params), hc.bin_width_s);
  SimResult res;
  res.coherence_time_s =
      opts.coherence_time_s > 0 ? opts.coherence_time_s : wave::fwhm(wp.tau_grid, wp.values).width;

  detect::PairStreamConfig pc;
  pc.generation_rate = rate;
  pc.delay = std::make_shared<detect::DelaySampler>(wp);
  pc.statistics = opts.statistics;
  pc.coherence_time_s = res.coherence_time_s;
  pc.seed = opts.seed;
  pc.unpaired_as_rate = b.unpaired_as;
  pc.unpaired_s_rate = b.unpaired_s;
  const auto streams = simulate_detected(pc, b.detector, opts.duration_s, opts.chunk_s);
  res.n_as = streams.anti_stokes.size();
  res.n_s = streams.stokes.size();
  const auto head = [&](const std::vector<detect::Timestamp>& v) {
    return std::vector<detect::Timestamp>(v.begin(), v.begin() + std::min(v.size(), opts.keep_events));
  };
  res.events = {head(streams.anti_stokes), head(streams.stokes)};

  res.histogram = detect::coincidence_histogram(streams.anti_stokes, streams.stokes, hc);
  res.fit = fit::fit_wavepacket(res.histogram);
  res.sbr = detect::measure_sbr(res.histogram, res.fit);
  if (opts.auto_correlations) {
    res.g2_as = detect::auto_correlation(streams.anti_stokes, opts.auto_bin_s, opts.auto_max_delay_s, opts.duration_s);
    res.g2_s = detect::auto_correlation(streams.stokes, opts.auto_bin_s, opts.auto_max_delay_s, opts.duration_s);
  }

  SweepRecord& rec = res.record;
  rec.op = op;
  rec.mode = Mode::kMonteCarlo;
  rec.seed = opts.seed;
  rec.generation_rate = rate;
  rec.linewidth_hz = res.fit.linewidth_hz;
  rec.sbr = res.sbr.value;
  rec.sbr_infinite = res.sbr.infinite;
  rec.background_per_bin = res.fit.params.baseline / opts.duration_s;
  rec.r_t = static_cast<double>(res.n_as) / opts.duration_s;
  rec.r_s = trigger_rates(op).r_s;
  rec.success_probability = res.histogram.n_triggers > 0 ? success_probability(res.histogram, res.fit) : 0.0;
  rec.detected_pair_rate = rec.success_probability * res.histogram.n_triggers / opts.duration_s;
  rec.temporal_fwhm_s = res.fit.temporal_fwhm;
  if (rec.linewidth_hz > 0) {
    rec.brightness = brightness(rate, rec.linewidth_hz).brightness;
    rec.s_product = rec.sbr_infinite ? std::numeric_limits<double>::infinity() : rec.brightness * rec.sbr;
  }
  return res;
}

TheoryWidths theory_widths(const model::SourceParams& params, double bin_width_s) {
  TheoryWidths w;
  const auto sp = wave::spectrum(params);
  w.spectral_fwhm_hz = sp.fwhm;
  w.spectral_multiple_crossings = sp.multiple_crossings;
  const auto wp = detect::wavepacket_for_bins(params, bin_width_s);
  w.raw_fwhm_s = wave::fwhm(wp.tau_grid, wp.values).width;
  // Noise-free binned curve, scaled to a 1000-count peak.
  detect::HistogramConfig hc;
  hc.bin_width_s = bin_width_s;
  hc.window_s = std::round(defaults::kWindow / bin_width_s) * bin_width_s;
  auto e = detect::synthesize_histogram(wp, 1.0, 0.0, hc);
  const double peak = *std::max_element(e.values.begin(), e.values.end());
  if (!(peak > 0)) throw InvalidArgument("theory_widths: wave packet vanishes");
  for (double& v : e.values) v *= 1000.0 / peak;
  fit::FitOptions fo;
  fo.poisson_weights = false;
  w.fit = fit::fit_curve(e.centers, e.values, bin_width_s, fo);
  w.temporal_fwhm_s = w.fit.temporal_fwhm;
  w.fit_linewidth_hz = w.fit.linewidth_hz;
  return w;
}

// ---- sweeps -------------------------------------------------------------------------------------------------

std::vector<SweepRecord> sweep(std::vector<OperatingPoint> grid, const Calibration& cal, const SweepOptions& opts) {
  require(!grid.empty(), "sweep: empty grid");
  std::stable_sort(grid.begin(), grid.end(), [](const OperatingPoint& a, const OperatingPoint& b) {
    return a.temp_c != b.temp_c ? a.temp_c < b.temp_c : a.pump_mw < b.pump_mw;
  });
  std::vector<SweepRecord> out(grid.size());
  std::atomic<size_t> next{0};
  const auto work = [&] {
    for (size_t i = next++; i < grid.size(); i = next++) {
      const std::uint64_t seed = derive_seed(opts.sim.seed, i);
      try {
        if (opts.mode == Mode::kTheory) {
          out[i] = predict_point(grid[i], cal, opts.theory);
        } else {
          auto so = opts.sim;
          so.seed = seed;
          out[i] = simulate_point(grid[i], cal, so).record;
        }
      } catch (const std::exception& e) {
        out[i] = SweepRecord{};
        out[i].op = grid[i];
        out[i].mode = opts.mode;
        out[i].error = e.what();
      }
      if (opts.mode == Mode::kMonteCarlo) out[i].seed = seed;
    }
  };
  unsigned n = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(grid.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

std::vector<SweepRecord> series(const std::vector<SweepRecord>& table, double temp_c) {
  std::vector<SweepRecord> out;
  for (const auto& r : table)
    if (r.op.temp_c == temp_c) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const SweepRecord& a, const SweepRecord& b) { return a.op.pump_mw < b.op.pump_mw; });
  return out;
}

}  // namespace sfwm::analysis
