#include "sfwm/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "sfwm/error.hpp"

namespace sfwm::detect {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

// Substream ids of the master seed.
constexpr std::uint64_t kSourceStream = 1;
constexpr std::uint64_t kDetectStream = 2;

}  // namespace

// ---- delay sampling ---------------------------------------------------------------------

DelaySampler::DelaySampler(const wave::WavePacket& wp) : tau_(wp.tau_grid) {
  require(tau_.size() >= 2 && wp.values.size() == tau_.size(), "DelaySampler: need at least 2 samples");
  cum_.assign(tau_.size(), 0.0);
  for (size_t i = 1; i < tau_.size(); ++i) {
    const double a = std::max(wp.values[i - 1], 0.0), b = std::max(wp.values[i], 0.0);
    cum_[i] = cum_[i - 1] + 0.5 * (a + b) * (tau_[i] - tau_[i - 1]);
  }
  const double total = cum_.back();
  require(total > 0, "DelaySampler: wave packet has zero weight");
  for (double& c : cum_) c /= total;
  cum_.back() = 1.0;
}

double DelaySampler::operator()(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
  const size_t i = static_cast<size_t>(it - cum_.begin());
  if (i == 0) return tau_.front();
  const double frac = (u - cum_[i - 1]) / (cum_[i] - cum_[i - 1]);
  return tau_[i - 1] + frac * (tau_[i] - tau_[i - 1]);
}

double DelaySampler::cdf(double tau) const {
  if (tau <= tau_.front()) return 0.0;
  if (tau >= tau_.back()) return 1.0;
  const auto it = std::upper_bound(tau_.begin(), tau_.end(), tau);
  const size_t i = static_cast<size_t>(it - tau_.begin());
  const double frac = (tau - tau_[i - 1]) / (tau_[i] - tau_[i - 1]);
  return cum_[i - 1] + frac * (cum_[i] - cum_[i - 1]);
}

double sample_delay(const wave::WavePacket& wp, double u) { return DelaySampler(wp)(u); }

// ---- source ---------------------------------------------------------------------------------

void PairStreamConfig::validate() const {
  require(generation_rate >= 0 && unpaired_as_rate >= 0 && unpaired_s_rate >= 0, "rates must be >= 0");
  require(generation_rate == 0 || delay != nullptr, "a delay sampler is required when pairs are generated");
  require(statistics == Statistics::kPoisson || coherence_time_s > 0, "THERMAL mode needs coherence_time_s > 0");
}

SourceEvents simulate_pair_stream(const PairStreamConfig& cfg, double duration) {
  cfg.validate();
  require(duration > 0, "simulate_pair_stream: duration must be > 0");
  SourceEvents ev;
  const double total = cfg.generation_rate + cfg.unpaired_as_rate + cfg.unpaired_s_rate;
  if (total == 0) return ev;
  Philox rng = Philox(cfg.seed).substream(kSourceStream);

  const auto emit = [&](double t) {
    const double v = rng.uniform() * total;
    const Timestamp tt = to_ticks(t);
    if (v < cfg.generation_rate) {
      const double tau = (*cfg.delay)(rng.uniform());
      ev.pairs.push_back({tt, tt + to_ticks(tau)});
    } else if (v < cfg.generation_rate + cfg.unpaired_as_rate) {
      ev.unpaired_as.push_back(tt);
    } else {
      ev.unpaired_s.push_back(tt);
    }
  };

  if (cfg.statistics == Statistics::kPoisson) {
    double t = 0.0;
    for (;;) {
      t += rng.exponential(total);
      if (t >= duration) break;
      emit(t);
    }
  } else {
    // Exponentially distributed slot intensity makes the per-slot count geometric with
    // mean mu; empty slots are skipped with a geometric jump.
    const double tc = cfg.coherence_time_s;
    const double mu = total * tc;
    const double r = mu / (1.0 + mu);
    const double n_slots = std::ceil(duration / tc);
    double slot = -1.0;
    for (;;) {
      const double skip = std::floor(std::log(rng.uniform_pos()) / std::log1p(-r));
      slot += 1.0 + skip;
      if (!(slot < n_slots)) break;
      const double extra = std::floor(std::log(rng.uniform_pos()) / std::log(r));
      const long n = 1 + static_cast<long>(std::min(extra, 1e9));
      for (long k = 0; k < n; ++k) {
        const double t = (slot + rng.uniform()) * tc;
        if (t < duration) emit(t);
      }
    }
  }
  std::sort(ev.pairs.begin(), ev.pairs.end(), [](const PhotonPair& a, const PhotonPair& b) {
    return a.t_as != b.t_as ? a.t_as < b.t_as : a.t_s < b.t_s;
  });
  std::sort(ev.unpaired_as.begin(), ev.unpaired_as.end());
  std::sort(ev.unpaired_s.begin(), ev.unpaired_s.end());
  return ev;
}

// ---- detectors -------------------------------------------------------------------------------

void DetectorConfig::validate() const {
  require(eff_as >= 0 && eff_as <= 1 && eff_s >= 0 && eff_s <= 1, "efficiencies must lie in [0, 1]");
  require(dark_as >= 0 && dark_s >= 0 && leak_as_per_mw >= 0 && leak_s_per_mw >= 0 && fluorescence_s >= 0,
          "detector rates must be >= 0");
  require(pump_mw >= 0 && coupling_mw >= 0, "powers must be >= 0");
}

DetectedStreams detect(const SourceEvents& ev, const DetectorConfig& det, double duration, std::uint64_t seed) {
  det.validate();
  require(duration > 0, "detect: duration must be > 0");
  Philox rng = Philox(seed).substream(kDetectStream);
  DetectedStreams out;
  out.anti_stokes.reserve(static_cast<size_t>(ev.pairs.size() * det.eff_as + ev.unpaired_as.size() * det.eff_as +
                                              det.spurious_as() * duration * 1.1 + 16));
  out.stokes.reserve(static_cast<size_t>(ev.pairs.size() * det.eff_s + ev.unpaired_s.size() * det.eff_s +
                                         det.spurious_s() * duration * 1.1 + 16));
  for (const auto& p : ev.pairs) {
    if (rng.uniform() < det.eff_as) out.anti_stokes.push_back(p.t_as);
    if (rng.uniform() < det.eff_s) out.stokes.push_back(p.t_s);
  }
  for (Timestamp t : ev.unpaired_as)
    if (rng.uniform() < det.eff_as) out.anti_stokes.push_back(t);
  for (Timestamp t : ev.unpaired_s)
    if (rng.uniform() < det.eff_s) out.stokes.push_back(t);

  const auto spurious = [&](double rate, std::vector<Timestamp>& dst) {
    if (rate <= 0) return;
    double t = 0.0;
    for (;;) {
      t += rng.exponential(rate);
      if (t >= duration) break;
      dst.push_back(to_ticks(t));
    }
  };
  spurious(det.spurious_as(), out.anti_stokes);
  spurious(det.spurious_s(), out.stokes);
  std::sort(out.anti_stokes.begin(), out.anti_stokes.end());
  std::sort(out.stokes.begin(), out.stokes.end());
  return out;
}

// ---- histograms ------------------------------------------------------------------------------

void HistogramConfig::validate() const {
  require(bin_width_s > 0 && window_s > 0 && duration_s > 0, "histogram widths and duration must be > 0");
  require(holdoff_s >= 0, "holdoff_s must be >= 0");
  const double nb = window_s / bin_width_s;
  require(std::abs(nb - std::round(nb)) < 1e-9 * nb, "window must be an integer number of bins");
  require(std::abs(bin_width_s / kTick - std::round(bin_width_s / kTick)) < 1e-6,
          "bin width must be a whole number of picoseconds");
}

CoincidenceHistogram coincidence_histogram(const std::vector<Timestamp>& as, const std::vector<Timestamp>& s,
                                           const HistogramConfig& cfg) {
  cfg.validate();
  CoincidenceHistogram h;
  h.bin_width_s = cfg.bin_width_s;
  h.window_s = cfg.window_s;
  h.start_s = cfg.start_s;
  h.duration_s = cfg.duration_s;
  const int nb = h.n_bins();
  h.counts.assign(nb, 0);
  const Timestamp bin = to_ticks(cfg.bin_width_s);
  const Timestamp start = to_ticks(cfg.start_s);
  const Timestamp width = bin * nb;
  const Timestamp holdoff = to_ticks(cfg.holdoff_s);
  Timestamp last = std::numeric_limits<Timestamp>::min();
  size_t j = 0;
  for (const Timestamp t : as) {
    if (holdoff > 0 && last != std::numeric_limits<Timestamp>::min() && t - last < holdoff) continue;
    last = t;
    ++h.n_triggers;
    const Timestamp lo = t + start;
    while (j < s.size() && s[j] < lo) ++j;
    for (size_t k = j; k < s.size() && s[k] < lo + width; ++k) ++h.counts[(s[k] - lo) / bin];
  }
  return h;
}

AutoCorrelation auto_correlation(const std::vector<Timestamp>& stream, double bin_width, double max_delay,
                                 double duration) {
  require(bin_width > 0 && max_delay >= bin_width && duration > max_delay,
          "auto_correlation: need bin <= max_delay < duration");
  const size_t n = stream.size();
  if (n < 10000)
    throw InsufficientEventsError("auto_correlation: " + std::to_string(n) + " events, need at least 10000");
  const Timestamp b = to_ticks(bin_width);
  const int nk = static_cast<int>(std::ceil(max_delay / bin_width - 1e-9));
  const Timestamp reach = b * nk;
  AutoCorrelation out;
  out.bin_width_s = bin_width;
  out.counts.assign(nk, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n && stream[j] - stream[i] < reach; ++j) ++out.counts[(stream[j] - stream[i]) / b];
  }
  const double nn = static_cast<double>(n);
  const double bs = b * kTick;
  for (int k = 0; k < nk; ++k) {
    // Ordered pairs expected in [k b, (k+1) b) for a uniform stream on [0, T].
    const double expected = nn * (nn - 1.0) / (duration * duration) * (bs * duration - (2.0 * k + 1.0) * bs * bs / 2.0);
    out.delay_s.push_back(k * bs);
    out.g2.push_back(out.counts[k] / expected);
    out.sigma.push_back(std::sqrt(static_cast<double>(out.counts[k])) / expected);
  }
  return out;
}

SbrResult measure_sbr(const CoincidenceHistogram& hist, const fit::WavePacketFit& fit) {
  SbrResult r;
  r.baseline = fit.params.baseline;
  const auto centers = hist.centers();
  const auto peak_of = [&](const fit::PhenomParams& p) {
    double peak = -std::numeric_limits<double>::infinity();
    if (centers.empty()) return peak;
    const double step = hist.bin_width_s / 10.0;
    for (double t = centers.front(); t <= centers.back(); t += step)
      peak = std::max(peak, fit::eval_phenomenological(t, p));
    return peak;
  };
  r.peak = peak_of(fit.params);
  if (!(r.baseline > 0)) {
    r.infinite = true;
    r.value = std::numeric_limits<double>::infinity();
    return r;
  }
  r.value = (r.peak - r.baseline) / r.baseline;

  // Delta method with central differences of the SBR in each parameter.
  const auto base = fit.params.as_array();
  std::array<double, 8> grad{};
  for (int k = 0; k < 8; ++k) {
    const double h = 1e-5 * std::max(std::abs(base[k]), k >= 3 && k != 4 ? 1e-9 : 1e-3);
    auto hi = base, lo = base;
    hi[k] += h;
    lo[k] -= h;
    const auto sbr_at = [&](const std::array<double, 8>& a) {
      const auto q = fit::PhenomParams::from_array(a);
      return (peak_of(q) - q.baseline) / q.baseline;
    };
    grad[k] = (sbr_at(hi) - sbr_at(lo)) / (2 * h);
  }
  double var = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) var += grad[i] * fit.covariance[i][j] * grad[j];
  if (std::isfinite(var)) r.sigma = std::sqrt(std::max(var, 0.0));
  return r;
}

// ---- synthetic histograms ------------------------------------------------------------------------

ExpectedHistogram synthesize_histogram(const wave::WavePacket& wp, double coincidences_per_s, double background_rate,
                                       const HistogramConfig& cfg) {
  cfg.validate();
  require(wp.tau_grid.size() >= 2, "synthesize_histogram: empty wave packet");
  std::vector<double> cum(wp.values.size(), 0.0);
  for (size_t i = 1; i < cum.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (wp.values[i] + wp.values[i - 1]) * (wp.tau_grid[i] - wp.tau_grid[i - 1]);
  const double total = cum.back();
  const auto C = [&](double x) {
    if (x <= wp.tau_grid.front()) return 0.0;
    if (x >= wp.tau_grid.back()) return total;
    const auto it = std::upper_bound(wp.tau_grid.begin(), wp.tau_grid.end(), x);
    const size_t i = static_cast<size_t>(it - wp.tau_grid.begin());
    const double frac = (x - wp.tau_grid[i - 1]) / (wp.tau_grid[i] - wp.tau_grid[i - 1]);
    return cum[i - 1] + frac * (cum[i] - cum[i - 1]);
  };
  ExpectedHistogram h;
  h.config = cfg;
  const int nb = static_cast<int>(std::llround(cfg.window_s / cfg.bin_width_s));
  for (int i = 0; i < nb; ++i) {
    const double lo = cfg.start_s + i * cfg.bin_width_s;
    const double frac = total > 0 ? (C(lo + cfg.bin_width_s) - C(lo)) / total : 0.0;
    h.centers.push_back(lo + 0.5 * cfg.bin_width_s);
    h.values.push_back(cfg.duration_s * (coincidences_per_s * frac + background_rate));
  }
  return h;
}

CoincidenceHistogram poisson_sample(const ExpectedHistogram& e, Philox& rng) {
  CoincidenceHistogram h;
  h.bin_width_s = e.config.bin_width_s;
  h.window_s = e.config.window_s;
  h.start_s = e.config.start_s;
  h.duration_s = e.config.duration_s;
  for (double m : e.values) {
    std::poisson_distribution<std::uint64_t> pd(std::max(m, 0.0));
    h.counts.push_back(m > 0 ? pd(rng) : 0);
  }
  return h;
}

wave::WavePacket wavepacket_for_bins(const model::SourceParams& params, double bin_width_s) {
  require(bin_width_s > 0, "wavepacket_for_bins: bin width must be > 0");
  const double dtau = bin_width_s / 8.0;
  const double window = 40e-6;
  wave::SpectralGrid grid;
  grid.half_span = std::numbers::pi / (params.gamma_nat * dtau);
  const double dx_max = 2.0 * std::numbers::pi / (params.gamma_nat * window);
  int n = 4096;
  while (2.0 * grid.half_span / n > dx_max) n *= 2;
  grid.n_points = n;
  return wave::wavepacket(params, grid, false).window(-2e-6, 20e-6);
}

}  // namespace sfwm::detect
