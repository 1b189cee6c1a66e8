#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "sfwm/fitting.hpp"
#include "sfwm/histogram.hpp"
#include "sfwm/rng.hpp"
#include "sfwm/waveform.hpp"

namespace sfwm::detect {

/// Event times are integer picoseconds, as on a time tagger.
using Timestamp = std::int64_t;
inline constexpr double kTick = 1e-12;

inline Timestamp to_ticks(double seconds) { return static_cast<Timestamp>(std::llround(seconds / kTick)); }

/// Inverse-CDF sampler over a sampled G2 (piecewise-linear CDF).
class DelaySampler {
 public:
  explicit DelaySampler(const wave::WavePacket& wp);
  double operator()(double u) const;  // u in [0, 1]
  double cdf(double tau) const;
  double support_min() const { return tau_.front(); }
  double support_max() const { return tau_.back(); }

 private:
  std::vector<double> tau_;
  std::vector<double> cum_;  // normalized, cum_.back() == 1
};

double sample_delay(const wave::WavePacket& wp, double u);

enum class Statistics { kPoisson, kThermal };

struct PhotonPair {
  Timestamp t_as = 0;
  Timestamp t_s = 0;
};

struct PairStreamConfig {
  double generation_rate = 0.0;                 // pairs/s
  std::shared_ptr<const DelaySampler> delay;    // required when generation_rate > 0
  Statistics statistics = Statistics::kPoisson;
  double coherence_time_s = 0.0;                // THERMAL slot length
  std::uint64_t seed = 0;
  // Photons emitted without a partner, sharing the pair intensity in THERMAL mode.
  double unpaired_as_rate = 0.0;
  double unpaired_s_rate = 0.0;

  void validate() const;
};

struct SourceEvents {
  std::vector<PhotonPair> pairs;          // sorted by t_as
  std::vector<Timestamp> unpaired_as;     // sorted
  std::vector<Timestamp> unpaired_s;      // sorted
};

SourceEvents simulate_pair_stream(const PairStreamConfig& cfg, double duration_s);

struct DetectorConfig {
  double eff_as = defaults::kEffAs;
  double eff_s = defaults::kEffS;
  double dark_as = defaults::kDarkAs;
  double dark_s = defaults::kDarkS;
  double leak_as_per_mw = defaults::kLeakAsPerMw;
  double leak_s_per_mw = defaults::kLeakSPerMw;
  double fluorescence_s = defaults::kFluorescenceS;
  double pump_mw = defaults::kPumpMw;
  double coupling_mw = defaults::kCouplingMw;

  double spurious_as() const { return dark_as + leak_as_per_mw * pump_mw; }
  double spurious_s() const { return dark_s + leak_s_per_mw * coupling_mw + fluorescence_s; }
  void validate() const;
};

struct DetectedStreams {
  std::vector<Timestamp> anti_stokes;
  std::vector<Timestamp> stokes;
};

DetectedStreams detect(const SourceEvents& events, const DetectorConfig& det, double duration_s,
                       std::uint64_t seed);

struct HistogramConfig {
  double bin_width_s = defaults::kBinWidth;
  double window_s = defaults::kWindow;
  double start_s = defaults::kWindowStart;
  double duration_s = defaults::kDuration;
  double holdoff_s = 0.0;  // trigger dead time; 0 lets windows overlap

  void validate() const;
};

/// Multi-stop: every Stokes event inside a trigger's window is counted.
CoincidenceHistogram coincidence_histogram(const std::vector<Timestamp>& as_stream,
                                           const std::vector<Timestamp>& s_stream,
                                           const HistogramConfig& cfg);

struct AutoCorrelation {
  double bin_width_s = 0.0;
  std::vector<double> delay_s;  // left bin edges
  std::vector<std::uint64_t> counts;
  std::vector<double> g2;
  std::vector<double> sigma;
};

/// One-sided pair-counting estimator, normalized by the uncorrelated expectation.
AutoCorrelation auto_correlation(const std::vector<Timestamp>& stream, double bin_width_s,
                                 double max_delay_s, double duration_s);

struct SbrResult {
  double value = 0.0;
  bool infinite = false;
  double peak = 0.0;      // counts/bin from the fitted curve
  double baseline = 0.0;  // counts/bin
  double sigma = std::numeric_limits<double>::quiet_NaN();  // from the fit covariance
};

SbrResult measure_sbr(const CoincidenceHistogram& hist, const fit::WavePacketFit& fit);

/// Expected (noise-free) coincidence counts per bin.
struct ExpectedHistogram {
  HistogramConfig config;
  std::vector<double> centers;
  std::vector<double> values;
};

/// coincidences_per_s: detected pair rate; background_rate: counts/s per bin.
ExpectedHistogram synthesize_histogram(const wave::WavePacket& wp, double coincidences_per_s,
                                       double background_rate, const HistogramConfig& cfg);

CoincidenceHistogram poisson_sample(const ExpectedHistogram& expected, Philox& rng);

/// G2 on a grid fine enough to resolve histogram bins of the given width.
wave::WavePacket wavepacket_for_bins(const model::SourceParams& params, double bin_width_s);

}  // namespace sfwm::detect
