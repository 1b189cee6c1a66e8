#pragma once
// Operating points, calibration to absolute rates, theory and Monte Carlo
// sweeps, and the figures of merit derived from them.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfwm/defaults.hpp"
#include "sfwm/detection.hpp"
#include "sfwm/fitting.hpp"
#include "sfwm/model.hpp"

namespace sfwm::analysis {

struct OperatingPoint {
  double pump_mw = defaults::kPumpMw;
  double temp_c = defaults::kHighT;
  double od_measured = defaults::kAnchorOd;  // alpha'
  double coupling_mw = defaults::kCouplingMw;

  void validate() const;
  /// alpha' looked up (linear in temperature) from the trigger-rate table.
  static OperatingPoint at_temperature(double temp_c, double pump_mw);
};

double od_for_temperature(double temp_c);

struct Calibration {
  double rate_scale = 0.0;  // pairs/s per unit of the integral of G2; 0 until calibrated
  double omega_p_per_sqrt_mw = defaults::kOmegaPPerSqrtMw;
  double background_window_s = defaults::kWindow;
  double gamma_slope = defaults::kGammaSlope;  // Gamma per mW away from the anchor power
  double gamma_low_t = defaults::kGammaAtLowT;
  double gamma_high_t = defaults::kGammaAtHighT;
  double low_t = defaults::kLowT;
  double high_t = defaults::kHighT;
  double anchor_rate = defaults::kAnchorRate;
  double anchor_pump_mw = defaults::kAnchorPumpMw;
  double anchor_od = defaults::kAnchorOd;
  double anchor_temp_c = defaults::kHighT;
  // Unpaired Stokes emission per mW of pump, fixed by the low-OD baseline; < 0 until calibrated.
  double unpaired_s_per_mw = -1.0;
  double low_od_point = defaults::kLowOdPoint;
  double low_od_temp_c = defaults::kLowT;
  double baseline_low_od = defaults::kBaselineLowOd;  // counts/bin over the reference duration

  bool calibrated() const { return rate_scale > 0 && unpaired_s_per_mw >= 0; }
  void validate() const;
};

/// Fills rate_scale from the anchor rate and unpaired_s_per_mw from the low-OD baseline.
Calibration calibrate(Calibration cal = {}, const detect::DetectorConfig& det = {});

/// Shared default calibration (computed once).
const Calibration& default_calibration();

double gamma_for(const OperatingPoint& op, const Calibration& cal);
/// Model parameters at the operating point, gamma including the pump-induced growth.
model::SourceParams source_params(const OperatingPoint& op, const Calibration& cal);
/// As source_params but with gamma held at its anchor-power value; the pair rate uses
/// these so that it stays proportional to the pump power.
model::SourceParams rate_params(const OperatingPoint& op, const Calibration& cal);

struct TriggerRates {
  double r_t = 0.0;
  double r_s = 0.0;
  bool extrapolated = false;  // alpha' outside the tabulated range [1, 7]
};

TriggerRates trigger_rates(const OperatingPoint& op);

/// Photon budget of one operating point, shared by the theory and Monte Carlo paths.
struct PointBudget {
  double generation_rate = 0.0;     // pairs/s
  double coincidence_rate = 0.0;    // detected pairs/s
  double trigger_rate = 0.0;        // detected anti-Stokes/s
  double stokes_rate = 0.0;         // detected Stokes/s
  double unpaired_as = 0.0;         // emitted/s
  double unpaired_s = 0.0;          // emitted/s
  double background_rate = 0.0;     // accidental counts/s per histogram bin
  detect::DetectorConfig detector;
};

PointBudget point_budget(const OperatingPoint& op, const Calibration& cal, double generation_rate,
                         const detect::DetectorConfig& det = {}, double bin_width_s = defaults::kBinWidth);

/// Pair rate from the model, pairs/s.
double generation_rate(const OperatingPoint& op, const Calibration& cal);

enum class Mode { kTheory, kMonteCarlo };
const char* to_string(Mode m);

struct SweepRecord {
  OperatingPoint op;
  Mode mode = Mode::kTheory;
  std::uint64_t seed = 0;
  double generation_rate = 0.0;   // pairs/s
  double linewidth_hz = 0.0;
  double sbr = 0.0;
  bool sbr_infinite = false;
  double brightness = 0.0;        // pairs/s/MHz
  double s_product = 0.0;         // brightness * SBR
  double background_per_bin = 0.0;  // counts/s per bin
  double r_t = 0.0;
  double r_s = 0.0;
  double success_probability = 0.0;
  double detected_pair_rate = 0.0;
  double temporal_fwhm_s = 0.0;
  std::string error;              // empty when the point succeeded

  bool ok() const { return error.empty(); }
};

struct BrightnessResult {
  double brightness = 0.0;  // pairs/s/MHz
  double fraction = 0.0;    // of the ultimate limit
};

BrightnessResult brightness(double rate, double linewidth_hz);

double cauchy_schwarz(double r_sb, double g_aa, double g_ss);

/// Stokes detections above the fitted baseline per anti-Stokes trigger.
double success_probability(const CoincidenceHistogram& hist, const fit::WavePacketFit& fit);

struct TheoryOptions {
  detect::HistogramConfig histogram;
  detect::DetectorConfig detector;
  bool fit_sbr = true;  // SBR from a phenomenological fit of the expected histogram; else from its maximum bin
};

SweepRecord predict_point(const OperatingPoint& op, const Calibration& cal, const TheoryOptions& opts = {});

struct SimOptions {
  double duration_s = defaults::kDuration;
  std::uint64_t seed = 1;
  detect::Statistics statistics = detect::Statistics::kPoisson;
  double coherence_time_s = 0.0;  // THERMAL slot; 0 uses the theory wave-packet FWHM
  double chunk_s = 1.0;           // source generated in chunks to bound memory
  detect::HistogramConfig histogram;
  detect::DetectorConfig detector;
  bool auto_correlations = false;
  double auto_bin_s = defaults::kAutoBin;
  double auto_max_delay_s = 20 * defaults::kAutoBin;
  std::size_t keep_events = 0;  // leading timestamps of each detected stream kept in the result
};

struct SimResult {
  SweepRecord record;
  CoincidenceHistogram histogram;
  fit::WavePacketFit fit;
  detect::SbrResult sbr;
  std::size_t n_as = 0;
  std::size_t n_s = 0;
  std::optional<detect::AutoCorrelation> g2_as;
  std::optional<detect::AutoCorrelation> g2_s;
  double coherence_time_s = 0.0;
  detect::DetectedStreams events;  // first keep_events of each stream
};

/// Detected streams for a pair source, generated chunk by chunk.
detect::DetectedStreams simulate_detected(const detect::PairStreamConfig& cfg, const detect::DetectorConfig& det,
                                          double duration_s, double chunk_s);

SimResult simulate_point(const OperatingPoint& op, const Calibration& cal, const SimOptions& opts = {});

/// Temporal and spectral widths of the model at fixed parameters.
struct TheoryWidths {
  double temporal_fwhm_s = 0.0;   // of the phenomenological fit to the binned G2
  double raw_fwhm_s = 0.0;        // outermost half-maximum crossings of G2 itself
  double spectral_fwhm_hz = 0.0;  // of F(delta)
  double fit_linewidth_hz = 0.0;  // Fourier procedure applied to the fit
  bool spectral_multiple_crossings = false;
  fit::WavePacketFit fit;
};

TheoryWidths theory_widths(const model::SourceParams& params, double bin_width_s = defaults::kBinWidth);

/// The 5 temperatures x 8 pump powers grid.
std::vector<OperatingPoint> standard_grid();

struct SweepOptions {
  Mode mode = Mode::kTheory;
  TheoryOptions theory;
  SimOptions sim;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Sorted by (temp, pump); failed points keep their error message.
std::vector<SweepRecord> sweep(std::vector<OperatingPoint> grid, const Calibration& cal, const SweepOptions& opts = {});

/// Records of one temperature series, in pump order.
std::vector<SweepRecord> series(const std::vector<SweepRecord>& table, double temp_c);

}  // namespace sfwm::analysis
