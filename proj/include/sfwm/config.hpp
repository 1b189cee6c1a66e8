#pragma once
// Run configuration: JSON with fixed sections, unknown keys rejected, every
// omitted value taken from the defaults table.

#include <cstdint>
#include <string>
#include <vector>

#include "sfwm/analysis.hpp"
#include "sfwm/detection.hpp"
#include "sfwm/model.hpp"
#include "sfwm/waveform.hpp"

namespace sfwm::io {

struct GeometryConfig {
  double length_m = defaults::kLength;
  double angle_jitter_rad = defaults::kAngleJitter;
  int jitter_draws = defaults::kJitterDraws;
};

struct SweepConfig {
  std::vector<double> temperatures{defaults::kTemperatures.begin(), defaults::kTemperatures.end()};
  std::vector<double> pump_mw{2, 4, 6, 8, 10, 12, 14, 16};
  // Optional alpha' per temperature; empty uses the trigger-rate table.
  std::vector<double> od_measured;
  double coupling_mw = defaults::kCouplingMw;
};

struct SimConfig {
  double duration_s = defaults::kDuration;
  std::uint64_t seed = 42;
  detect::Statistics statistics = detect::Statistics::kPoisson;
  double coherence_time_s = 0.0;
  double chunk_s = 1.0;
  double pump_mw = defaults::kPumpMw;
  double temp_c = defaults::kHighT;
  double od_measured = 0.0;  // 0: from temperature
  detect::HistogramConfig histogram;
  double auto_bin_s = defaults::kAutoBin;
  double auto_max_delay_s = 20 * defaults::kAutoBin;
};

struct OutputConfig {
  std::string dir;  // empty: $SFWM_OUT_DIR, then "out"
  std::vector<std::string> formats{"csv", "svg"};
};

struct NumericsConfig {
  wave::SpectralGrid grid;
  unsigned threads = 0;
};

struct RunConfig {
  model::SourceParams physics;
  GeometryConfig geometry;
  detect::DetectorConfig detector;
  analysis::Calibration calibration;
  SweepConfig sweep;
  SimConfig sim;
  OutputConfig output;
  NumericsConfig numerics;

  std::vector<analysis::OperatingPoint> grid() const;
  analysis::OperatingPoint sim_point() const;
  bool wants(const std::string& format) const;
};

/// Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical JSON text (sorted keys, round-trip precision).
std::string serialize(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace sfwm::io
