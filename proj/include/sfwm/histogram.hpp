#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sfwm/defaults.hpp"

namespace sfwm {

/// Delay-time coincidence counts, Stokes time minus anti-Stokes trigger time.
/// Bin i covers [start_s + i bin_width_s, start_s + (i+1) bin_width_s).
struct CoincidenceHistogram {
  double bin_width_s = defaults::kBinWidth;
  double window_s = defaults::kWindow;
  double start_s = defaults::kWindowStart;
  double duration_s = defaults::kDuration;
  std::vector<std::uint64_t> counts;
  std::uint64_t n_triggers = 0;

  int n_bins() const { return static_cast<int>(std::llround(window_s / bin_width_s)); }
  double bin_center(int i) const { return start_s + (i + 0.5) * bin_width_s; }
  std::vector<double> centers() const {
    std::vector<double> c(counts.size());
    for (size_t i = 0; i < c.size(); ++i) c[i] = bin_center(static_cast<int>(i));
    return c;
  }
  std::vector<double> values() const { return {counts.begin(), counts.end()}; }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

}  // namespace sfwm
