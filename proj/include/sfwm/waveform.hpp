#pragma once

#include <complex>
#include <vector>

#include "sfwm/model.hpp"

namespace sfwm::wave {

using model::cplx;
using model::SourceParams;

/// Uniform two-photon-detuning grid x_n = (n - N/2) dx, in units of Gamma.
struct SpectralGrid {
  double half_span = defaults::kDeltaHalfSpan;
  int n_points = defaults::kGridPoints;

  double step() const { return 2.0 * half_span / n_points; }
  std::vector<double> nodes() const;
};

struct WavePacket {
  std::vector<double> tau_grid;  // s
  std::vector<double> values;    // G2, s^-2
  SourceParams params_snapshot;

  double step() const { return tau_grid.size() > 1 ? tau_grid[1] - tau_grid[0] : 0.0; }
  double peak() const;
  /// Smallest contiguous range holding every sample above rel_threshold * peak.
  WavePacket cropped(double rel_threshold) const;
  /// Restricted to [t_lo, t_hi].
  WavePacket window(double t_lo, double t_hi) const;
};

struct SpectralProfile {
  std::vector<double> delta_grid;  // rad/s
  std::vector<double> values;      // F(delta)
  double fwhm = 0.0;               // Hz
  bool multiple_crossings = false;
};

struct FwhmResult {
  double width = 0.0;
  double left = 0.0;
  double right = 0.0;
  double peak_x = 0.0;
  double peak = 0.0;
  bool multiple_crossings = false;
};

/// Complex biphoton amplitude kappa sinc(rho) exp(i rho) at each delta (units of Gamma).
std::vector<cplx> amplitude_spectrum(const std::vector<double>& delta_grid, const SourceParams& params);

/// Throws GridError when the spectral power at either grid end exceeds tail_tol of the peak.
void check_tails(const std::vector<cplx>& amplitude, double tail_tol = 1e-4);

/// Sampled G2(tau) on the full FFT window implied by the grid. With check_resolution the
/// transform is repeated at twice the points and compared on the common nodes.
WavePacket wavepacket(const SourceParams& params, const SpectralGrid& grid = {},
                      bool check_resolution = true);

/// Grid chosen so the FFT window spans at least tau_span seconds.
WavePacket wavepacket(const SourceParams& params, double tau_span, int n_points);

SpectralProfile spectrum(const SourceParams& params, const SpectralGrid& grid = {});

FwhmResult fwhm(const std::vector<double>& x, const std::vector<double>& y);

/// Trapezoid integral of G2 over tau, s^-1.
double integrated_rate(const WavePacket& wp);

/// (1/2 pi) integral of F over delta (rad/s), the Parseval counterpart of integrated_rate.
double spectral_rate(const SpectralProfile& sp);

cplx complex_sinc(cplx z);

}  // namespace sfwm::wave
