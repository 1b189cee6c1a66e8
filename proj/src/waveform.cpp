#include "sfwm/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sfwm/error.hpp"
#include "sfwm/fft.hpp"

namespace sfwm::wave {

std::vector<double> SpectralGrid::nodes() const {
  std::vector<double> x(n_points);
  const double dx = step();
  for (int n = 0; n < n_points; ++n) x[n] = (n - n_points / 2) * dx;
  return x;
}

double WavePacket::peak() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

WavePacket WavePacket::cropped(double rel_threshold) const {
  const double thr = rel_threshold * peak();
  size_t lo = 0, hi = values.size();
  while (lo < values.size() && values[lo] < thr) ++lo;
  while (hi > lo && values[hi - 1] < thr) --hi;
  WavePacket out;
  out.params_snapshot = params_snapshot;
  out.tau_grid.assign(tau_grid.begin() + lo, tau_grid.begin() + hi);
  out.values.assign(values.begin() + lo, values.begin() + hi);
  return out;
}

WavePacket WavePacket::window(double t_lo, double t_hi) const {
  WavePacket out;
  out.params_snapshot = params_snapshot;
  for (size_t i = 0; i < tau_grid.size(); ++i) {
    if (tau_grid[i] >= t_lo && tau_grid[i] <= t_hi) {
      out.tau_grid.push_back(tau_grid[i]);
      out.values.push_back(values[i]);
    }
  }
  return out;
}

cplx complex_sinc(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

std::vector<cplx> amplitude_spectrum(const std::vector<double>& delta_grid, const SourceParams& params) {
  params.validate();
  std::vector<cplx> out(delta_grid.size());
  for (size_t n = 0; n < delta_grid.size(); ++n) {
    const double x = delta_grid[n];
    const cplx rho = model::rho_bar(x, params);
    out[n] = model::kappa_bar(x, params) * complex_sinc(rho) * std::exp(cplx(0.0, 1.0) * rho);
  }
  return out;
}

void check_tails(const std::vector<cplx>& amplitude, double tail_tol) {
  if (amplitude.size() < 3) throw GridError("spectral grid has fewer than 3 points");
  double peak = 0.0;
  for (const auto& a : amplitude) peak = std::max(peak, std::norm(a));
  if (peak == 0.0) return;
  const double ends = std::max(std::norm(amplitude.front()), std::norm(amplitude.back()));
  if (ends > tail_tol * peak)
    throw GridError("spectral power at the grid ends is " + std::to_string(ends / peak) +
                    " of the peak (limit " + std::to_string(tail_tol) + ")");
}

namespace {

// a(T_m) = (dx / 2 pi) sum_n A_n exp(-i x_n T_m), x_n = (n - N/2) dx, T_m = (m - N/2) dT.
// With N divisible by 4 the centring phases reduce to (-1)^(n+m).
std::vector<double> g2_from_amplitude(const std::vector<cplx>& amp, double dx, double gamma) {
  const size_t n = amp.size();
  std::vector<cplx> buf(n);
  for (size_t i = 0; i < n; ++i) buf[i] = (i % 2 ? -amp[i] : amp[i]);
  dft(buf, -1);
  std::vector<double> g2(n);
  const double scale = gamma * dx / (2.0 * std::numbers::pi);
  for (size_t m = 0; m < n; ++m) g2[m] = std::norm(buf[m] * scale);
  return g2;
}

void require_grid(const SpectralGrid& grid) {
  const int n = grid.n_points;
  if (n < 4096 || (n & (n - 1)) != 0)
    throw InvalidArgument("n_points must be a power of two >= 4096");
  if (!(grid.half_span > 0)) throw InvalidArgument("half_span must be > 0");
}

}  // namespace

WavePacket wavepacket(const SourceParams& params, const SpectralGrid& grid, bool check_resolution) {
  require_grid(grid);
  const int n = grid.n_points;
  const double dx = grid.step();
  const double gamma = params.gamma_nat;

  std::vector<cplx> amp;
  std::vector<double> g2_fine;
  if (check_resolution) {
    SpectralGrid fine{grid.half_span, 2 * n};
    const auto amp_fine = amplitude_spectrum(fine.nodes(), params);
    check_tails(amp_fine);
    amp.resize(n);
    for (int i = 0; i < n; ++i) amp[i] = amp_fine[2 * i];
    g2_fine = g2_from_amplitude(amp_fine, fine.step(), gamma);
  } else {
    amp = amplitude_spectrum(grid.nodes(), params);
    check_tails(amp);
  }

  WavePacket wp;
  wp.params_snapshot = params;
  wp.values = g2_from_amplitude(amp, dx, gamma);
  const double dtau = 2.0 * std::numbers::pi / (n * dx) / gamma;
  wp.tau_grid.resize(n);
  for (int m = 0; m < n; ++m) wp.tau_grid[m] = (m - n / 2) * dtau;

  if (check_resolution) {
    const double peak = wp.peak();
    double worst = 0.0;
    for (int m = 0; m < n; ++m) worst = std::max(worst, std::abs(wp.values[m] - g2_fine[m + n / 2]));
    if (peak > 0 && worst > 1e-3 * peak)
      throw ResolutionError("doubling the grid changes G2 by " + std::to_string(worst / peak) +
                            " of the peak");
  }
  return wp;
}

WavePacket wavepacket(const SourceParams& params, double tau_span, int n_points) {
  if (!(tau_span > 0)) throw InvalidArgument("tau_span must be > 0");
  SpectralGrid grid;
  grid.n_points = n_points;
  const double dx = 2.0 * std::numbers::pi / (params.gamma_nat * tau_span);
  grid.half_span = 0.5 * dx * n_points;
  return wavepacket(params, grid, true);
}

SpectralProfile spectrum(const SourceParams& params, const SpectralGrid& grid) {
  require_grid(grid);
  const auto x = grid.nodes();
  const auto amp = amplitude_spectrum(x, params);
  check_tails(amp);
  SpectralProfile sp;
  sp.delta_grid.resize(x.size());
  sp.values.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    sp.delta_grid[i] = x[i] * params.gamma_nat;
    sp.values[i] = std::norm(amp[i]);
  }
  const auto w = fwhm(sp.delta_grid, sp.values);
  sp.fwhm = w.width / (2.0 * std::numbers::pi);
  sp.multiple_crossings = w.multiple_crossings;
  return sp;
}

FwhmResult fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = y.size();
  if (n < 3 || x.size() != n) throw FwhmError("fwhm: need at least 3 samples and matching sizes");
  const size_t imax = static_cast<size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  FwhmResult r;
  r.peak = y[imax];
  r.peak_x = x[imax];
  if (!(r.peak > 0)) throw FwhmError("fwhm: curve has no positive maximum");
  if (imax == 0 || imax == n - 1) throw FwhmError("fwhm: maximum at the grid end");
  const double half = 0.5 * r.peak;
  size_t lo = 0;
  while (y[lo] < half) ++lo;
  size_t hi = n - 1;
  while (y[hi] < half) --hi;
  if (lo == 0) throw FwhmError("fwhm: no half-maximum crossing on the left");
  if (hi == n - 1) throw FwhmError("fwhm: no half-maximum crossing on the right");
  const auto cross = [&](size_t a, size_t b) {
    return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
  };
  r.left = cross(lo - 1, lo);
  r.right = cross(hi, hi + 1);
  r.width = r.right - r.left;
  for (size_t i = lo; i <= hi; ++i) {
    if (y[i] < half) {
      r.multiple_crossings = true;
      break;
    }
  }
  return r;
}

double integrated_rate(const WavePacket& wp) {
  double s = 0.0;
  for (size_t i = 1; i < wp.values.size(); ++i)
    s += 0.5 * (wp.values[i] + wp.values[i - 1]) * (wp.tau_grid[i] - wp.tau_grid[i - 1]);
  return s;
}

double spectral_rate(const SpectralProfile& sp) {
  double s = 0.0;
  for (size_t i = 1; i < sp.values.size(); ++i)
    s += 0.5 * (sp.values[i] + sp.values[i - 1]) * (sp.delta_grid[i] - sp.delta_grid[i - 1]);
  return s / (2.0 * std::numbers::pi);
}

}  // namespace sfwm::wave
