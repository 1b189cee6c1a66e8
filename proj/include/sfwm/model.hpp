#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "sfwm/defaults.hpp"

namespace sfwm::model {

using cplx = std::complex<double>;

/// Effective parameters of the Doppler-broadened double-Lambda medium.
/// Rabi frequencies and rates are in units of gamma_nat except where noted.
struct SourceParams {
  double alpha = defaults::kAlpha;
  double omega_p = defaults::kOmegaP;
  double omega_c = defaults::kOmegaC;
  double gamma_dec = defaults::kGammaDec;
  double gamma_nat = defaults::kGammaNat;          // rad/s
  double gamma_doppler = defaults::kGammaDoppler;
  double delta_p = defaults::kDeltaP;              // rad/s

  double delta_p_units() const { return delta_p / gamma_nat; }
  // Throws InvalidArgument naming the first bad field.
  void validate() const;
};

enum class Field { kPump = 0, kCoupling = 1, kAntiStokes = 2, kStokes = 3 };

struct BeamGeometry {
  double length_m = defaults::kLength;
  // Pump and anti-Stokes share the D2 line, coupling and Stokes the D1 line. The
  // anti-Stokes and Stokes frequencies follow from energy conservation with the
  // ground-state splitting, so the collinear sum cancels term by term.
  double lambda_pump_line = defaults::kLambdaD2;      // m, vacuum
  double lambda_coupling_line = defaults::kLambdaD1;  // m, vacuum
  double pump_detuning_hz = defaults::kDeltaP / defaults::kTwoPi;
  double splitting_hz = defaults::kHyperfineSplitting;
  // +1 forward, -1 backward along z, indexed by Field.
  std::array<int, 4> direction_signs = {1, 1, 1, 1};
  double angle_jitter_rad = defaults::kAngleJitter;

  void validate() const;
  double wavenumber(Field f) const;  // rad/m
  std::array<double, 4> wavelengths() const;

  static BeamGeometry copropagating();
  // Pump and anti-Stokes forward, coupling and Stokes backward.
  static BeamGeometry counterpropagating();
};

struct BrightnessLimitInput {
  double width_to_separation = defaults::kLimitRatio;
};

// ---- Faddeeva and quadrature ----------------------------------------------------

/// w(z) = exp(-z^2) erfc(-iz), valid on the whole plane.
cplx faddeeva(cplx z);

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // for weight exp(-x^2)
};

/// n-point rule; cached, thread safe.
const GaussHermiteRule& gauss_hermite_rule(int n);

struct QuadratureOptions {
  int initial_nodes = 32;
  int max_nodes = 4096;
  double rel_tol = 1e-9;
};

/// Gaussian velocity average  int dw exp(-w^2/D^2)/(sqrt(pi) D) f(w),  w in units of Gamma.
cplx doppler_average(const std::function<cplx(double)>& integrand, const SourceParams& params,
                     const QuadratureOptions& opts = {});

/// Average of 1/(w - z) over the Doppler distribution of width d (units of Gamma).
cplx doppler_resolvent(cplx z, double d);

enum class KernelMethod { kClosedForm, kGaussHermite };

/// Coupling kernel at two-photon detuning delta (units of Gamma).
cplx kappa_bar(double delta, const SourceParams& params,
               KernelMethod method = KernelMethod::kClosedForm);
/// Phase kernel at two-photon detuning delta (units of Gamma).
cplx rho_bar(double delta, const SourceParams& params,
             KernelMethod method = KernelMethod::kClosedForm);

// Raw integrands before velocity averaging (w in units of Gamma).
cplx kappa_integrand(double delta, double w, const SourceParams& params);
cplx rho_integrand(double delta, double w, const SourceParams& params);

// ---- optical depth ----------------------------------------------------------------

/// Entire-atom OD to measured resonant OD.
double od_convert(double alpha, const SourceParams& params);
double od_invert(double alpha_measured, const SourceParams& params);

// ---- phase mismatch ---------------------------------------------------------------

/// Longitudinal mismatch for per-beam tilts (rad) measured from each beam's nominal axis.
/// Tilts are taken relative to the pump direction: angles[kPump] is subtracted from all.
double phase_mismatch(const BeamGeometry& geometry, const std::array<double, 4>& angles);

struct JitterEstimate {
  double mean_abs = 0.0;     // rad
  double std_error = 0.0;    // rad
  double nominal = 0.0;      // mismatch at zero tilt, after compensation
  double compensation_angle = 0.0;  // rad, nominal anti-Stokes angle used
  int draws = 0;
};

/// Mean |mismatch| over independent uniform tilts in +-angle_jitter_rad per beam.
/// A nonzero collinear mismatch is first cancelled by tilting the anti-Stokes beam.
JitterEstimate jitter_average(const BeamGeometry& geometry, int draws, std::uint64_t seed);

// ---- brightness limit -------------------------------------------------------------

/// Pairs/s/MHz.
double ultimate_brightness_limit(const BrightnessLimitInput& input);

}  // namespace sfwm::model
