#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "sfwm/error.hpp"
#include "sfwm/histogram.hpp"

namespace sfwm::fit {

/// The eight shape parameters; times in seconds.
struct PhenomParams {
  double a_amp = 1.0;
  double baseline = 0.0;
  double epsilon = 0.0;
  double t0 = 0.0;
  double p_exp = 1.0;
  double tau1 = 1e-9;
  double tau2 = 1e-9;
  double t_d = 0.0;

  std::array<double, 8> as_array() const { return {a_amp, baseline, epsilon, t0, p_exp, tau1, tau2, t_d}; }
  static PhenomParams from_array(const std::array<double, 8>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
  }
  static constexpr std::array<const char*, 8> names = {"a_amp", "baseline", "epsilon", "t0",
                                                       "p_exp", "tau1",     "tau2",    "t_d"};
};

double eval_phenomenological(double t, const PhenomParams& p);
/// Analytic partial derivatives in the order of PhenomParams::as_array().
std::array<double, 8> phenomenological_gradient(double t, const PhenomParams& p);

struct WavePacketFit {
  PhenomParams params;
  std::array<std::array<double, 8>, 8> covariance{};
  std::array<double, 8> sigma{};
  double temporal_fwhm = 0.0;   // s
  double linewidth_hz = 0.0;
  double lorentz_residual = 0.0;
  double chi2_reduced = 0.0;
  double jarque_bera = 0.0;
  double normality_pvalue = 0.0;
  double residual_norm = 0.0;   // |y - f| / |y|
  bool degenerate_plateau = false;
  bool converged = false;
  int starts_converged = 0;
  int iterations = 0;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, WavePacketFit best) : Error(what), best_iterate(std::move(best)) {}
  const char* kind() const noexcept override { return "fit_failure"; }
  WavePacketFit best_iterate;
};

struct FitOptions {
  bool compute_linewidth = true;
  int max_iterations = 3000;
  // Poisson weights 1/sqrt(max(y,1)); off gives unit weights.
  bool poisson_weights = true;
  // Refits with weights 1/sqrt(max(model,1)) after the multi-start stage.
  int reweight_passes = 2;
};

/// Fit to arbitrary samples (bin centres t, values y).
WavePacketFit fit_curve(const std::vector<double>& t, const std::vector<double>& y, double bin_width,
                        const FitOptions& opts = {});

WavePacketFit fit_wavepacket(const CoincidenceHistogram& hist, const FitOptions& opts = {});

struct LinewidthResult {
  double fwhm_hz = 0.0;
  double lorentz_residual = 0.0;  // rms deviation from the best Lorentzian, relative to peak
};

/// FWHM of |FT sqrt(g)|^2 for an intensity-like curve g sampled on [t_lo, t_hi].
LinewidthResult linewidth_from_curve(const std::function<double(double)>& g, double t_lo, double t_hi,
                                     double dt);

/// Same procedure on the fitted curve with its baseline removed and negatives clipped.
LinewidthResult linewidth_from_fit(const WavePacketFit& fit);

// ---- pump-power scaling laws -------------------------------------------------------

enum class ScalingModel { kSbr, kLinewidth, kBrightness, kS, kRate, kBackground };

const char* to_string(ScalingModel m);

struct ScalingFit {
  ScalingModel model_kind = ScalingModel::kSbr;
  double param_a = 0.0;
  double param_b = 0.0;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  double residual_norm = 0.0;  // |y - fit| / |y|
  double asymptote = 0.0;      // S model only: large-P plateau
};

double eval_scaling(ScalingModel m, double a, double b, double p);

ScalingFit fit_scaling(const std::vector<double>& pump_mw, const std::vector<double>& y, ScalingModel m);

}  // namespace sfwm::fit
