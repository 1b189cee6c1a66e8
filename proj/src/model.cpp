#include "sfwm/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sfwm/error.hpp"
#include "sfwm/rng.hpp"

namespace sfwm::model {
namespace {

constexpr cplx kI(0.0, 1.0);

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

}  // namespace

void SourceParams::validate() const {
  require(std::isfinite(alpha) && alpha >= 0, "alpha must be >= 0");
  require(std::isfinite(omega_p), "omega_p must be finite");
  require(std::isfinite(omega_c) && omega_c > 0, "omega_c must be > 0");
  require(std::isfinite(gamma_dec) && gamma_dec >= 0, "gamma_dec must be >= 0");
  require(std::isfinite(gamma_nat) && gamma_nat > 0, "gamma_nat must be > 0");
  require(std::isfinite(gamma_doppler) && gamma_doppler > 0, "gamma_doppler must be > 0");
  require(std::isfinite(delta_p), "delta_p must be finite");
}

// ---- Doppler average ------------------------------------------------------------

cplx doppler_average(const std::function<cplx(double)>& integrand, const SourceParams& params,
                     const QuadratureOptions& opts) {
  const double d = params.gamma_doppler;
  require(d > 0, "doppler_average: gamma_doppler must be > 0");
  const double norm = 1.0 / std::sqrt(std::numbers::pi);
  cplx prev(std::nan(""), 0.0);
  cplx est;
  for (int n = opts.initial_nodes; n <= opts.max_nodes; n *= 2) {
    const auto& rule = gauss_hermite_rule(n);
    cplx sum = 0.0;
    double l1 = 0.0;
    // Symmetric pairs keep odd integrands at exactly zero.
    for (int i = 0; i < n / 2; ++i) {
      const double x = rule.nodes[n - 1 - i];
      const double w = rule.weights[i];
      if (w == 0.0) continue;
      const cplx a = integrand(-d * x);
      const cplx b = integrand(d * x);
      sum += w * (a + b);
      l1 += w * (std::abs(a) + std::abs(b));
    }
    if (n % 2 == 1) {
      const cplx c = integrand(0.0);
      sum += rule.weights[n / 2] * c;
      l1 += rule.weights[n / 2] * std::abs(c);
    }
    est = sum * norm;
    l1 *= norm;
    if (!std::isfinite(est.real()) || !std::isfinite(est.imag()))
      throw QuadratureError("doppler_average: non-finite integrand", prev, est);
    if (std::isfinite(prev.real()) &&
        std::abs(est - prev) <= opts.rel_tol * std::abs(est) + 1e-14 * l1)
      return est;
    prev = est;
  }
  throw QuadratureError("doppler_average: no convergence at " + std::to_string(opts.max_nodes) +
                            " nodes",
                        prev, est);
}

// ---- kernels ------------------------------------------------------------------------

cplx kappa_integrand(double delta, double w, const SourceParams& p) {
  const cplx s(delta, p.gamma_dec);
  const double oc = p.omega_c;
  return (p.alpha / 4.0) * p.omega_p / (p.delta_p_units() - w + 0.5 * kI) * oc /
         (oc * oc - 4.0 * s * (delta + w + 0.5 * kI));
}

cplx rho_integrand(double delta, double w, const SourceParams& p) {
  const cplx s(delta, p.gamma_dec);
  const double oc = p.omega_c;
  return (p.alpha / 2.0) * s / (oc * oc - 4.0 * s * (delta + w + 0.5 * kI));
}

namespace {

// Doppler average of 1/(w - z2), z2 = Oc^2/(4s) - delta - i/2: the EIT pole.
cplx eit_resolvent(double delta, const SourceParams& p) {
  const cplx s(delta, p.gamma_dec);
  if (s == cplx(0.0)) return 0.0;
  const double oc2 = p.omega_c * p.omega_c;
  const cplx denom = oc2 - 4.0 * s * (delta + 0.5 * kI);
  // For tiny |s| the pole runs off to infinity where the average is -1/z2.
  if (std::abs(s) < 1e-12 * oc2) return -4.0 * s / denom;
  const cplx z2 = denom / (4.0 * s);
  return doppler_resolvent(z2, p.gamma_doppler);
}

}  // namespace

cplx kappa_bar(double delta, const SourceParams& p, KernelMethod method) {
  if (method == KernelMethod::kGaussHermite)
    return doppler_average([&](double w) { return kappa_integrand(delta, w, p); }, p);
  if (p.alpha == 0.0 || p.omega_p == 0.0) return 0.0;
  const cplx s(delta, p.gamma_dec);
  const double oc = p.omega_c;
  const cplx z1(p.delta_p_units(), 0.5);
  const cplx i1 = doppler_resolvent(z1, p.gamma_doppler);
  const cplx i2 = eit_resolvent(delta, p);
  // 16 s (z1 - z2), written so that s -> 0 stays finite.
  const cplx den = 16.0 * s * (z1 + delta + 0.5 * kI) - 4.0 * oc * oc;
  return p.alpha * p.omega_p * oc * (i1 - i2) / den;
}

cplx rho_bar(double delta, const SourceParams& p, KernelMethod method) {
  if (method == KernelMethod::kGaussHermite)
    return doppler_average([&](double w) { return rho_integrand(delta, w, p); }, p);
  if (p.alpha == 0.0) return 0.0;
  return -(p.alpha / 8.0) * eit_resolvent(delta, p);
}

// ---- OD ---------------------------------------------------------------------------------

double od_convert(double alpha, const SourceParams& p) {
  require(alpha >= 0, "od_convert: alpha must be >= 0");
  return alpha * (std::sqrt(std::numbers::pi) / 2.0) / p.gamma_doppler;
}

double od_invert(double alpha_measured, const SourceParams& p) {
  require(alpha_measured >= 0, "od_invert: measured OD must be >= 0");
  return alpha_measured * p.gamma_doppler / (std::sqrt(std::numbers::pi) / 2.0);
}

// ---- geometry -------------------------------------------------------------------------

void BeamGeometry::validate() const {
  require(length_m > 0, "length_m must be > 0");
  require(lambda_pump_line > 0 && lambda_coupling_line > 0, "wavelengths must be > 0");
  require(angle_jitter_rad >= 0, "angle_jitter_rad must be >= 0");
  for (int s : direction_signs) require(s == 1 || s == -1, "direction signs must be +1 or -1");
  for (double lam : wavelengths()) require(lam > 0, "derived wavelengths must be > 0");
}

double BeamGeometry::wavenumber(Field f) const {
  const double c = defaults::kSpeedOfLight;
  const double fp = c / lambda_pump_line + pump_detuning_hz;
  const double fc = c / lambda_coupling_line;
  double nu = 0.0;
  switch (f) {
    case Field::kPump: nu = fp; break;
    case Field::kCoupling: nu = fc; break;
    case Field::kAntiStokes: nu = fp + splitting_hz; break;
    case Field::kStokes: nu = fc - splitting_hz; break;
  }
  return defaults::kTwoPi * nu / c;
}

std::array<double, 4> BeamGeometry::wavelengths() const {
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = defaults::kTwoPi / wavenumber(static_cast<Field>(i));
  return out;
}

BeamGeometry BeamGeometry::copropagating() { return BeamGeometry{}; }

BeamGeometry BeamGeometry::counterpropagating() {
  BeamGeometry g;
  g.direction_signs = {1, -1, 1, -1};
  return g;
}

double phase_mismatch(const BeamGeometry& g, const std::array<double, 4>& angles) {
  for (double a : angles) require(std::abs(a) <= std::numbers::pi / 2, "phase_mismatch: |angle| > pi/2");
  using ld = long double;
  const ld c = defaults::kSpeedOfLight;
  const ld two_pi = 2 * std::numbers::pi_v<ld>;
  const ld kp = two_pi * (c / ld(g.lambda_pump_line) + ld(g.pump_detuning_hz)) / c;
  const ld kc = two_pi / ld(g.lambda_coupling_line);
  const ld q = two_pi * ld(g.splitting_hz) / c;
  const auto d = [&](Field f) { return ld(g.direction_signs[static_cast<int>(f)]); };
  // Collinear part, with k_as = k_p + q and k_s = k_c - q substituted.
  const ld collinear = (d(Field::kPump) - d(Field::kAntiStokes)) * kp +
                       (d(Field::kCoupling) - d(Field::kStokes)) * kc +
                       (d(Field::kStokes) - d(Field::kAntiStokes)) * q;
  // Tilt part: k cos(theta) = k - 2 k sin^2(theta/2), angles relative to the pump.
  const std::array<ld, 4> k = {kp, kc, kp + q, kc - q};
  const std::array<ld, 4> sign = {1, 1, -1, -1};
  ld tilt = 0;
  for (int i = 0; i < 4; ++i) {
    const ld rel = ld(angles[i]) - ld(angles[0]);
    const ld sh = std::sin(rel / 2);
    tilt += sign[i] * d(static_cast<Field>(i)) * k[i] * 2 * sh * sh;
  }
  return static_cast<double>(ld(g.length_m) * (collinear - tilt));
}

JitterEstimate jitter_average(const BeamGeometry& g, int draws, std::uint64_t seed) {
  g.validate();
  require(draws > 1, "jitter_average: draws must be > 1");
  JitterEstimate out;
  out.draws = draws;
  const double nominal = phase_mismatch(g, {0, 0, 0, 0});
  // Tilt the anti-Stokes beam to cancel a nonzero collinear mismatch when possible.
  const double k_as = g.wavenumber(Field::kAntiStokes);
  const double s2 = -nominal / (2.0 * g.length_m * g.direction_signs[2] * k_as);
  if (nominal != 0.0 && s2 > 0.0 && s2 <= 1.0) out.compensation_angle = 2.0 * std::asin(std::sqrt(s2));
  out.nominal = phase_mismatch(g, {0, 0, out.compensation_angle, 0});

  Philox rng(seed, 0x70686173);
  const double j = g.angle_jitter_rad;
  double sum = 0.0, sum2 = 0.0;
  for (int n = 0; n < draws; ++n) {
    std::array<double, 4> a{};
    for (double& v : a) v = j * (2.0 * rng.uniform() - 1.0);
    a[2] += out.compensation_angle;
    const double v = std::abs(phase_mismatch(g, a));
    sum += v;
    sum2 += v * v;
  }
  out.mean_abs = sum / draws;
  const double var = std::max(0.0, sum2 / draws - out.mean_abs * out.mean_abs);
  out.std_error = std::sqrt(var / (draws - 1));
  return out;
}

double ultimate_brightness_limit(const BrightnessLimitInput& in) {
  require(in.width_to_separation >= 0, "ultimate_brightness_limit: ratio must be >= 0");
  return defaults::kTwoPi * in.width_to_separation * 1e6;
}

}  // namespace sfwm::model
