#include "sfwm/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "sfwm/fft.hpp"
#include "sfwm/least_squares.hpp"
#include "sfwm/waveform.hpp"

namespace sfwm::fit {
namespace {

constexpr double kNs = 1e-9;
const double kTwoOverSqrtPi = 2.0 / std::sqrt(std::numbers::pi);

struct Shape {
  double f;
  std::array<double, 8> d;  // derivatives w.r.t. (A, B, eps, t0, p, tau1, tau2, td)
};

Shape eval_with_grad(double t, const PhenomParams& q) {
  const double x = (t - q.t0) / q.tau1;
  // u = 1 + tanh(x) and 2 - u, both without cancellation or overflow.
  const double u = 2.0 / (1.0 + std::exp(-2.0 * x));
  const double two_minus_u = 2.0 / (1.0 + std::exp(2.0 * x));
  const double up = u > 0 ? std::pow(u, q.p_exp) : 0.0;
  const double s = (t - q.t0 - q.t_d) / q.tau2;
  const double v = std::erfc(s);
  const double g = kTwoOverSqrtPi * std::exp(-s * s);
  const double core = q.a_amp * up + q.epsilon;
  const double dup_dx = q.p_exp * up * two_minus_u;
  Shape out;
  out.f = core * v + q.baseline;
  out.d[0] = up * v;
  out.d[1] = 1.0;
  out.d[2] = v;
  out.d[3] = -q.a_amp * dup_dx / q.tau1 * v + core * g / q.tau2;
  out.d[4] = up > 0 ? q.a_amp * up * std::log(u) * v : 0.0;
  out.d[5] = -q.a_amp * dup_dx * x / q.tau1 * v;
  out.d[6] = core * g * s / q.tau2;
  out.d[7] = core * g / q.tau2;
  return out;
}

// Internal coordinates: times in ns, p and the two time constants on a log scale, and
// the amplitude as the height A 2^p of the rise term. With A itself, A -> 0 and p -> inf
// is a flat valley that LM crawls along for thousands of iterations.
PhenomParams from_internal(const Eigen::VectorXd& x) {
  const double p = std::exp(x[4]);
  return {x[0] * std::exp2(-p), x[1], x[2], x[3], p, std::exp(x[5]), std::exp(x[6]), x[7]};
}

Eigen::VectorXd to_internal(const PhenomParams& p) {
  Eigen::VectorXd x(8);
  x << p.a_amp * std::exp2(p.p_exp), p.baseline, p.epsilon, p.t0, std::log(p.p_exp), std::log(p.tau1),
      std::log(p.tau2), p.t_d;
  return x;
}

PhenomParams ns_to_seconds(PhenomParams p) {
  p.t0 *= kNs;
  p.tau1 *= kNs;
  p.tau2 *= kNs;
  p.t_d *= kNs;
  return p;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  return v[m];
}

// Deterministic starting points from histogram moments.
std::vector<PhenomParams> starting_points(const std::vector<double>& t, const std::vector<double>& y, double bw) {
  const size_t n = y.size();
  std::vector<double> sm(n);
  const int h = 2;
  for (size_t i = 0; i < n; ++i) {
    double s = 0;
    int c = 0;
    for (int k = -h; k <= h; ++k) {
      const long j = static_cast<long>(i) + k;
      if (j >= 0 && j < static_cast<long>(n)) {
        s += y[j];
        ++c;
      }
    }
    sm[i] = s / c;
  }
  const size_t tail = std::max<size_t>(n * 15 / 100, 1);
  const size_t head = std::max<size_t>(n * 5 / 100, 1);
  const double b_tail = median({y.end() - tail, y.end()});
  const double b_head = median({y.begin(), y.begin() + head});
  const double b0 = std::max(0.0, std::min(b_tail, b_head));
  const size_t imax = static_cast<size_t>(std::max_element(sm.begin(), sm.end()) - sm.begin());
  const double H = std::max(sm[imax] - b0, 1e-12);

  const auto left_below = [&](double level) {
    size_t i = imax;
    while (i > 0 && sm[i] >= level) --i;
    return t[i];
  };
  const auto right_below = [&](double level) {
    size_t i = imax;
    while (i + 1 < n && sm[i] >= level) ++i;
    return t[i];
  };
  const double t_r = left_below(b0 + 0.5 * H);
  const double t_f = right_below(b0 + 0.5 * H);
  const double rise = std::max(left_below(b0 + 0.9 * H) - left_below(b0 + 0.1 * H), bw);
  const double fall = std::max(right_below(b0 + 0.1 * H) - right_below(b0 + 0.9 * H), bw);
  const double width = std::max(t_f - t_r, bw);
  const double eps0 = std::max(0.0, 0.5 * (b_head - b0));

  std::vector<PhenomParams> starts;
  for (double p : {1.0, 2.0}) {
    for (double tau1 : {std::max(rise / 2.2, 0.5 * bw), std::max(3.0 * rise / 2.2, bw)}) {
      for (int mode = 0; mode < 2; ++mode) {
        PhenomParams s;
        s.p_exp = p;
        s.tau1 = tau1;
        s.baseline = b0;
        s.epsilon = eps0;
        s.t0 = t_r;
        s.a_amp = std::max(0.5 * H - eps0, 1e-3 * H) / std::pow(2.0, p);
        if (mode == 0) {
          s.t_d = width;
          s.tau2 = std::max(fall / 1.81, bw);
        } else {
          s.t_d = 0.3 * width;
          s.tau2 = width;
        }
        starts.push_back(s);
      }
    }
  }
  return starts;
}

double jarque_bera(const Eigen::VectorXd& r) {
  const double n = static_cast<double>(r.size());
  const double mean = r.mean();
  double m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < r.size(); ++i) {
    const double d = r[i] - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0) return 0.0;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  return n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
}

}  // namespace

double eval_phenomenological(double t, const PhenomParams& p) { return eval_with_grad(t, p).f; }

std::array<double, 8> phenomenological_gradient(double t, const PhenomParams& p) {
  return eval_with_grad(t, p).d;
}

WavePacketFit fit_curve(const std::vector<double>& t, const std::vector<double>& y, double bin_width,
                        const FitOptions& opts) {
  const size_t n = y.size();
  if (n < 100 || t.size() != n) throw InvalidArgument("fit_curve: need at least 100 matching samples");
  if (!(bin_width > 0)) throw InvalidArgument("fit_curve: bin width must be > 0");
  std::vector<double> tn(n), w(n);
  for (size_t i = 0; i < n; ++i) {
    tn[i] = t[i] / kNs;
    w[i] = opts.poisson_weights ? 1.0 / std::sqrt(std::max(y[i], 1.0)) : 1.0;
  }
  const double bw = bin_width / kNs;

  const ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const PhenomParams q = from_internal(x);
    for (size_t i = 0; i < n; ++i) {
      const Shape s = eval_with_grad(tn[i], q);
      r[i] = w[i] * (s.f - y[i]);
      if (jac) {
        for (int k = 0; k < 8; ++k) (*jac)(i, k) = w[i] * s.d[k];
        (*jac)(i, 4) -= w[i] * s.d[0] * q.a_amp * std::numbers::ln2;
        (*jac)(i, 0) *= std::exp2(-q.p_exp);
        (*jac)(i, 4) *= q.p_exp;
        (*jac)(i, 5) *= q.tau1;
        (*jac)(i, 6) *= q.tau2;
      }
    }
  };

  LsqOptions lo;
  lo.max_iterations = opts.max_iterations;
  lo.x_tol = 1e-13;
  lo.f_tol = 1e-12;
  lo.stall_window = 50;
  LsqResult best;
  bool have_best = false;
  int n_conv = 0;
  for (const auto& start : starting_points(tn, y, bw)) {
    LsqResult res = levenberg_marquardt(fn, to_internal(start), static_cast<int>(n), lo);
    if (!std::isfinite(res.cost)) continue;
    if (res.converged) ++n_conv;
    const bool better = !have_best || (res.converged && !best.converged) ||
                        (res.converged == best.converged && res.cost < best.cost);
    if (better) {
      best = std::move(res);
      have_best = true;
    }
  }

  WavePacketFit fit;
  if (!have_best) throw FitError("fit_curve: every start produced non-finite residuals", fit);
  // Weights from the data bias the baseline low by about one count per bin; refit
  // with weights taken from the current model curve.
  for (int pass = 0; opts.poisson_weights && pass < opts.reweight_passes; ++pass) {
    const PhenomParams q = from_internal(best.x);
    for (size_t i = 0; i < n; ++i) w[i] = 1.0 / std::sqrt(std::max(eval_with_grad(tn[i], q).f, 1.0));
    LsqResult res = levenberg_marquardt(fn, best.x, static_cast<int>(n), lo);
    if (!std::isfinite(res.cost) || (best.converged && !res.converged)) break;
    best = std::move(res);
  }
  const PhenomParams qn = from_internal(best.x);
  fit.params = ns_to_seconds(qn);
  fit.converged = best.converged;
  fit.starts_converged = n_conv;
  fit.iterations = best.iterations;

  // Covariance in physical units from the weighted Jacobian.
  const Eigen::MatrixXd jtj = best.jacobian.transpose() * best.jacobian;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(8, 8, std::numeric_limits<double>::quiet_NaN());
  {
    // A rise sharper than one bin leaves tau1, p and A unidentifiable; the pseudo-inverse
    // still gives the right spread for any quantity that depends only on the curve.
    const Eigen::MatrixXd inv =
        lu.isInvertible() ? Eigen::MatrixXd(lu.inverse()) : Eigen::MatrixXd(jtj.completeOrthogonalDecomposition().pseudoInverse());
    Eigen::VectorXd diag(8);
    diag << std::exp2(-qn.p_exp), 1.0, 1.0, kNs, qn.p_exp, qn.tau1 * kNs, qn.tau2 * kNs, kNs;
    Eigen::MatrixXd tr = diag.asDiagonal();
    tr(0, 4) = -qn.a_amp * std::numbers::ln2 * qn.p_exp;
    cov = tr * inv * tr.transpose();
  }
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) fit.covariance[i][j] = cov(i, j);
    fit.sigma[i] = std::sqrt(std::max(cov(i, i), 0.0));
  }

  const double dof = std::max<double>(static_cast<double>(n) - 8.0, 1.0);
  fit.chi2_reduced = best.residuals.squaredNorm() / dof;
  fit.jarque_bera = jarque_bera(best.residuals);
  fit.normality_pvalue = std::exp(-0.5 * fit.jarque_bera);
  double num = 0, den = 0;
  for (size_t i = 0; i < n; ++i) {
    const double d = eval_phenomenological(t[i], fit.params) - y[i];
    num += d * d;
    den += y[i] * y[i];
  }
  fit.residual_norm = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  fit.degenerate_plateau = fit.params.t_d <= bin_width;

  // Temporal FWHM of the fitted curve with the baseline removed.
  {
    const int sub = 10;
    const double step = bin_width / sub;
    const size_t m = static_cast<size_t>((t.back() - t.front()) / step) + 1;
    std::vector<double> tt(m), ff(m);
    for (size_t i = 0; i < m; ++i) {
      tt[i] = t.front() + i * step;
      ff[i] = eval_phenomenological(tt[i], fit.params) - fit.params.baseline;
    }
    try {
      fit.temporal_fwhm = wave::fwhm(tt, ff).width;
    } catch (const Error& e) {
      throw FitError(std::string("fit_curve: fitted curve has no FWHM: ") + e.what(), fit);
    }
  }
  if (opts.compute_linewidth) {
    const auto lw = linewidth_from_fit(fit);
    fit.linewidth_hz = lw.fwhm_hz;
    fit.lorentz_residual = lw.lorentz_residual;
  }
  if (!fit.converged) throw FitError("fit_curve: no start converged", fit);
  return fit;
}

WavePacketFit fit_wavepacket(const CoincidenceHistogram& hist, const FitOptions& opts) {
  return fit_curve(hist.centers(), hist.values(), hist.bin_width_s, opts);
}

// ---- linewidth ----------------------------------------------------------------------

namespace {

// |sum_k a_k exp(-2 pi i f k dt)|^2 by Horner's rule.
double power_at(const std::vector<double>& a, double dt, double f) {
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f * dt);
  std::complex<double> acc = 0.0;
  for (size_t k = a.size(); k-- > 0;) acc = acc * z + a[k];
  return std::norm(acc);
}

// Frequency where the power falls to half its zero-frequency value, by bisection
// around the FFT estimate.
double refine_half_power(const std::vector<double>& a, double dt, double guess, double bracket) {
  double sum = 0.0;
  for (double v : a) sum += v;
  const double half = 0.5 * sum * sum;
  double lo = std::max(guess - bracket, 0.0);
  double hi = guess + bracket;
  for (int i = 0; i < 60 && power_at(a, dt, lo) < half; ++i) lo *= 0.5;
  for (int i = 0; i < 60 && power_at(a, dt, hi) > half; ++i) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (power_at(a, dt, mid) > half ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace


LinewidthResult linewidth_from_curve(const std::function<double(double)>& g, double t_lo, double t_hi,
                                     double dt) {
  if (!(t_hi > t_lo) || !(dt > 0)) throw InvalidArgument("linewidth_from_curve: bad sampling range");
  const size_t k_max = static_cast<size_t>(std::ceil((t_hi - t_lo) / dt)) + 1;
  std::vector<double> amp(k_max);
  for (size_t k = 0; k < k_max; ++k) amp[k] = std::sqrt(std::max(g(t_lo + k * dt), 0.0));

  size_t n = 1;
  while (n < 4 * k_max) n <<= 1;
  const size_t n_cap = size_t(1) << 24;
  for (;;) {
    std::vector<std::complex<double>> buf(n);
    for (size_t k = 0; k < k_max; ++k) buf[k] = amp[k];
    dft(buf, -1);
    std::vector<double> f(n), s(n);
    const double df = 1.0 / (n * dt);
    for (size_t j = 0; j < n; ++j) {
      const size_t idx = (j + n / 2) % n;
      f[j] = (static_cast<double>(j) - static_cast<double>(n / 2)) * df;
      s[j] = std::norm(buf[idx]);
    }
    const auto w = wave::fwhm(f, s);
    if (w.width < 16.0 * df && n < n_cap) {
      n <<= 1;
      continue;
    }
    LinewidthResult out;
    out.fwhm_hz = 2.0 * refine_half_power(amp, dt, 0.5 * w.width, 2.0 * df);
    // Best Lorentzian (height fixed at the peak) by golden-section search on the half width.
    const auto rms = [&](double half) {
      double acc = 0;
      int cnt = 0;
      for (size_t j = 0; j < n; ++j) {
        if (std::abs(f[j]) > 5.0 * w.width) continue;
        const double model = 1.0 / (1.0 + (f[j] / half) * (f[j] / half));
        const double d = s[j] / w.peak - model;
        acc += d * d;
        ++cnt;
      }
      return cnt ? std::sqrt(acc / cnt) : 0.0;
    };
    double a = 0.25 * w.width, b = 1.0 * w.width;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = rms(c), fd = rms(d);
    for (int it = 0; it < 60; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = rms(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = rms(d);
      }
    }
    out.lorentz_residual = std::min(fc, fd);
    return out;
  }
}

LinewidthResult linewidth_from_fit(const WavePacketFit& fit) {
  PhenomParams shape = fit.params;
  if (!(shape.tau1 > 0) || !(shape.tau2 > 0) || !(shape.p_exp > 0))
    throw InvalidArgument("linewidth_from_fit: invalid fit parameters");
  shape.t0 = 0.0;  // the sampling grid is anchored at the onset
  shape.baseline = 0.0;
  // Support: from where the rising edge is negligible to where the fall is complete.
  const double t_lo = -(14.0 / shape.p_exp + 1.0) * shape.tau1;
  const double t_hi = std::max(shape.t_d, 0.0) + 12.0 * shape.tau2;
  const double span = t_hi - t_lo;
  double dt = std::min({shape.tau1, shape.tau2, span}) / 16.0;
  dt = std::max(dt, span / double(1 << 20));
  return linewidth_from_curve([&](double t) { return eval_phenomenological(t, shape); }, t_lo, t_hi, dt);
}

// ---- scaling laws --------------------------------------------------------------------

const char* to_string(ScalingModel m) {
  switch (m) {
    case ScalingModel::kSbr: return "SBR";
    case ScalingModel::kLinewidth: return "LINEWIDTH";
    case ScalingModel::kBrightness: return "BRIGHTNESS";
    case ScalingModel::kS: return "S";
    case ScalingModel::kRate: return "RATE";
    case ScalingModel::kBackground: return "BACKGROUND";
  }
  return "?";
}

double eval_scaling(ScalingModel m, double a, double b, double p) {
  switch (m) {
    case ScalingModel::kSbr: return a * p / (p * p + b);
    case ScalingModel::kLinewidth: return a * p + b;
    case ScalingModel::kBrightness: return a * p / (p + b);
    case ScalingModel::kS: return a * p * p / (p * p + b);
    case ScalingModel::kRate: return a * p;
    case ScalingModel::kBackground: return a * p * p + b;
  }
  return 0.0;
}

namespace {

// Basis value g(P; b) of the models that are linear in A for fixed B.
double basis(ScalingModel m, double b, double p) { return eval_scaling(m, 1.0, b, p); }

}  // namespace

ScalingFit fit_scaling(const std::vector<double>& pump, const std::vector<double>& y, ScalingModel m) {
  const size_t n = pump.size();
  if (n != y.size()) throw InvalidArgument("fit_scaling: size mismatch");
  if (n < 3) throw RankError("fit_scaling: need at least 3 points");
  std::vector<double> sorted = pump;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < n; ++i) {
    if (!(sorted[i] > 0)) throw InvalidArgument("fit_scaling: pump powers must be positive");
    if (i && sorted[i] == sorted[i - 1]) throw RankError("fit_scaling: pump powers must be distinct");
  }
  ScalingFit out;
  out.model_kind = m;
  const auto finish = [&](double a, double b, const Eigen::MatrixXd& jac) {
    out.param_a = a;
    out.param_b = b;
    double rss = 0, yy = 0;
    for (size_t i = 0; i < n; ++i) {
      const double d = y[i] - eval_scaling(m, a, b, pump[i]);
      rss += d * d;
      yy += y[i] * y[i];
    }
    out.residual_norm = yy > 0 ? std::sqrt(rss / yy) : std::sqrt(rss);
    const int k = static_cast<int>(jac.cols());
    const double s2 = n > static_cast<size_t>(k) ? rss / double(n - k) : 0.0;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (!lu.isInvertible()) throw RankError("fit_scaling: singular normal equations");
    const Eigen::MatrixXd cov = s2 * lu.inverse();
    out.sigma_a = std::sqrt(cov(0, 0));
    out.sigma_b = k > 1 ? std::sqrt(cov(1, 1)) : 0.0;
    if (m == ScalingModel::kS) out.asymptote = a;
    return out;
  };

  if (m == ScalingModel::kRate) {
    Eigen::MatrixXd J(n, 1);
    double num = 0, den = 0;
    for (size_t i = 0; i < n; ++i) {
      J(i, 0) = pump[i];
      num += pump[i] * y[i];
      den += pump[i] * pump[i];
    }
    return finish(num / den, 0.0, J);
  }
  if (m == ScalingModel::kLinewidth || m == ScalingModel::kBackground) {
    Eigen::MatrixXd J(n, 2);
    Eigen::VectorXd rhs(n);
    for (size_t i = 0; i < n; ++i) {
      J(i, 0) = m == ScalingModel::kLinewidth ? pump[i] : pump[i] * pump[i];
      J(i, 1) = 1.0;
      rhs[i] = y[i];
    }
    const Eigen::VectorXd sol = J.colPivHouseholderQr().solve(rhs);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J.transpose() * J);
    if (lu.rank() < 2) throw RankError("fit_scaling: collinear design");
    return finish(sol[0], sol[1], J);
  }

  // Rational models: profile over log B on a coarse grid, then refine (A, log B) jointly.
  const auto profile_a = [&](double b) {
    double num = 0, den = 0;
    for (size_t i = 0; i < n; ++i) {
      const double g = basis(m, b, pump[i]);
      num += g * y[i];
      den += g * g;
    }
    return den > 0 ? num / den : 0.0;
  };
  const auto rss_at = [&](double b) {
    const double a = profile_a(b);
    double r = 0;
    for (size_t i = 0; i < n; ++i) {
      const double d = y[i] - a * basis(m, b, pump[i]);
      r += d * d;
    }
    return r;
  };
  const double pscale = (m == ScalingModel::kBrightness) ? sorted.back() : sorted.back() * sorted.back();
  double best_b = pscale, best_r = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 400; ++k) {
    const double b = pscale * std::pow(10.0, -6.0 + 12.0 * k / 400.0);
    const double r = rss_at(b);
    if (r < best_r) {
      best_r = r;
      best_b = b;
    }
  }
  Eigen::VectorXd x0(2);
  x0 << profile_a(best_b), std::log(best_b);
  const ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double a = x[0], b = std::exp(x[1]);
    for (size_t i = 0; i < n; ++i) {
      const double g = basis(m, b, pump[i]);
      r[i] = a * g - y[i];
      if (jac) {
        // dg/dB = -g^2/P for the SBR and brightness forms, -g^2/P^2 for S.
        const double pk = m == ScalingModel::kS ? pump[i] * pump[i] : pump[i];
        const double dg = -g * g / pk;
        (*jac)(i, 0) = g;
        (*jac)(i, 1) = a * dg * b;
      }
    }
  };
  LsqOptions lo;
  lo.x_tol = 1e-15;
  lo.f_tol = 1e-20;
  const LsqResult res = levenberg_marquardt(fn, x0, static_cast<int>(n), lo);
  const double a = res.x[0], b = std::exp(res.x[1]);
  // Covariance in (A, B).
  Eigen::MatrixXd J = res.jacobian;
  J.col(1) /= b;
  return finish(a, b, J);
}

}  // namespace sfwm::fit
