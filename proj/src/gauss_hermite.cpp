// Gauss-Hermite rules: Jacobi-matrix eigenvalues polished by Newton iteration on
// the orthonormal recurrence. The recurrence is rescaled on the fly so large n
// (thousands) does not overflow near the outer nodes.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "sfwm/error.hpp"
#include "sfwm/model.hpp"

namespace sfwm::model {
namespace {

struct Eval {
  double ratio;       // p_n / p_{n-1}
  double log_prev;    // log |p_{n-1}|
};

// Orthonormal Hermite polynomials p_j (weight exp(-x^2)).
Eval evaluate(int n, double x) {
  double p_prev = 0.0;
  double p = std::pow(std::numbers::pi, -0.25);
  double log_scale = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double next = x * std::sqrt(2.0 / j) * p - std::sqrt((j - 1.0) / j) * p_prev;
    p_prev = p;
    p = next;
    if (std::abs(p) > 1e150) {
      p *= 1e-150;
      p_prev *= 1e-150;
      log_scale += 150.0 * std::numbers::ln10;
    }
  }
  return {p / p_prev, std::log(std::abs(p_prev)) + log_scale};
}

GaussHermiteRule build(int n) {
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  // Starting points from the Jacobi matrix (eigenvalues only), then Newton polish.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& guess = solver.eigenvalues();
  for (int i = n / 2; i < n; ++i) {
    double z = guess[i];
    if (n % 2 == 1 && i == n / 2) z = 0.0;
    for (int it = 0; it < 20 && z != 0.0; ++it) {
      const Eval e = evaluate(n, z);
      // p_n' = sqrt(2n) p_{n-1}
      const double step = e.ratio / std::sqrt(2.0 * n);
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    const Eval e = evaluate(n, z);
    // Christoffel weight for the orthonormal family: 1 / (n p_{n-1}^2).
    const double w = std::exp(-std::log(double(n)) - 2.0 * e.log_prev);
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int n) {
  if (n < 1) throw InvalidArgument("gauss_hermite_rule: n must be >= 1");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build(n));
  return *slot;
}

}  // namespace sfwm::model
