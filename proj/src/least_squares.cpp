#include "sfwm/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace sfwm::fit {

LsqResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x, int n_residuals,
                              const LsqOptions& opts) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd r(n_residuals), r_new(n_residuals);
  Eigen::MatrixXd J(n_residuals, n);
  fn(x, r, &J);
  LsqResult out;
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) {
    out.x = x;
    out.cost = cost;
    out.residuals = r;
    out.jacobian = J;
    return out;
  }

  Eigen::MatrixXd A = J.transpose() * J;
  Eigen::VectorXd g = J.transpose() * r;
  Eigen::VectorXd scale = A.diagonal().cwiseMax(1e-300);
  double mu = 1e-3 * scale.maxCoeff();
  double nu = 2.0;
  int it = 0;
  std::deque<double> history;
  for (; it < opts.max_iterations; ++it) {
    if (opts.stall_window > 0) {
      history.push_back(cost);
      if (static_cast<int>(history.size()) > opts.stall_window) {
        history.pop_front();
        if (history.front() - cost <= opts.stall_tol * cost) {
          out.converged = true;
          break;
        }
      }
    }
    if (g.lpNorm<Eigen::Infinity>() <= opts.g_tol) {
      out.converged = true;
      break;
    }
    scale = scale.cwiseMax(A.diagonal());
    Eigen::MatrixXd M = A;
    M.diagonal() += mu * scale;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    Eigen::VectorXd h = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !h.allFinite()) {
      mu *= nu;
      nu *= 2.0;
      continue;
    }
    if (h.norm() <= opts.x_tol * (x.norm() + opts.x_tol)) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd x_new = x + h;
    fn(x_new, r_new, nullptr);
    const double cost_new = 0.5 * r_new.squaredNorm();
    const double predicted = 0.5 * h.dot(mu * scale.cwiseProduct(h) - g);
    const double rho = (std::isfinite(cost_new) && predicted > 0) ? (cost - cost_new) / predicted : -1.0;
    if (rho > 0) {
      const double drop = cost - cost_new;
      x = x_new;
      fn(x, r, &J);
      A = J.transpose() * J;
      g = J.transpose() * r;
      cost = 0.5 * r.squaredNorm();
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (drop <= opts.f_tol * cost) {
        out.converged = true;
        ++it;
        break;
      }
    } else {
      // Nothing left to gain at working precision.
      if (predicted <= 1e-15 * cost) {
        out.converged = true;
        ++it;
        break;
      }
      mu *= nu;
      nu = std::min(2.0 * nu, 1e6);
      if (!std::isfinite(mu) || mu > 1e300) break;
    }
  }
  out.x = x;
  out.residuals = r;
  out.jacobian = J;
  out.cost = cost;
  out.iterations = it;
  return out;
}

}  // namespace sfwm::fit
