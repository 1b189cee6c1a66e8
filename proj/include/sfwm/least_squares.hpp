#pragma once

#include <Eigen/Dense>
#include <functional>

namespace sfwm::fit {

/// Residuals r(x) and optionally the Jacobian dr/dx.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac)>;

struct LsqOptions {
  int max_iterations = 2000;
  double x_tol = 1e-14;
  double g_tol = 1e-30;
  double f_tol = 1e-30;
  // Converged when the cost fell by less than stall_tol * cost over the last
  // stall_window iterations (a flat valley with no well-defined minimum). 0 disables.
  int stall_window = 0;
  double stall_tol = 1e-9;
};

struct LsqResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // 0.5 |r|^2
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt with Marquardt diagonal scaling and Nielsen damping updates.
LsqResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0, int n_residuals,
                              const LsqOptions& opts = {});

}  // namespace sfwm::fit
