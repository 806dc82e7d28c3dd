#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>

namespace bellgen {

// Residual function: fills `out` (fixed size m) for parameter vector x.
using ResidualFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LmOptions {
  int max_iters = 200;
  double rel_tol = 1e-10;       // relative objective decrease
  double lambda_init = 1e-3;
  double lambda_max = 1e12;
  // Componentwise clamps applied to every trial point (empty = unbounded).
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;
};

struct LmResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // sum of squared residuals
  int iters = 0;
  bool converged = false;
};

// Damped Gauss-Newton (Levenberg-Marquardt) for small dense least-squares
// problems, with a forward-difference Jacobian. Deterministic: no internal
// randomness, fixed evaluation order.
LmResult levenberg_marquardt(const ResidualFn& fn, int n_residuals, const Eigen::VectorXd& x0,
                             const LmOptions& opts = {});

// Covariance of the fitted parameters, s^2 (J^T J)^{-1} with
// s^2 = SSR / (m - n); used for parameter uncertainties after a fit.
Eigen::MatrixXd lm_covariance(const ResidualFn& fn, int n_residuals, const Eigen::VectorXd& x);

}  // namespace bellgen
