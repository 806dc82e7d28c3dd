#include "bellgen/optim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace bellgen {

namespace {

void clamp_in_place(Eigen::VectorXd& x, const LmOptions& opts) {
  if (opts.lower) x = x.cwiseMax(*opts.lower);
  if (opts.upper) x = x.cwiseMin(*opts.upper);
}

void numerical_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& r0, Eigen::MatrixXd& jac) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(r0.size());
  Eigen::VectorXd xp = x;
  Eigen::VectorXd rp(m);
  for (int j = 0; j < n; ++j) {
    const double h = 1e-7 * std::max(1.0, std::fabs(x(j)));
    xp(j) = x(j) + h;
    fn(xp, rp);
    jac.col(j) = (rp - r0) / h;
    xp(j) = x(j);
  }
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& fn, int n_residuals, const Eigen::VectorXd& x0,
                             const LmOptions& opts) {
  const int n = static_cast<int>(x0.size());
  Eigen::VectorXd x = x0;
  clamp_in_place(x, opts);

  Eigen::VectorXd r(n_residuals);
  fn(x, r);
  double f = r.squaredNorm();

  Eigen::MatrixXd jac(n_residuals, n);
  Eigen::VectorXd r_try(n_residuals);
  double lambda = opts.lambda_init;

  LmResult result;
  result.x = x;
  result.objective = f;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    result.iters = iter + 1;
    if (f <= 1e-300) {
      result.converged = true;
      break;
    }
    numerical_jacobian(fn, x, r, jac);
    const Eigen::MatrixXd h = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14 * std::max(1.0, f)) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    while (lambda <= opts.lambda_max) {
      Eigen::MatrixXd damped = h;
      for (int j = 0; j < n; ++j) damped(j, j) += lambda * std::max(h(j, j), 1e-12);
      Eigen::VectorXd step = damped.ldlt().solve(-g);
      Eigen::VectorXd x_try = x + step;
      clamp_in_place(x_try, opts);
      fn(x_try, r_try);
      const double f_try = r_try.squaredNorm();
      if (f_try < f) {
        const double rel = (f - f_try) / std::max(f, 1e-300);
        x = x_try;
        r = r_try;
        f = f_try;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel < opts.rel_tol) {
          result.converged = true;
        }
        break;
      }
      lambda *= 2.5;
    }
    result.x = x;
    result.objective = f;
    if (!accepted) {
      // No descent direction at any damping: treat as converged to a
      // stationary point.
      result.converged = true;
      break;
    }
    if (result.converged) break;
  }
  result.x = x;
  result.objective = f;
  return result;
}

Eigen::MatrixXd lm_covariance(const ResidualFn& fn, int n_residuals, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd r(n_residuals);
  fn(x, r);
  Eigen::MatrixXd jac(n_residuals, n);
  numerical_jacobian(fn, x, r, jac);
  const double dof = std::max(1, n_residuals - n);
  const double s2 = r.squaredNorm() / dof;
  Eigen::MatrixXd h = jac.transpose() * jac;
  // Ridge for flat directions; covariance along them is meaningless anyway.
  for (int j = 0; j < n; ++j) h(j, j) += 1e-300 + 1e-12 * h(j, j);
  return s2 * h.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
}

}  // namespace bellgen
