#include "bellgen/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bellgen/errors.hpp"
#include "bellgen/optim.hpp"
#include "bellgen/rng.hpp"

namespace bellgen {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double reduce_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

// Fringe model; params = (xi0, alpha, beta, A, B).
double fringe_model(const Eigen::VectorXd& p, double v) {
  const double v2 = v * v;
  const double xi = p(0) + p(1) * v2 / (1.0 + p(2) * v2);
  const double s = std::sin(0.5 * xi);
  return p(3) * s * s + p(4);
}

}  // namespace

void ThermalCalib::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw validation_error("thermal calibration requires alpha > 0");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw validation_error("thermal calibration requires beta >= 0");
  }
  if (!std::isfinite(xi0)) throw validation_error("thermal calibration xi0 must be finite");
}

double phase_from_voltage(const ThermalCalib& c, double voltage) {
  const double v2 = voltage * voltage;
  return c.xi0 + c.alpha * v2 / (1.0 + c.beta * v2);
}

double voltage_for_phase(const ThermalCalib& c, double target_rad) {
  c.validate();
  const double delta = reduce_2pi(target_rad - c.xi0);
  if (delta == 0.0) return 0.0;
  if (c.beta > 0.0 && delta >= c.alpha / c.beta) {
    std::ostringstream os;
    os << "target phase unreachable: every 2pi branch needs a phase advance >= " << c.alpha / c.beta
       << " rad, the saturation limit of this shifter (xi0 + alpha/beta = "
       << c.xi0 + c.alpha / c.beta << " rad)";
    throw saturation_error(os.str());
  }
  return std::sqrt(delta / (c.alpha - c.beta * delta));
}

CalibrationFit fit_calibration(const std::vector<VoltageRatePoint>& scan) {
  const int n = static_cast<int>(scan.size());
  if (n < 8) throw validation_error("calibration fit needs at least 8 scan points");

  double ymin = scan[0].rate_hz, ymax = scan[0].rate_hz, vmax = 0.0;
  for (const auto& p : scan) {
    ymin = std::min(ymin, p.rate_hz);
    ymax = std::max(ymax, p.rate_hz);
    vmax = std::max(vmax, std::fabs(p.voltage));
  }
  if (ymax - ymin <= 1e-9 * std::max(1.0, std::fabs(ymax))) {
    throw fit_error("calibration scan is flat; no fringe to fit");
  }
  if (vmax <= 0.0) throw fit_error("calibration scan has zero voltage span");

  const ResidualFn residuals = [&scan](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    for (int i = 0; i < static_cast<int>(scan.size()); ++i) {
      out(i) = fringe_model(p, scan[i].voltage) - scan[i].rate_hz;
    }
  };

  const double v2max = vmax * vmax;
  const double a0 = ymax - ymin;
  const double b0 = ymin;

  // Coarse seeds: log-spaced fringe counts over the scan, 8 phase offsets.
  Eigen::VectorXd r(n);
  std::vector<std::pair<double, Eigen::VectorXd>> scored;
  for (int ia = 0; ia < 24; ++ia) {
    const double span = 0.25 * kPi * std::pow(16.0 * kPi / (0.25 * kPi), ia / 23.0);
    const double alpha = span / v2max;
    for (int id = 0; id < 8; ++id) {
      Eigen::VectorXd p(5);
      p << id * kTwoPi / 8.0, alpha, 0.0, a0, b0;
      residuals(p, r);
      scored.emplace_back(r.squaredNorm(), p);
    }
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  LmOptions opts;
  opts.max_iters = 400;
  opts.rel_tol = 1e-12;
  Eigen::VectorXd lower(5), upper(5);
  lower << -1e300, 1e-8, 0.0, 0.0, 0.0;
  upper << 1e300, 1e300, 1e300, 1e300, 1e300;
  opts.lower = lower;
  opts.upper = upper;

  constexpr int kRestartBudget = 16;
  Rng perturb(0xCA11B8A7E5EEDULL);
  LmResult best;
  best.objective = std::numeric_limits<double>::infinity();
  int used = 0;
  for (int k = 0; k < kRestartBudget; ++k) {
    Eigen::VectorXd seed;
    if (k < 8 && k < static_cast<int>(scored.size())) {
      seed = scored[k].second;
    } else {
      // Deterministic perturbations of the best grid seed.
      seed = scored[0].second;
      seed(0) += perturb.gaussian() * 0.5;
      seed(1) *= std::exp(perturb.gaussian() * 0.3);
      seed(2) = std::fabs(perturb.gaussian()) * 0.1 / v2max;
      seed(3) *= std::exp(perturb.gaussian() * 0.2);
    }
    const LmResult res = levenberg_marquardt(residuals, n, seed, opts);
    ++used;
    if (res.converged && res.objective < best.objective) best = res;
    // Early exit on an essentially perfect fit.
    if (best.objective <= 1e-16 * std::max(1.0, ymax * ymax)) break;
  }
  if (!std::isfinite(best.objective) || best.x.size() != 5) {
    std::ostringstream os;
    os << "calibration fit failed to converge after " << used << " restarts";
    throw fit_error(os.str());
  }

  CalibrationFit fit;
  fit.calib.xi0 = reduce_2pi(best.x(0));
  fit.calib.alpha = best.x(1);
  fit.calib.beta = best.x(2);
  fit.amplitude = best.x(3);
  fit.offset = best.x(4);
  fit.residual_norm = std::sqrt(best.objective);
  fit.residual_rms = std::sqrt(best.objective / n);
  fit.restarts_used = used;
  return fit;
}

}  // namespace bellgen
