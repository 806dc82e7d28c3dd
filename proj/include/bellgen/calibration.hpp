#pragma once

#include <cstdint>
#include <vector>

namespace bellgen {

// Thermo-optic phase shifter response: xi(V) = xi0 + alpha V^2 / (1 + beta V^2).
// Monotone nondecreasing in |V|; saturates at xi0 + alpha/beta when beta > 0.
struct ThermalCalib {
  double xi0 = 0.0;    // radians, zero-voltage offset
  double alpha = 1.0;  // rad / V^2
  double beta = 0.0;   // 1 / V^2

  void validate() const;  // alpha > 0, beta >= 0
};

double phase_from_voltage(const ThermalCalib& c, double voltage);

// Smallest nonnegative voltage realizing `target_rad` modulo 2 pi. Throws
// saturation_error (naming the bound xi0 + alpha/beta) when every 2 pi
// branch lies beyond saturation.
double voltage_for_phase(const ThermalCalib& c, double target_rad);

struct VoltageRatePoint {
  double voltage = 0.0;
  double rate_hz = 0.0;
};

struct CalibrationFit {
  ThermalCalib calib;
  double amplitude = 0.0;      // fringe amplitude A
  double offset = 0.0;         // background B
  double residual_norm = 0.0;  // sqrt(SSR)
  double residual_rms = 0.0;
  int restarts_used = 0;
};

// Fits rate = A sin^2((xi0 + alpha V^2/(1 + beta V^2))/2) + B to a voltage
// scan by two-stage nonlinear least squares: a coarse (alpha, offset) grid
// seeds up to 16 local Levenberg-Marquardt refinements (deterministic
// perturbations). Requires >= 8 points spanning at least one fringe.
// Throws fit_error on flat scans or non-convergence.
CalibrationFit fit_calibration(const std::vector<VoltageRatePoint>& scan);

}  // namespace bellgen
