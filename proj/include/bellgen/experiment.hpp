#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bellgen/circuit.hpp"
#include "bellgen/quantum.hpp"

namespace bellgen {

// Four single-photon detectors on rails (a, b, c, d).
struct DetectorBank {
  std::array<double, 4> eta{1.0, 1.0, 1.0, 1.0};  // detection efficiency per rail, in (0, 1]
  double window_s = 1e-9;                          // coincidence window
  double dark_hz = 0.0;                            // dark counts per detector

  void validate() const;
};

// Effective noise parametrization reproducing sub-unity state quality:
// `visibility` scales the coherences between the two source terms, and
// Gaussian phase jitter of width `phase_jitter` multiplies them by a further
// exp(-sigma^2/2).
struct NoiseModel {
  double visibility = 1.0;
  double phase_jitter = 0.0;  // radians

  void validate() const;
};

// Coincidence counts of one projection setting. `counts` are ordered by
// rail pair (a,c), (a,d), (b,c), (b,d). Counts are stored as doubles so a
// record can also carry exact (unsampled) expected counts or
// accidental-subtracted values.
struct CoincidenceRecord {
  std::string setting_id;  // e.g. "XY" = Pauli X on qubit A, Y on qubit B
  std::array<double, 4> counts{};
  double integration_s = 0.0;
  std::uint64_t seed = 0;
  bool accidentals_subtracted = false;
};

struct PauliSetting {
  Pauli a = Pauli::Z;
  Pauli b = Pauli::Z;
};

std::string setting_label(const PauliSetting& s);
PauliSetting parse_setting_label(const std::string& label);

// The nine Pauli-pair settings in canonical order XX, XY, XZ, ..., ZZ.
const std::array<PauliSetting, 9>& all_settings();

// The four rank-1 projectors of a setting, ordered (a,c),(a,d),(b,c),(b,d);
// they sum to the identity.
std::array<Mat4c, 4> projectors_for_setting(const PauliSetting& s);

// rho = V' |psi><psi| + (1 - V') D, where D zeroes the coherences between
// the source-A block {|00>,|01>} and the source-B block {|10>,|11>} and
// V' = visibility * exp(-phase_jitter^2 / 2). Deterministic.
DensityMatrix apply_noise(const TwoQubitKet& psi, const NoiseModel& nm);

// Expected accidental coincidence rate of one detector pair.
double accidental_rate(double singles_j_hz, double singles_k_hz, double window_s);

struct ExpectedCounts {
  std::array<double, 4> signal{};       // eta_j eta_k * rate * t * Tr(rho Pi)
  std::array<double, 4> accidentals{};  // singles_j * singles_k * window * t
  std::array<double, 4> total() const;
  std::array<double, 4> singles_hz{};   // per rail a, b, c, d
};

// Expected counts for one setting; pair_rate_hz is the generated (on-chip)
// pair rate, so the detected coincidence rate is eta_j*eta_k*pair_rate.
ExpectedCounts expected_counts(const DensityMatrix& rho, const PauliSetting& setting,
                               const DetectorBank& det, double pair_rate_hz, double t_s);

// Independent Poisson draws around the four expected values.
CoincidenceRecord sample_record(const std::array<double, 4>& expected,
                                const PauliSetting& setting, double t_s, std::uint64_t seed);

// Full 9-setting (36-count) tomography acquisition. Each setting consumes
// the sub-seed derive_seed(seed, setting_index). When subtract_accidentals
// is set, the expected accidental counts are subtracted from each sampled
// value (clamped at zero), mirroring histogram background subtraction.
std::vector<CoincidenceRecord> acquire_tomography(const PhaseConfig& cfg, const SourceParams& src,
                                                  const DetectorBank& det, const NoiseModel& nm,
                                                  double pair_rate_hz, double t_s,
                                                  std::uint64_t seed,
                                                  bool subtract_accidentals = true);

struct FringePoint {
  double x = 0.0;         // scanned phase (radians)
  double counts = 0.0;    // sampled
  double expected = 0.0;  // model mean
};

// Two-photon interference fringe of the unsplit pair state: the coincidence
// probability between the two rails of one qubit behind a 50:50 splitter is
// (1 + V_f cos(2 theta3 + delta))/2 with V_f = visibility*exp(-2 sigma^2);
// the doubled phase is the two-photon signature. Sampled with Poisson noise.
std::vector<FringePoint> noon_fringe(const std::vector<double>& theta3_grid, const NoiseModel& nm,
                                     double pair_rate_hz, double t_s, std::uint64_t seed,
                                     double delta = 0.0);

// Model mean of the fringe above without sampling.
double noon_expected(double theta3, const NoiseModel& nm, double pair_rate_hz, double t_s,
                     double delta = 0.0);

struct VisibilityFit {
  double v_fit = 0.0;      // from harmonic regression at fixed frequency 2
  double v_fit_std = 0.0;  // 1-sigma from the linear-fit covariance
  double v_hybrid = 0.0;   // fitted maximum with measured minimum
  double delta = 0.0;
  double offset = 0.0;     // fitted mean level
  double amplitude = 0.0;  // fitted modulation amplitude
  double residual_rms = 0.0;
};

// Fits counts = offset + amplitude*cos(2x + delta) by linear least squares
// and reports V = amplitude/offset plus the hybrid estimator
// (fit maximum - measured minimum) / (fit maximum + measured minimum).
VisibilityFit visibility(const std::vector<FringePoint>& fringe);

struct FrequencyFit {
  double omega = 0.0;
  double omega_std = 0.0;
};

// Free-frequency cosine fit, for checking the fringe period.
FrequencyFit fit_fringe_frequency(const std::vector<FringePoint>& fringe);

enum class Shifter { phi1, theta1, theta2, phi2, phi3, theta3, phi4, theta4 };
std::string to_string(Shifter s);
std::optional<Shifter> parse_shifter(const std::string& name);

struct ScanPoint {
  double voltage = 0.0;
  double rate_hz = 0.0;
};

// Simulated calibration sweep of one phase shifter: the shifter phase is
// driven through `calib`, all other phases sit at a per-shifter preset that
// makes the monitored (a,c) coincidence rate a clean interference fringe,
// and the count rate (including the pump-split emission weight) is Poisson
// sampled over t_s. Output feeds fit_calibration.
struct ThermalCalib;  // calibration.hpp
std::vector<ScanPoint> calibration_scan(Shifter shifter, const std::vector<double>& voltages,
                                        const ThermalCalib& calib, const SourceParams& src,
                                        const DetectorBank& det, double pair_rate_hz, double t_s,
                                        std::uint64_t seed);

// Deterministic coincidence-to-accidental model at a given pair rate:
// true rate sums eta_j eta_k R p_jk over the four pairs; the accidental rate
// pairs the corresponding singles within the coincidence window.
struct CarPoint {
  double pgr_hz = 0.0;
  double car = 0.0;  // +inf when the window is zero
};

CarPoint car_at(const DensityMatrix& rho, const DetectorBank& det, double pair_rate_hz);
std::vector<CarPoint> car_sweep(const DensityMatrix& rho, const DetectorBank& det,
                                const std::vector<double>& pair_rates_hz);

// Least-squares slope of log(car) vs log(pgr); requires >= 2 finite points.
double loglog_slope(const std::vector<CarPoint>& points);

}  // namespace bellgen
