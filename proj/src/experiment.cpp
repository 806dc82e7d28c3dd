#include "bellgen/experiment.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bellgen/calibration.hpp"
#include "bellgen/errors.hpp"
#include "bellgen/optim.hpp"
#include "bellgen/rng.hpp"

namespace bellgen {

namespace {

constexpr double kPi = 3.14159265358979323846;

double trace_prob(const Mat4c& rho, const Mat4c& proj) {
  return std::max(0.0, (rho * proj).trace().real());
}

}  // namespace

void DetectorBank::validate() const {
  for (double e : eta) {
    if (!(e > 0.0) || !(e <= 1.0)) {
      throw validation_error("detector efficiencies must lie in (0, 1]");
    }
  }
  if (!(window_s > 0.0)) throw validation_error("coincidence window must be positive");
  if (!(dark_hz >= 0.0)) throw validation_error("dark-count rate must be nonnegative");
}

void NoiseModel::validate() const {
  if (!(visibility >= 0.0) || !(visibility <= 1.0)) {
    throw validation_error("noise visibility must lie in [0, 1]");
  }
  if (!(phase_jitter >= 0.0)) throw validation_error("phase jitter must be nonnegative");
}

std::string setting_label(const PauliSetting& s) { return to_string(s.a) + to_string(s.b); }

PauliSetting parse_setting_label(const std::string& label) {
  if (label.size() != 2) throw validation_error("setting label must be two Pauli letters");
  const auto a = parse_pauli(label[0]);
  const auto b = parse_pauli(label[1]);
  if (!a || !b) throw validation_error("unknown Pauli in setting label '" + label + "'");
  return {*a, *b};
}

const std::array<PauliSetting, 9>& all_settings() {
  static const std::array<PauliSetting, 9> settings = [] {
    std::array<PauliSetting, 9> out{};
    const std::array<Pauli, 3> ps{Pauli::X, Pauli::Y, Pauli::Z};
    int k = 0;
    for (Pauli a : ps)
      for (Pauli b : ps) out[k++] = {a, b};
    return out;
  }();
  return settings;
}

std::array<Mat4c, 4> projectors_for_setting(const PauliSetting& s) {
  return {projector_for(RailA::a, RailB::c, s.a, s.b), projector_for(RailA::a, RailB::d, s.a, s.b),
          projector_for(RailA::b, RailB::c, s.a, s.b), projector_for(RailA::b, RailB::d, s.a, s.b)};
}

DensityMatrix apply_noise(const TwoQubitKet& psi, const NoiseModel& nm) {
  nm.validate();
  const double coherence = nm.visibility * std::exp(-0.5 * nm.phase_jitter * nm.phase_jitter);
  const Vec4c& a = psi.amplitudes();
  Mat4c rho = a * a.adjoint();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const bool cross_source = (i < 2) != (j < 2);
      if (cross_source) rho(i, j) *= coherence;
    }
  }
  return DensityMatrix::from_matrix(rho);
}

double accidental_rate(double singles_j_hz, double singles_k_hz, double window_s) {
  if (singles_j_hz < 0.0 || singles_k_hz < 0.0 || window_s < 0.0) {
    throw validation_error("accidental rate inputs must be nonnegative");
  }
  return singles_j_hz * singles_k_hz * window_s;
}

std::array<double, 4> ExpectedCounts::total() const {
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = signal[i] + accidentals[i];
  return out;
}

ExpectedCounts expected_counts(const DensityMatrix& rho, const PauliSetting& setting,
                               const DetectorBank& det, double pair_rate_hz, double t_s) {
  det.validate();
  if (!(pair_rate_hz >= 0.0)) throw validation_error("pair rate must be nonnegative");
  if (!(t_s > 0.0)) throw validation_error("integration time must be positive");

  const auto projectors = projectors_for_setting(setting);
  std::array<double, 4> p{};
  for (int i = 0; i < 4; ++i) p[i] = trace_prob(rho.matrix(), projectors[i]);

  // Pair index -> rails: 0:(a,c) 1:(a,d) 2:(b,c) 3:(b,d).
  ExpectedCounts out;
  const std::array<int, 4> rail_a{0, 0, 1, 1};
  const std::array<int, 4> rail_b{2, 3, 2, 3};
  for (int i = 0; i < 4; ++i) {
    out.signal[i] = det.eta[rail_a[i]] * det.eta[rail_b[i]] * pair_rate_hz * t_s * p[i];
  }
  // Marginal single rates per rail: the pair probabilities already sum the
  // partner rail out (the four projectors are complete).
  out.singles_hz[0] = det.eta[0] * pair_rate_hz * (p[0] + p[1]) + det.dark_hz;
  out.singles_hz[1] = det.eta[1] * pair_rate_hz * (p[2] + p[3]) + det.dark_hz;
  out.singles_hz[2] = det.eta[2] * pair_rate_hz * (p[0] + p[2]) + det.dark_hz;
  out.singles_hz[3] = det.eta[3] * pair_rate_hz * (p[1] + p[3]) + det.dark_hz;
  for (int i = 0; i < 4; ++i) {
    out.accidentals[i] =
        accidental_rate(out.singles_hz[rail_a[i]], out.singles_hz[rail_b[i]], det.window_s) * t_s;
  }
  return out;
}

CoincidenceRecord sample_record(const std::array<double, 4>& expected,
                                const PauliSetting& setting, double t_s, std::uint64_t seed) {
  CoincidenceRecord rec;
  rec.setting_id = setting_label(setting);
  rec.integration_s = t_s;
  rec.seed = seed;
  Rng rng(seed);
  for (int i = 0; i < 4; ++i) {
    if (expected[i] < 0.0) throw validation_error("expected counts must be nonnegative");
    rec.counts[i] = static_cast<double>(rng.poisson(expected[i]));
  }
  return rec;
}

std::vector<CoincidenceRecord> acquire_tomography(const PhaseConfig& cfg, const SourceParams& src,
                                                  const DetectorBank& det, const NoiseModel& nm,
                                                  double pair_rate_hz, double t_s,
                                                  std::uint64_t seed, bool subtract_accidentals) {
  const TwoQubitKet psi = generate_state(cfg, src);
  const DensityMatrix rho = apply_noise(psi, nm);

  std::vector<CoincidenceRecord> records(9);
  for (std::size_t idx = 0; idx < 9; ++idx) {
    const PauliSetting& setting = all_settings()[idx];
    const ExpectedCounts exp = expected_counts(rho, setting, det, pair_rate_hz, t_s);
    CoincidenceRecord rec = sample_record(exp.total(), setting, t_s, derive_seed(seed, idx));
    if (subtract_accidentals) {
      for (int i = 0; i < 4; ++i) rec.counts[i] = std::max(0.0, rec.counts[i] - exp.accidentals[i]);
      rec.accidentals_subtracted = true;
    }
    records[idx] = std::move(rec);
  }
  return records;
}

double noon_expected(double theta3, const NoiseModel& nm, double pair_rate_hz, double t_s,
                     double delta) {
  nm.validate();
  // The fringe oscillates in 2*theta3, so jitter sigma on theta3 enters as
  // exp(-(2 sigma)^2 / 2).
  const double vf =
      nm.visibility * std::exp(-2.0 * nm.phase_jitter * nm.phase_jitter);
  return pair_rate_hz * t_s * 0.5 * (1.0 + vf * std::cos(2.0 * theta3 + delta));
}

std::vector<FringePoint> noon_fringe(const std::vector<double>& theta3_grid, const NoiseModel& nm,
                                     double pair_rate_hz, double t_s, std::uint64_t seed,
                                     double delta) {
  if (theta3_grid.empty()) throw validation_error("fringe grid must be nonempty");
  std::vector<FringePoint> out(theta3_grid.size());
  for (std::size_t i = 0; i < theta3_grid.size(); ++i) {
    const double mean = noon_expected(theta3_grid[i], nm, pair_rate_hz, t_s, delta);
    Rng rng(derive_seed(seed, i));
    out[i] = {theta3_grid[i], static_cast<double>(rng.poisson(mean)), mean};
  }
  return out;
}

VisibilityFit visibility(const std::vector<FringePoint>& fringe) {
  const int n = static_cast<int>(fringe.size());
  if (n < 6) throw validation_error("visibility fit needs at least 6 fringe points");

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  double ymin = fringe[0].counts;
  for (int i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(2.0 * fringe[i].x);
    design(i, 2) = std::sin(2.0 * fringe[i].x);
    y(i) = fringe[i].counts;
    ymin = std::min(ymin, fringe[i].counts);
  }
  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd c = gram.ldlt().solve(design.transpose() * y);
  const double m = c(0);
  const double k = std::hypot(c(1), c(2));

  VisibilityFit fit;
  fit.offset = m;
  fit.amplitude = k;
  fit.delta = std::atan2(-c(2), c(1));
  fit.v_fit = (m > 0.0) ? std::clamp(k / m, 0.0, 1.0) : 0.0;

  const Eigen::VectorXd resid = design * c - y;
  fit.residual_rms = std::sqrt(resid.squaredNorm() / std::max(1, n - 3));
  if (m > 0.0 && k > 0.0 && n > 3) {
    const double s2 = resid.squaredNorm() / (n - 3);
    const Eigen::MatrixXd cov = s2 * gram.ldlt().solve(Eigen::MatrixXd::Identity(3, 3));
    Eigen::Vector3d grad(-k / (m * m), c(1) / (k * m), c(2) / (k * m));
    fit.v_fit_std = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
  }

  const double fit_max = m + k;
  const double denom = fit_max + ymin;
  fit.v_hybrid = (denom > 0.0) ? std::clamp((fit_max - ymin) / denom, 0.0, 1.0) : 0.0;
  return fit;
}

FrequencyFit fit_fringe_frequency(const std::vector<FringePoint>& fringe) {
  const int n = static_cast<int>(fringe.size());
  if (n < 6) throw validation_error("frequency fit needs at least 6 fringe points");
  const VisibilityFit seed = visibility(fringe);

  const ResidualFn residuals = [&fringe](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    for (int i = 0; i < static_cast<int>(fringe.size()); ++i) {
      out(i) = p(0) + p(1) * std::cos(p(2) * fringe[i].x + p(3)) - fringe[i].counts;
    }
  };
  Eigen::VectorXd x0(4);
  x0 << seed.offset, seed.amplitude, 2.0, seed.delta;
  LmOptions opts;
  opts.max_iters = 300;
  const LmResult res = levenberg_marquardt(residuals, n, x0, opts);
  if (!res.converged) throw fit_error("free-frequency fringe fit did not converge");

  const Eigen::MatrixXd cov = lm_covariance(residuals, n, res.x);
  FrequencyFit out;
  out.omega = std::fabs(res.x(2));
  out.omega_std = std::sqrt(std::max(0.0, cov(2, 2)));
  return out;
}

std::string to_string(Shifter s) {
  switch (s) {
    case Shifter::phi1: return "phi1";
    case Shifter::theta1: return "theta1";
    case Shifter::theta2: return "theta2";
    case Shifter::phi2: return "phi2";
    case Shifter::phi3: return "phi3";
    case Shifter::theta3: return "theta3";
    case Shifter::phi4: return "phi4";
    case Shifter::theta4: return "theta4";
  }
  return "?";
}

std::optional<Shifter> parse_shifter(const std::string& name) {
  if (name == "phi1") return Shifter::phi1;
  if (name == "theta1") return Shifter::theta1;
  if (name == "theta2") return Shifter::theta2;
  if (name == "phi2") return Shifter::phi2;
  if (name == "phi3") return Shifter::phi3;
  if (name == "theta3") return Shifter::theta3;
  if (name == "phi4") return Shifter::phi4;
  if (name == "theta4") return Shifter::theta4;
  return std::nullopt;
}

namespace {

// Per-shifter scan preset: circuit phases and analysis setting for which the
// monitored (a,c) coincidence rate traces a clean fringe in the scanned
// phase. Bell-type presets use the balanced pump angle.
struct ScanPreset {
  PhaseConfig cfg;
  PauliSetting analysis;
};

ScanPreset scan_preset(Shifter shifter, const SourceParams& src) {
  const double bal = balanced_phi1(src.eta_a, src.eta_b);
  ScanPreset p;
  switch (shifter) {
    case Shifter::phi1:
      p.cfg.phi2 = kPi;
      p.analysis = {Pauli::Z, Pauli::Z};
      break;
    case Shifter::theta1:
    case Shifter::theta2:
      p.cfg.phi1 = bal;
      p.cfg.phi2 = kPi;
      p.analysis = {Pauli::X, Pauli::X};
      break;
    case Shifter::phi2:
      p.cfg.phi1 = bal;
      p.analysis = {Pauli::Z, Pauli::Z};
      break;
    case Shifter::phi3:
      p.cfg.phi1 = 0.0;  // source B only -> qubit A in |1>
      p.cfg.phi2 = 0.0;
      p.analysis = {Pauli::Z, Pauli::Z};
      break;
    case Shifter::theta3:
      p.cfg.phi1 = bal;  // Phi- state
      p.cfg.phi2 = kPi;
      p.analysis = {Pauli::X, Pauli::X};
      break;
    case Shifter::phi4:
      p.cfg.phi1 = kPi;  // source A only -> qubit B in |1>
      p.cfg.phi2 = 0.0;
      p.analysis = {Pauli::Z, Pauli::Z};
      break;
    case Shifter::theta4:
      p.cfg.phi1 = bal;
      p.cfg.phi2 = kPi;
      p.analysis = {Pauli::X, Pauli::X};
      break;
  }
  return p;
}

void assign_phase(PhaseConfig& cfg, Shifter shifter, double value) {
  switch (shifter) {
    case Shifter::phi1: cfg.phi1 = value; break;
    case Shifter::theta1: cfg.theta1 = value; break;
    case Shifter::theta2: cfg.theta2 = value; break;
    case Shifter::phi2: cfg.phi2 = value; break;
    case Shifter::phi3: cfg.phi3 = value; break;
    case Shifter::theta3: cfg.theta3 = value; break;
    case Shifter::phi4: cfg.phi4 = value; break;
    case Shifter::theta4: cfg.theta4 = value; break;
  }
}

}  // namespace

std::vector<ScanPoint> calibration_scan(Shifter shifter, const std::vector<double>& voltages,
                                        const ThermalCalib& calib, const SourceParams& src,
                                        const DetectorBank& det, double pair_rate_hz, double t_s,
                                        std::uint64_t seed) {
  if (voltages.empty()) throw validation_error("voltage grid must be nonempty");
  calib.validate();
  det.validate();
  src.validate();
  if (!(t_s > 0.0)) throw validation_error("integration time must be positive");

  const ScanPreset preset = scan_preset(shifter, src);
  // Normalize the emission weight so the configured pair rate corresponds to
  // the strongest pumping configuration of the sweep family.
  const double w0 =
      src.pump_power * std::max(src.eta_a * src.eta_a, src.eta_b * src.eta_b);

  std::vector<ScanPoint> out(voltages.size());
  for (std::size_t i = 0; i < voltages.size(); ++i) {
    PhaseConfig cfg = preset.cfg;
    const ProjectionPhases proj = projection_setting(preset.analysis.a, preset.analysis.b);
    cfg.phi3 = proj.phi3;
    cfg.theta3 = proj.theta3;
    cfg.phi4 = proj.phi4;
    cfg.theta4 = proj.theta4;
    assign_phase(cfg, shifter, phase_from_voltage(calib, voltages[i]));

    double mean = 0.0;
    const double weight = pair_emission_weight(cfg, src) / w0;
    if (weight > 0.0) {
      const TwoQubitKet psi = generate_state(cfg, src);
      const Mat4c proj_ac = projector_from_phases(
          RailA::a, RailB::c, {cfg.phi3, cfg.theta3, cfg.phi4, cfg.theta4});
      const double p_ac = trace_prob(DensityMatrix::pure(psi).matrix(), proj_ac);
      mean = det.eta[0] * det.eta[2] * pair_rate_hz * weight * p_ac * t_s;
    }
    Rng rng(derive_seed(seed, i));
    out[i] = {voltages[i], static_cast<double>(rng.poisson(mean)) / t_s};
  }
  return out;
}

CarPoint car_at(const DensityMatrix& rho, const DetectorBank& det, double pair_rate_hz) {
  det.validate();
  if (!(pair_rate_hz >= 0.0)) throw validation_error("pair rate must be nonnegative");
  const ExpectedCounts exp = expected_counts(rho, {Pauli::Z, Pauli::Z}, det, pair_rate_hz, 1.0);
  double true_rate = 0.0, acc_rate = 0.0;
  for (int i = 0; i < 4; ++i) {
    true_rate += exp.signal[i];
    acc_rate += exp.accidentals[i];
  }
  CarPoint point;
  point.pgr_hz = pair_rate_hz;
  point.car = (acc_rate > 0.0) ? true_rate / acc_rate : std::numeric_limits<double>::infinity();
  return point;
}

std::vector<CarPoint> car_sweep(const DensityMatrix& rho, const DetectorBank& det,
                                const std::vector<double>& pair_rates_hz) {
  std::vector<CarPoint> out;
  out.reserve(pair_rates_hz.size());
  for (double r : pair_rates_hz) out.push_back(car_at(rho, det, r));
  return out;
}

double loglog_slope(const std::vector<CarPoint>& points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : points) {
    if (!(p.pgr_hz > 0.0) || !std::isfinite(p.car) || !(p.car > 0.0)) continue;
    const double x = std::log(p.pgr_hz);
    const double y = std::log(p.car);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw validation_error("log-log slope needs at least two finite points");
  const double denom = n * sxx - sx * sx;
  if (std::fabs(denom) < 1e-30) throw validation_error("log-log slope is degenerate");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace bellgen
