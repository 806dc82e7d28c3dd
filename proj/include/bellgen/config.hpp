#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bellgen/calibration.hpp"
#include "bellgen/circuit.hpp"
#include "bellgen/experiment.hpp"

namespace bellgen {

struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  int points = 2;

  std::vector<double> linspace() const;
  std::vector<double> logspace() const;  // start/stop > 0
};

struct TomographyConfig {
  int n_starts = 8;
  int max_iters = 2000;
  int mc_samples = 60;
  int mc_starts = 3;
  std::string records_file;  // reconstruct from this file instead of simulating
};

struct NoonConfig {
  GridSpec grid{0.0, 6.283185307179586, 25};
  double delta = 0.0;
};

struct CalibrationConfig {
  Shifter shifter = Shifter::phi2;
  GridSpec voltages{0.0, 4.0, 41};
  ThermalCalib calib{0.3, 1.0, 0.02};
  std::string scan_file;  // fit this CSV instead of simulating a scan
  std::vector<double> lookup_phases;
};

struct CarConfig {
  GridSpec pgr{1e4, 1e6, 21};
};

// Full experiment description; see configs/ for examples. `seed` is
// mandatory: there is no wall-clock seeding anywhere.
struct ExperimentConfig {
  std::optional<TargetState> target;
  std::optional<PhaseConfig> phases;  // explicit phases override the preset
  SourceParams source;
  DetectorBank detectors;
  NoiseModel noise;
  double pair_rate_hz = 1e7;  // generated (on-chip) pair rate
  double integration_s = 2.0;
  std::uint64_t seed = 0;
  bool subtract_accidentals = true;
  TomographyConfig tomography;
  NoonConfig noon;
  CalibrationConfig calibration;
  CarConfig car;
  std::string out_dir = "out";
  nlohmann::json metadata;  // inert passthrough (wavelengths etc.)

  std::string config_hash;  // FNV-1a of the canonical parsed JSON

  // Preparation phases: explicit ones if given, else the preset for target.
  PhaseConfig preparation_phases() const;
  // Declared comparison target: the named one, else the ideal generated state.
  TwoQubitKet declared_target() const;
};

// Parses and validates; throws config_error carrying the JSON path of the
// offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

// Calibration scans as two-column CSV (volts, counts/s). Lines starting
// with '#' and non-numeric header rows are skipped; comma or whitespace
// separated.
std::vector<VoltageRatePoint> parse_scan_csv(const std::string& text);

// Tomography records <-> JSON array of
// {setting, counts[4], integration_s, seed, accidentals_subtracted}.
nlohmann::json records_to_json(const std::vector<CoincidenceRecord>& records);
std::vector<CoincidenceRecord> records_from_json(const nlohmann::json& j);

}  // namespace bellgen
