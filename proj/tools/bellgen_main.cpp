// bellgen: simulate a programmable two-source photonic Bell-state generator,
// acquire coincidence tomography data, and reconstruct density matrices.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "bellgen/circuit.hpp"
#include "bellgen/config.hpp"
#include "bellgen/errors.hpp"
#include "bellgen/experiment.hpp"
#include "bellgen/quantum.hpp"
#include "bellgen/report.hpp"
#include "bellgen/rng.hpp"
#include "bellgen/tomography.hpp"

namespace {

using bellgen::ExperimentConfig;
using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "csv";
  bool explain = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_format) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out_dir, "output directory (overrides BELLGEN_OUT and config)");
  if (with_format) {
    cmd->add_option("--format", args.format, "data file format")
        ->check(CLI::IsMember({"json", "csv"}));
  }
}

ExperimentConfig load(const CommonArgs& args) {
  ExperimentConfig cfg = bellgen::load_config_file(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out_dir.empty()) {
    cfg.out_dir = args.out_dir;
  } else if (const char* env = std::getenv("BELLGEN_OUT"); env && *env) {
    cfg.out_dir = env;
  }
  return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return cfg.out_dir + "/" + name;
}

std::string provenance(const ExperimentConfig& cfg) {
  return "config_hash=" + cfg.config_hash + " seed=" + std::to_string(cfg.seed);
}

json base_report(const ExperimentConfig& cfg, const std::string& command) {
  json j;
  j["command"] = command;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  return j;
}

json phases_json(const bellgen::PhaseConfig& p) {
  json j;
  j["phi1"] = bellgen::jnum(p.phi1);
  j["theta1"] = bellgen::jnum(p.theta1);
  j["theta2"] = bellgen::jnum(p.theta2);
  j["phi2"] = bellgen::jnum(p.phi2);
  j["phi3"] = bellgen::jnum(p.phi3);
  j["theta3"] = bellgen::jnum(p.theta3);
  j["phi4"] = bellgen::jnum(p.phi4);
  j["theta4"] = bellgen::jnum(p.theta4);
  return j;
}

json rho_json(const bellgen::Mat4c& m) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) rows.push_back(bellgen::jcomplex(m(i, j)));
  }
  return rows;
}

int cmd_generate(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const bellgen::PhaseConfig phases = cfg.preparation_phases();
  const bellgen::TwoQubitKet psi = bellgen::generate_state(phases, cfg.source);
  const auto coeffs = bellgen::bell_decompose(psi);

  json rep = base_report(cfg, "generate");
  rep["target"] = cfg.target ? bellgen::to_string(*cfg.target) : "custom";
  rep["phases"] = phases_json(phases);
  json amps = json::array();
  for (int i = 0; i < 4; ++i) amps.push_back(bellgen::jcomplex(psi.amplitude(i)));
  rep["state"] = amps;
  const std::array<std::string, 4> bell_names{"phi_plus", "phi_minus", "psi_plus", "psi_minus"};
  json bc, bw;
  for (int i = 0; i < 4; ++i) {
    bc[bell_names[static_cast<std::size_t>(i)]] = bellgen::jcomplex(coeffs[static_cast<std::size_t>(i)]);
    bw[bell_names[static_cast<std::size_t>(i)]] = bellgen::jnum(std::norm(coeffs[static_cast<std::size_t>(i)]));
  }
  rep["bell_coefficients"] = bc;
  rep["bell_weights"] = bw;
  rep["balanced_phi1"] = bellgen::jnum(bellgen::balanced_phi1(cfg.source.eta_a, cfg.source.eta_b));

  bellgen::write_text_file(out_path(cfg, "generate.json"), bellgen::dump_json(rep));

  if (args.explain) std::cout << bellgen::explain_presets(cfg.source) << "\n";
  std::cout << "generated state (" << rep["target"].get<std::string>() << "):\n";
  const std::array<std::string, 4> basis{"|00>", "|01>", "|10>", "|11>"};
  for (int i = 0; i < 4; ++i) {
    std::cout << "  " << basis[static_cast<std::size_t>(i)] << "  "
              << bellgen::format_sig12(psi.amplitude(i).real()) << "  "
              << bellgen::format_sig12(psi.amplitude(i).imag()) << "i\n";
  }
  std::cout << "report: " << out_path(cfg, "generate.json") << "\n";
  return 0;
}

int cmd_tomography(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const bellgen::PhaseConfig phases = cfg.preparation_phases();

  std::vector<bellgen::CoincidenceRecord> records;
  if (!cfg.tomography.records_file.empty()) {
    records = bellgen::records_from_json(
        json::parse(bellgen::read_text_file(cfg.tomography.records_file)));
  } else {
    records = bellgen::acquire_tomography(phases, cfg.source, cfg.detectors, cfg.noise,
                                          cfg.pair_rate_hz, cfg.integration_s, cfg.seed,
                                          cfg.subtract_accidentals);
  }
  json recs = base_report(cfg, "tomography-records");
  recs["records"] = bellgen::records_to_json(records);
  bellgen::write_text_file(out_path(cfg, "tomography_records.json"), bellgen::dump_json(recs));

  const bellgen::TwoQubitKet target = cfg.declared_target();
  bellgen::MleOptions mo;
  mo.n_starts = cfg.tomography.n_starts;
  mo.max_iters = cfg.tomography.max_iters;
  mo.parallel = true;

  bellgen::MleFit fit = [&] {
    try {
      return bellgen::mle_reconstruct(records, mo);
    } catch (const bellgen::fit_error& e) {
      json diag = base_report(cfg, "tomography-diagnostics");
      diag["error"] = e.what();
      bellgen::write_text_file(out_path(cfg, "tomography_diagnostics.json"),
                               bellgen::dump_json(diag));
      throw;
    }
  }();

  bellgen::McOptions mc;
  mc.n_samples = cfg.tomography.mc_samples;
  mc.starts_per_sample = cfg.tomography.mc_starts;
  mc.max_iters = cfg.tomography.max_iters;
  mc.seed = bellgen::derive_seed(cfg.seed, 0xACCE55ULL);
  mc.parallel = true;
  const bellgen::McUncertainty unc = bellgen::monte_carlo_uncertainty(records, fit, target, mc);
  const bellgen::StateMetrics metrics = bellgen::compute_metrics(fit.rho, target);

  json rep = base_report(cfg, "tomography");
  rep["target"] = cfg.target ? bellgen::to_string(*cfg.target) : "custom";
  rep["rho"] = rho_json(fit.rho.matrix());
  rep["norms"] = {bellgen::jnum(fit.norms[0]), bellgen::jnum(fit.norms[1]),
                  bellgen::jnum(fit.norms[2]), bellgen::jnum(fit.norms[3])};
  rep["objective"] = bellgen::jnum(fit.objective);
  rep["best_start"] = fit.best_start;
  rep["metrics"] = {{"fidelity", bellgen::jnum(metrics.fidelity)},
                    {"concurrence", bellgen::jnum(metrics.concurrence)},
                    {"entropy_a", bellgen::jnum(metrics.entropy_a)},
                    {"entropy_b", bellgen::jnum(metrics.entropy_b)}};
  rep["uncertainties"] = {{"fidelity", bellgen::jnum(unc.std_fidelity)},
                          {"concurrence", bellgen::jnum(unc.std_concurrence)},
                          {"entropy_a", bellgen::jnum(unc.std_entropy_a)},
                          {"entropy_b", bellgen::jnum(unc.std_entropy_b)}};
  rep["monte_carlo"] = {{"samples", unc.n_samples}, {"failures", unc.n_failures}};
  bellgen::write_text_file(out_path(cfg, "tomography_result.json"), bellgen::dump_json(rep));

  std::cout << "state      F           C           S_A         S_B\n";
  std::cout << rep["target"].get<std::string>() << "  "
            << bellgen::format_sig12(metrics.fidelity) << " +- "
            << bellgen::format_sig12(unc.std_fidelity) << "  "
            << bellgen::format_sig12(metrics.concurrence) << " +- "
            << bellgen::format_sig12(unc.std_concurrence) << "  "
            << bellgen::format_sig12(metrics.entropy_a) << " +- "
            << bellgen::format_sig12(unc.std_entropy_a) << "  "
            << bellgen::format_sig12(metrics.entropy_b) << " +- "
            << bellgen::format_sig12(unc.std_entropy_b) << "\n";
  std::cout << "report: " << out_path(cfg, "tomography_result.json") << "\n";
  return 0;
}

int cmd_noon(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const auto grid = cfg.noon.grid.linspace();
  // Coincidences are measured between rails a and b of qubit A.
  const double detected_rate = cfg.detectors.eta[0] * cfg.detectors.eta[1] * cfg.pair_rate_hz;
  const auto fringe = bellgen::noon_fringe(grid, cfg.noise, detected_rate, cfg.integration_s,
                                           cfg.seed, cfg.noon.delta);
  const bellgen::VisibilityFit vis = bellgen::visibility(fringe);
  const bellgen::FrequencyFit freq = bellgen::fit_fringe_frequency(fringe);

  if (args.format == "json") {
    json data = base_report(cfg, "noon-fringe");
    json pts = json::array();
    for (const auto& p : fringe) {
      pts.push_back({{"theta3", bellgen::jnum(p.x)},
                     {"counts", bellgen::jnum(p.counts)},
                     {"expected", bellgen::jnum(p.expected)}});
    }
    data["fringe"] = pts;
    bellgen::write_text_file(out_path(cfg, "noon_fringe.json"), bellgen::dump_json(data));
  } else {
    bellgen::CsvWriter csv(provenance(cfg), {"theta3_rad", "counts", "expected"});
    for (const auto& p : fringe) csv.add_row({p.x, p.counts, p.expected});
    bellgen::write_text_file(out_path(cfg, "noon_fringe.csv"), csv.str());
  }

  json rep = base_report(cfg, "noon");
  rep["visibility_fit"] = bellgen::jnum(vis.v_fit);
  rep["visibility_fit_std"] = bellgen::jnum(vis.v_fit_std);
  rep["visibility_hybrid"] = bellgen::jnum(vis.v_hybrid);
  rep["delta"] = bellgen::jnum(vis.delta);
  rep["offset"] = bellgen::jnum(vis.offset);
  rep["amplitude"] = bellgen::jnum(vis.amplitude);
  rep["residual_rms"] = bellgen::jnum(vis.residual_rms);
  rep["fringe_omega"] = bellgen::jnum(freq.omega);
  rep["fringe_omega_std"] = bellgen::jnum(freq.omega_std);
  rep["fringe_period"] = bellgen::jnum(2.0 * 3.14159265358979323846 / freq.omega);
  bellgen::write_text_file(out_path(cfg, "noon_visibility.json"), bellgen::dump_json(rep));

  std::cout << "visibility (fit):    " << bellgen::format_sig12(vis.v_fit) << " +- "
            << bellgen::format_sig12(vis.v_fit_std) << "\n"
            << "visibility (hybrid): " << bellgen::format_sig12(vis.v_hybrid) << "\n"
            << "fringe period:       " << bellgen::format_sig12(2.0 * 3.14159265358979323846 / freq.omega)
            << " rad\n";
  return 0;
}

int cmd_calibrate(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);

  std::vector<bellgen::VoltageRatePoint> scan;
  if (!cfg.calibration.scan_file.empty()) {
    scan = bellgen::parse_scan_csv(bellgen::read_text_file(cfg.calibration.scan_file));
  } else {
    const auto points = bellgen::calibration_scan(
        cfg.calibration.shifter, cfg.calibration.voltages.linspace(), cfg.calibration.calib,
        cfg.source, cfg.detectors, cfg.pair_rate_hz, cfg.integration_s, cfg.seed);
    scan.reserve(points.size());
    for (const auto& p : points) scan.push_back({p.voltage, p.rate_hz});
    if (args.format == "json") {
      json data = base_report(cfg, "calibration-scan");
      json pts = json::array();
      for (const auto& p : points) {
        pts.push_back({{"voltage", bellgen::jnum(p.voltage)}, {"rate_hz", bellgen::jnum(p.rate_hz)}});
      }
      data["scan"] = pts;
      bellgen::write_text_file(out_path(cfg, "calibration_scan.json"), bellgen::dump_json(data));
    } else {
      bellgen::CsvWriter csv(provenance(cfg), {"voltage", "rate_hz"});
      for (const auto& p : points) csv.add_row({p.voltage, p.rate_hz});
      bellgen::write_text_file(out_path(cfg, "calibration_scan.csv"), csv.str());
    }
  }

  const bellgen::CalibrationFit fit = bellgen::fit_calibration(scan);

  json rep = base_report(cfg, "calibrate");
  rep["shifter"] = bellgen::to_string(cfg.calibration.shifter);
  rep["xi0"] = bellgen::jnum(fit.calib.xi0);
  rep["alpha"] = bellgen::jnum(fit.calib.alpha);
  rep["beta"] = bellgen::jnum(fit.calib.beta);
  rep["amplitude"] = bellgen::jnum(fit.amplitude);
  rep["offset"] = bellgen::jnum(fit.offset);
  rep["residual_norm"] = bellgen::jnum(fit.residual_norm);
  rep["residual_rms"] = bellgen::jnum(fit.residual_rms);
  rep["restarts_used"] = fit.restarts_used;
  if (!cfg.calibration.lookup_phases.empty()) {
    json lookup = json::array();
    for (double phase : cfg.calibration.lookup_phases) {
      lookup.push_back({{"phase_rad", bellgen::jnum(phase)},
                        {"voltage", bellgen::jnum(bellgen::voltage_for_phase(fit.calib, phase))}});
    }
    rep["lookup"] = lookup;
  }
  bellgen::write_text_file(out_path(cfg, "calibration.json"), bellgen::dump_json(rep));

  std::cout << "xi0 = " << bellgen::format_sig12(fit.calib.xi0)
            << " rad, alpha = " << bellgen::format_sig12(fit.calib.alpha)
            << " rad/V^2, beta = " << bellgen::format_sig12(fit.calib.beta)
            << " /V^2 (residual rms " << bellgen::format_sig12(fit.residual_rms) << ")\n";
  return 0;
}

int cmd_car_sweep(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const auto grid = cfg.car.pgr.logspace();

  if (cfg.detectors.window_s == 0.0) {
    std::cerr << "warning: zero coincidence window, accidental rate is zero and CAR is infinite\n";
    bellgen::CsvWriter csv(provenance(cfg), {"pgr_hz", "car"});
    for (double r : grid) csv.add_row_text({bellgen::format_sig12(r), "inf"});
    bellgen::write_text_file(out_path(cfg, "car_sweep.csv"), csv.str());
    json rep = base_report(cfg, "car-sweep");
    rep["slope"] = nullptr;
    rep["note"] = "zero coincidence window; CAR sentinel 'inf' emitted";
    bellgen::write_text_file(out_path(cfg, "car_slope.json"), bellgen::dump_json(rep));
    return 0;
  }

  const bellgen::PhaseConfig phases = cfg.preparation_phases();
  const bellgen::DensityMatrix rho =
      bellgen::apply_noise(bellgen::generate_state(phases, cfg.source), cfg.noise);
  const auto points = bellgen::car_sweep(rho, cfg.detectors, grid);

  if (args.format == "json") {
    json data = base_report(cfg, "car-sweep-data");
    json pts = json::array();
    for (const auto& p : points) {
      pts.push_back({{"pgr_hz", bellgen::jnum(p.pgr_hz)}, {"car", bellgen::jnum(p.car)}});
    }
    data["points"] = pts;
    bellgen::write_text_file(out_path(cfg, "car_sweep.json"), bellgen::dump_json(data));
  } else {
    bellgen::CsvWriter csv(provenance(cfg), {"pgr_hz", "car"});
    for (const auto& p : points) csv.add_row({p.pgr_hz, p.car});
    bellgen::write_text_file(out_path(cfg, "car_sweep.csv"), csv.str());
  }

  json rep = base_report(cfg, "car-sweep");
  if (points.size() >= 2) {
    rep["slope"] = bellgen::jnum(bellgen::loglog_slope(points));
  } else {
    rep["slope"] = nullptr;
  }
  bellgen::write_text_file(out_path(cfg, "car_slope.json"), bellgen::dump_json(rep));

  if (points.size() >= 2) {
    std::cout << "log-log slope: " << bellgen::format_sig12(bellgen::loglog_slope(points)) << "\n";
  } else {
    std::cout << "single point; no slope fitted\n";
  }
  return 0;
}

int report_error_and_exit_code(const std::exception& e) {
  json err;
  int code = 3;
  std::string kind = "internal";
  if (const auto* ce = dynamic_cast<const bellgen::config_error*>(&e)) {
    code = 2;
    kind = "config";
    err["error"]["path"] = ce->path();
  } else if (dynamic_cast<const bellgen::validation_error*>(&e) ||
             dynamic_cast<const bellgen::degenerate_input_error*>(&e)) {
    code = 2;
    kind = "validation";
  } else if (dynamic_cast<const bellgen::saturation_error*>(&e)) {
    code = 3;
    kind = "range";
  } else if (dynamic_cast<const bellgen::fit_error*>(&e)) {
    code = 3;
    kind = "numerical";
  }
  err["error"]["exit_code"] = code;
  err["error"]["kind"] = kind;
  err["error"]["message"] = e.what();
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"programmable Bell-state generator: simulation, tomography, calibration"};
  app.require_subcommand(1);

  CommonArgs gen_args, tomo_args, noon_args, cal_args, car_args;

  CLI::App* gen = app.add_subcommand("generate", "ideal generated state and Bell decomposition");
  add_common(gen, gen_args, false);
  gen->add_flag("--explain", gen_args.explain, "print the preset-phase derivation");

  CLI::App* tomo =
      app.add_subcommand("tomography", "acquire 36 projections and reconstruct the state");
  add_common(tomo, tomo_args, false);

  CLI::App* noon = app.add_subcommand("noon", "two-photon interference fringe and visibility");
  add_common(noon, noon_args, true);

  CLI::App* cal = app.add_subcommand("calibrate", "fit a phase-voltage calibration");
  add_common(cal, cal_args, true);

  CLI::App* car = app.add_subcommand("car-sweep", "coincidence-to-accidental ratio vs pair rate");
  add_common(car, car_args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_args);
    if (tomo->parsed()) return cmd_tomography(tomo_args);
    if (noon->parsed()) return cmd_noon(noon_args);
    if (cal->parsed()) return cmd_calibrate(cal_args);
    if (car->parsed()) return cmd_car_sweep(car_args);
  } catch (const std::exception& e) {
    return report_error_and_exit_code(e);
  }
  return 0;
}
