#include "bellgen/config.hpp"

#include <cmath>
#include <sstream>

#include "bellgen/errors.hpp"
#include "bellgen/report.hpp"

namespace bellgen {

namespace {

using nlohmann::json;

// Typed field access that reports the JSON path of any offending value.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw config_error(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Reader child(const std::string& key) const { return Reader(j_.at(key), path_ + "/" + key); }

  double number(const std::string& key, double fallback) const {
    if (!j_.contains(key)) return fallback;
    return require_number(j_.at(key), path_ + "/" + key);
  }

  double required_number(const std::string& key) const {
    if (!j_.contains(key)) throw config_error(path_ + "/" + key, "missing required field");
    return require_number(j_.at(key), path_ + "/" + key);
  }

  int integer(const std::string& key, int fallback) const {
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer())
      throw config_error(path_ + "/" + key, "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw config_error(path_ + "/" + key, "expected a boolean");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw config_error(path_ + "/" + key, "expected a string");
    return v.get<std::string>();
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  static double require_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw config_error(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw config_error(path, "expected a finite number");
    return d;
  }

  const json& j_;
  std::string path_;
};

GridSpec parse_grid(const Reader& r, const GridSpec& fallback) {
  GridSpec g = fallback;
  g.start = r.number("start", g.start);
  g.stop = r.number("stop", g.stop);
  g.points = r.integer("points", g.points);
  if (g.points < 1) throw config_error(r.path() + "/points", "grid needs at least one point");
  return g;
}

}  // namespace

std::vector<double> GridSpec::linspace() const {
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = start;
    return out;
  }
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] = start + (stop - start) * i / (points - 1);
  }
  return out;
}

std::vector<double> GridSpec::logspace() const {
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = start;
    return out;
  }
  const double ls = std::log(start);
  const double le = std::log(stop);
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] = std::exp(ls + (le - ls) * i / (points - 1));
  }
  return out;
}

PhaseConfig ExperimentConfig::preparation_phases() const {
  if (phases) return *phases;
  if (!target) {
    throw config_error("/target", "either a target label or explicit phases are required");
  }
  return preset_phases(*target, source);
}

TwoQubitKet ExperimentConfig::declared_target() const {
  if (target) return target_ket(*target);
  return generate_state(preparation_phases(), source);
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  Reader root(j, "");
  ExperimentConfig cfg;

  if (root.has("target")) {
    const std::string name = root.text("target", "");
    const auto t = parse_target(name);
    if (!t) throw config_error("/target", "unknown target state '" + name + "'");
    cfg.target = *t;
  }
  if (root.has("phases")) {
    const Reader p = root.child("phases");
    PhaseConfig ph;
    ph.phi1 = p.number("phi1", 0.0);
    ph.theta1 = p.number("theta1", 0.0);
    ph.theta2 = p.number("theta2", 0.0);
    ph.phi2 = p.number("phi2", 0.0);
    ph.phi3 = p.number("phi3", 0.0);
    ph.theta3 = p.number("theta3", 0.0);
    ph.phi4 = p.number("phi4", 0.0);
    ph.theta4 = p.number("theta4", 0.0);
    cfg.phases = ph;
  }
  if (!cfg.target && !cfg.phases) {
    throw config_error("/target", "either a target label or explicit phases are required");
  }

  if (root.has("source")) {
    const Reader s = root.child("source");
    cfg.source.eta_a = s.number("eta_a", cfg.source.eta_a);
    cfg.source.eta_b = s.number("eta_b", cfg.source.eta_b);
    cfg.source.pump_power = s.number("pump_power", cfg.source.pump_power);
    if (cfg.source.eta_a < 0.0) throw config_error(s.path() + "/eta_a", "must be >= 0");
    if (cfg.source.eta_b < 0.0) throw config_error(s.path() + "/eta_b", "must be >= 0");
    if (cfg.source.pump_power < 0.0) throw config_error(s.path() + "/pump_power", "must be >= 0");
  }

  if (root.has("detectors")) {
    const Reader d = root.child("detectors");
    if (d.has("eta")) {
      const json& eta = d.raw().at("eta");
      if (!eta.is_array() || eta.size() != 4) {
        throw config_error(d.path() + "/eta", "expected an array of 4 efficiencies");
      }
      for (int i = 0; i < 4; ++i) {
        if (!eta[static_cast<std::size_t>(i)].is_number()) {
          throw config_error(d.path() + "/eta/" + std::to_string(i), "expected a number");
        }
        const double v = eta[static_cast<std::size_t>(i)].get<double>();
        if (!(v > 0.0) || !(v <= 1.0)) {
          throw config_error(d.path() + "/eta/" + std::to_string(i), "must lie in (0, 1]");
        }
        cfg.detectors.eta[static_cast<std::size_t>(i)] = v;
      }
    }
    cfg.detectors.window_s = d.number("window_s", cfg.detectors.window_s);
    cfg.detectors.dark_hz = d.number("dark_hz", cfg.detectors.dark_hz);
    if (cfg.detectors.window_s < 0.0) throw config_error(d.path() + "/window_s", "must be >= 0");
    if (cfg.detectors.dark_hz < 0.0) throw config_error(d.path() + "/dark_hz", "must be >= 0");
  }

  if (root.has("noise")) {
    const Reader n = root.child("noise");
    cfg.noise.visibility = n.number("visibility", cfg.noise.visibility);
    cfg.noise.phase_jitter = n.number("phase_jitter", cfg.noise.phase_jitter);
    if (cfg.noise.visibility < 0.0 || cfg.noise.visibility > 1.0) {
      throw config_error(n.path() + "/visibility", "must lie in [0, 1]");
    }
    if (cfg.noise.phase_jitter < 0.0) {
      throw config_error(n.path() + "/phase_jitter", "must be >= 0");
    }
  }

  cfg.pair_rate_hz = root.number("pair_rate_hz", cfg.pair_rate_hz);
  if (cfg.pair_rate_hz < 0.0) throw config_error("/pair_rate_hz", "must be >= 0");
  cfg.integration_s = root.number("integration_s", cfg.integration_s);
  if (!(cfg.integration_s > 0.0)) throw config_error("/integration_s", "must be > 0");

  if (!root.has("seed")) {
    throw config_error("/seed", "seed is mandatory; wall-clock seeding is not supported");
  }
  {
    const json& s = j.at("seed");
    const bool ok = s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0);
    if (!ok) throw config_error("/seed", "expected a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }

  cfg.subtract_accidentals = root.boolean("subtract_accidentals", cfg.subtract_accidentals);

  if (root.has("tomography")) {
    const Reader t = root.child("tomography");
    cfg.tomography.n_starts = t.integer("n_starts", cfg.tomography.n_starts);
    cfg.tomography.max_iters = t.integer("max_iters", cfg.tomography.max_iters);
    cfg.tomography.mc_samples = t.integer("mc_samples", cfg.tomography.mc_samples);
    cfg.tomography.mc_starts = t.integer("mc_starts", cfg.tomography.mc_starts);
    cfg.tomography.records_file = t.text("records_file", "");
    if (cfg.tomography.n_starts < 1) throw config_error(t.path() + "/n_starts", "must be >= 1");
    if (cfg.tomography.max_iters < 1) throw config_error(t.path() + "/max_iters", "must be >= 1");
    if (cfg.tomography.mc_samples < 50) {
      throw config_error(t.path() + "/mc_samples", "Monte Carlo needs at least 50 samples");
    }
  }

  if (root.has("noon")) {
    const Reader n = root.child("noon");
    if (n.has("grid")) cfg.noon.grid = parse_grid(n.child("grid"), cfg.noon.grid);
    cfg.noon.delta = n.number("delta", cfg.noon.delta);
  }

  if (root.has("calibration")) {
    const Reader c = root.child("calibration");
    if (c.has("shifter")) {
      const std::string name = c.text("shifter", "");
      const auto s = parse_shifter(name);
      if (!s) throw config_error(c.path() + "/shifter", "unknown shifter '" + name + "'");
      cfg.calibration.shifter = *s;
    }
    if (c.has("voltages")) {
      cfg.calibration.voltages = parse_grid(c.child("voltages"), cfg.calibration.voltages);
    }
    if (c.has("calib")) {
      const Reader k = c.child("calib");
      cfg.calibration.calib.xi0 = k.number("xi0", cfg.calibration.calib.xi0);
      cfg.calibration.calib.alpha = k.number("alpha", cfg.calibration.calib.alpha);
      cfg.calibration.calib.beta = k.number("beta", cfg.calibration.calib.beta);
      if (!(cfg.calibration.calib.alpha > 0.0)) {
        throw config_error(k.path() + "/alpha", "must be > 0");
      }
      if (cfg.calibration.calib.beta < 0.0) throw config_error(k.path() + "/beta", "must be >= 0");
    }
    cfg.calibration.scan_file = c.text("scan_file", "");
    if (c.has("lookup_phases")) {
      const json& lp = c.raw().at("lookup_phases");
      if (!lp.is_array()) throw config_error(c.path() + "/lookup_phases", "expected an array");
      for (std::size_t i = 0; i < lp.size(); ++i) {
        if (!lp[i].is_number()) {
          throw config_error(c.path() + "/lookup_phases/" + std::to_string(i),
                             "expected a number");
        }
        cfg.calibration.lookup_phases.push_back(lp[i].get<double>());
      }
    }
  }

  if (root.has("car")) {
    const Reader c = root.child("car");
    if (c.has("pgr")) cfg.car.pgr = parse_grid(c.child("pgr"), cfg.car.pgr);
    if (!(cfg.car.pgr.start > 0.0) || !(cfg.car.pgr.stop > 0.0)) {
      throw config_error(c.path() + "/pgr", "pair rates must be > 0");
    }
  }

  cfg.out_dir = root.text("out_dir", cfg.out_dir);
  if (root.has("metadata")) cfg.metadata = j.at("metadata");

  cfg.config_hash = fnv1a64_hex(j.dump());
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("/", std::string("invalid JSON: ") + e.what());
  } catch (const validation_error& e) {
    throw config_error("/", e.what());
  }
  return parse_config(j);
}

std::vector<VoltageRatePoint> parse_scan_csv(const std::string& text) {
  std::vector<VoltageRatePoint> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    }
    std::istringstream ls(line);
    double v = 0.0, r = 0.0;
    if (ls >> v >> r) {
      out.push_back({v, r});
    }
    // Non-numeric rows (e.g. a header) are skipped.
  }
  if (out.empty()) throw validation_error("scan file contains no (voltage, rate) rows");
  return out;
}

nlohmann::json records_to_json(const std::vector<CoincidenceRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json r;
    r["setting"] = rec.setting_id;
    r["counts"] = {jnum(rec.counts[0]), jnum(rec.counts[1]), jnum(rec.counts[2]),
                   jnum(rec.counts[3])};
    r["integration_s"] = jnum(rec.integration_s);
    r["seed"] = rec.seed;
    r["accidentals_subtracted"] = rec.accidentals_subtracted;
    arr.push_back(r);
  }
  return arr;
}

std::vector<CoincidenceRecord> records_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw validation_error("records JSON must be an array");
  std::vector<CoincidenceRecord> out;
  for (const auto& r : j) {
    CoincidenceRecord rec;
    if (!r.contains("setting") || !r["setting"].is_string()) {
      throw validation_error("record is missing its setting label");
    }
    rec.setting_id = r["setting"].get<std::string>();
    if (!r.contains("counts") || !r["counts"].is_array() || r["counts"].size() != 4) {
      throw validation_error("record needs a counts array of length 4");
    }
    for (int i = 0; i < 4; ++i) rec.counts[static_cast<std::size_t>(i)] =
        r["counts"][static_cast<std::size_t>(i)].get<double>();
    rec.integration_s = r.value("integration_s", 1.0);
    rec.seed = r.value("seed", std::uint64_t{0});
    rec.accidentals_subtracted = r.value("accidentals_subtracted", false);
    out.push_back(rec);
  }
  return out;
}

}  // namespace bellgen
