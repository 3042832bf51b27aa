#include "mechent/experiments/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mechent/checkpoint.hpp"
#include "mechent/errors.hpp"

namespace mechent::experiments {

namespace {

struct Entry {
  std::string value;
  int line;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  std::ostringstream os;
  os << source << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

double parse_number(const std::string& source, const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
    fail(source, e.line, "value of '" + key + "' is not a finite number: '" + v + "'");
  }
  return x;
}

int parse_int(const std::string& source, const std::string& key, const Entry& e) {
  const double x = parse_number(source, key, e);
  if (x != std::floor(x) || std::abs(x) > 1e9) fail(source, e.line, "value of '" + key + "' must be an integer");
  return static_cast<int>(x);
}

std::vector<double> parse_list(const std::string& source, const std::string& key, const Entry& e) {
  std::string v = trim(e.value);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(source, key, {item, e.line}));
  if (out.empty()) fail(source, e.line, "'" + key + "' needs at least one value");
  return out;
}

const ParamField* schema_field(const std::string& key) {
  for (const ParamField& f : param_schema()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

const std::map<std::string, std::string>& general_keys() {
  static const std::map<std::string, std::string> keys = {
      {"scenario", "stability | entanglement_ng | coupling_asymmetry | qubit_decoherence | thermal_noise | custom"},
      {"delta_g_hz", "coupling asymmetry g01 - g02 about the mean coupling (Hz)"},
      {"drive_detuning_hz", "detuning of omegaL1 + omegaL2 from omega1 + omega2 (Hz)"},
      {"horizon_tau", "integration horizon in units of tau = 2 pi / (omega1 + omega2)"},
      {"dims", "Fock truncation transmon,mr1,mr2"},
      {"frame", "rotating | lab"},
      {"picture", "local | interaction | schrodinger"},
      {"initial_state", "vacuum | thermal (mechanical modes at nbar_j, transmon in the ground state)"},
      {"method", "dopri5 | rk4"},
      {"rtol", "relative tolerance"},
      {"atol", "absolute tolerance"},
      {"dt_init_s", "initial step (s)"},
      {"dt_max_s", "largest step (s); rk4 step"},
      {"sample_stride", "samples per tau"},
      {"health_trace", "largest tolerated |tr rho - 1|"},
      {"health_min_eig", "smallest tolerated eigenvalue"},
      {"health_top_level", "top-level population flag threshold"},
      {"sweep_parameter", "swept key: a parameter key or delta_g_hz, drive_detuning_hz, nbar, qubit_decay_hz"},
      {"sweep_values", "comma-separated values in the key's unit"},
      {"output_dir", "directory for series, checkpoints and the manifest"},
      {"checkpoint_every", "samples between checkpoints (0: final state only)"},
      {"workers", "sweep points integrated concurrently"},
  };
  return keys;
}

// Step ceiling when the configuration does not set one.
double default_dt_max(Picture picture) { return picture == Picture::local ? 2e-9 : 5e-11; }

}  // namespace

const char* to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::stability: return "stability";
    case ScenarioId::entanglement_ng: return "entanglement_ng";
    case ScenarioId::coupling_asymmetry: return "coupling_asymmetry";
    case ScenarioId::qubit_decoherence: return "qubit_decoherence";
    case ScenarioId::thermal_noise: return "thermal_noise";
    case ScenarioId::custom: return "custom";
  }
  return "?";
}

ScenarioId scenario_from_string(const std::string& s) {
  for (ScenarioId id : {ScenarioId::stability, ScenarioId::entanglement_ng, ScenarioId::coupling_asymmetry,
                        ScenarioId::qubit_decoherence, ScenarioId::thermal_noise, ScenarioId::custom}) {
    if (s == to_string(id)) return id;
  }
  throw ConfigError("unknown scenario '" + s + "'");
}

const std::vector<std::string>& derived_sweep_keys() {
  static const std::vector<std::string> keys = {"delta_g_hz", "drive_detuning_hz", "nbar", "qubit_decay_hz"};
  return keys;
}

void apply_setting(SystemParams& p, const std::string& key, double value) {
  if (const ParamField* f = schema_field(key)) {
    p.*(f->member) = f->angular ? two_pi * value : value;
  } else if (key == "delta_g_hz") {
    apply_coupling_asymmetry(p, 0.5 * (p.g01 + p.g02), two_pi * value);
  } else if (key == "drive_detuning_hz") {
    apply_drive_detuning(p, two_pi * value);
  } else if (key == "nbar") {
    p.nbar1 = value;
    p.nbar2 = value;
  } else if (key == "qubit_decay_hz") {
    p.gamma_t = two_pi * value;
    p.gamma_phi = 2.0 * p.gamma_t;
  } else {
    throw ConfigError("unknown parameter '" + key + "'");
  }
}

std::vector<SystemParams> ScenarioConfig::points() const {
  if (!sweep) return {params};
  std::vector<SystemParams> out;
  for (double v : sweep->values) {
    SystemParams p = params;
    apply_setting(p, sweep->parameter, v);
    out.push_back(p);
  }
  return out;
}

IntegratorConfig ScenarioConfig::integrator_for(const SystemParams& p) const {
  IntegratorConfig c = integrator;
  c.tau = p.tau();
  c.t_end = horizon_tau * c.tau;
  return c;
}

void ScenarioConfig::validate() const {
  if (!(horizon_tau >= 0.0) || !std::isfinite(horizon_tau)) throw ConfigError("horizon_tau must be finite and >= 0");
  if (layout.slots() != 3) throw ConfigError("dims must list transmon,mr1,mr2");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (picture == Picture::local && frame == Frame::lab) {
    // Allowed, but the transmon propagator then resolves omega_t.
  }
  if (sweep) {
    const auto& derived = derived_sweep_keys();
    if (!schema_field(sweep->parameter) &&
        std::find(derived.begin(), derived.end(), sweep->parameter) == derived.end()) {
      throw ConfigError("sweep parameter '" + sweep->parameter + "' is not in the schema");
    }
    std::set<double> seen;
    for (double v : sweep->values) {
      if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
      if (!seen.insert(v).second) throw ConfigError("sweep values must be distinct");
    }
  }
  try {
    for (const SystemParams& p : points()) {
      p.validate();
      integrator_for(p).validate();
    }
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

ScenarioConfig scenario_defaults(ScenarioId id) {
  ScenarioConfig c;
  c.scenario = id;
  c.integrator.rtol = 1e-8;
  c.integrator.atol = 1e-10;
  c.integrator.dt_init = 1e-11;
  c.integrator.dt_max = default_dt_max(c.picture);
  c.integrator.sample_stride = 4;
  switch (id) {
    case ScenarioId::coupling_asymmetry:
      c.sweep = SweepAxis{"delta_g_hz", {0.0, 6.1e3, 13.9e3}};
      break;
    case ScenarioId::qubit_decoherence:
      c.sweep = SweepAxis{"qubit_decay_hz", {4.5e3, 0.05e3}};
      break;
    case ScenarioId::thermal_noise:
      c.sweep = SweepAxis{"nbar", {0.2, 8.0, 20.0}};
      break;
    default:
      break;
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out(general_keys().begin(), general_keys().end());
  for (const ParamField& f : param_schema()) out.emplace_back(f.key, f.description + " [" + f.unit + "]");
  std::sort(out.begin(), out.end());
  return out;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[' && content.back() == ']') continue;  // section headers are cosmetic
    const auto eq = content.find('=');
    if (eq == std::string::npos) fail(source, line, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = unquote(trim(content.substr(eq + 1)));
    if (key.empty()) fail(source, line, "empty key");
    if (value.empty()) fail(source, line, "empty value for '" + key + "'");

    const bool known = general_keys().count(key) || schema_field(key);
    if (!known) {
      if (schema_field(key + "_hz") || general_keys().count(key + "_hz")) {
        fail(source, line, "frequency key '" + key + "' needs a unit suffix: write '" + key + "_hz' (value in Hz)");
      }
      if (general_keys().count(key + "_s")) {
        fail(source, line, "time key '" + key + "' needs a unit suffix: write '" + key + "_s' (value in seconds)");
      }
      fail(source, line, "unknown key '" + key + "'");
    }
    if (!entries.emplace(key, Entry{value, line}).second) {
      fail(source, line, "duplicate key '" + key + "' (first set on line " + std::to_string(entries[key].line) + ")");
    }
  }

  auto has = [&](const std::string& k) { return entries.count(k) > 0; };
  auto str = [&](const std::string& k) { return trim(entries.at(k).value); };
  auto num = [&](const std::string& k) { return parse_number(source, k, entries.at(k)); };
  auto wrap = [&](const std::string& k, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      fail(source, entries.at(k).line, e.what());
    } catch (const ParameterError& e) {
      fail(source, entries.at(k).line, e.what());
    }
  };

  ScenarioId id = ScenarioId::custom;
  if (has("scenario")) wrap("scenario", [&] { id = scenario_from_string(str("scenario")); });
  ScenarioConfig c = scenario_defaults(id);
  c.source = source;
  c.config_hash = fnv1a(text);

  for (const ParamField& f : param_schema()) {
    if (has(f.key)) apply_setting(c.params, f.key, num(f.key));
  }
  if (has("delta_g_hz")) apply_setting(c.params, "delta_g_hz", num("delta_g_hz"));
  if (has("drive_detuning_hz")) apply_setting(c.params, "drive_detuning_hz", num("drive_detuning_hz"));

  if (has("horizon_tau")) c.horizon_tau = num("horizon_tau");
  if (has("dims")) {
    wrap("dims", [&] {
      std::vector<int> dims;
      for (double d : parse_list(source, "dims", entries.at("dims"))) {
        if (d != std::floor(d) || d < 2 || d > 64) throw ConfigError("dims must be integers in [2, 64]");
        dims.push_back(static_cast<int>(d));
      }
      if (dims.size() != 3) throw ConfigError("dims must have three entries (transmon,mr1,mr2)");
      c.layout = FockLayout(dims);
    });
  }
  if (has("frame")) wrap("frame", [&] { c.frame = frame_from_string(str("frame")); });
  if (has("picture")) wrap("picture", [&] { c.picture = picture_from_string(str("picture")); });
  c.integrator.dt_max = default_dt_max(c.picture);
  if (has("initial_state")) {
    const std::string s = str("initial_state");
    if (s == "vacuum") {
      c.initial_state = InitialState::vacuum;
    } else if (s == "thermal") {
      c.initial_state = InitialState::thermal;
    } else {
      fail(source, entries.at("initial_state").line, "initial_state must be vacuum or thermal");
    }
  }
  if (has("method")) wrap("method", [&] { c.integrator.method = method_from_string(str("method")); });
  if (has("rtol")) c.integrator.rtol = num("rtol");
  if (has("atol")) c.integrator.atol = num("atol");
  if (has("dt_init_s")) c.integrator.dt_init = num("dt_init_s");
  if (has("dt_max_s")) c.integrator.dt_max = num("dt_max_s");
  if (has("sample_stride")) c.integrator.sample_stride = parse_int(source, "sample_stride", entries.at("sample_stride"));
  if (has("health_trace")) c.integrator.health.trace = num("health_trace");
  if (has("health_min_eig")) c.integrator.health.min_eig = num("health_min_eig");
  if (has("health_top_level")) c.integrator.health.top_level = num("health_top_level");

  if (has("sweep_parameter") != has("sweep_values")) {
    const std::string k = has("sweep_parameter") ? "sweep_parameter" : "sweep_values";
    fail(source, entries.at(k).line, "sweep_parameter and sweep_values must be given together");
  }
  if (has("sweep_parameter")) {
    c.sweep = SweepAxis{str("sweep_parameter"), parse_list(source, "sweep_values", entries.at("sweep_values"))};
  }
  if (has("output_dir")) c.output_dir = str("output_dir");
  if (has("checkpoint_every")) c.checkpoint_every = parse_int(source, "checkpoint_every", entries.at("checkpoint_every"));
  if (has("workers")) c.workers = parse_int(source, "workers", entries.at("workers"));

  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace mechent::experiments
