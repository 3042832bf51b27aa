#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mechent/integrator.hpp"
#include "mechent/lindblad.hpp"
#include "mechent/model.hpp"
#include "mechent/operator_algebra.hpp"
#include "mechent/params.hpp"

namespace mechent::experiments {

enum class ScenarioId { stability, entanglement_ng, coupling_asymmetry, qubit_decoherence, thermal_noise, custom };

const char* to_string(ScenarioId id);
ScenarioId scenario_from_string(const std::string& s);

enum class InitialState { vacuum, thermal };

/// One swept quantity. `parameter` is a schema key (e.g. "gamma_t_hz") or one of
/// the derived knobs:
///   delta_g_hz         coupling asymmetry about the mean coupling
///   drive_detuning_hz  shift of omegaL1 + omegaL2 away from omega1 + omega2
///   nbar               both thermal occupations
///   qubit_decay_hz     gamma_t, with gamma_phi = 2 gamma_t
struct SweepAxis {
  std::string parameter;
  std::vector<double> values;  // configuration units
};

/// Names accepted as a sweep parameter besides the schema keys.
const std::vector<std::string>& derived_sweep_keys();

/// Applies `value` (configuration units) of `key` to `p`.
void apply_setting(SystemParams& p, const std::string& key, double value);

struct ScenarioConfig {
  ScenarioId scenario = ScenarioId::custom;
  SystemParams params = SystemParams::reference_defaults();
  IntegratorConfig integrator;
  double horizon_tau = 200.0;
  FockLayout layout{3, 8, 8};
  Frame frame = Frame::rotating;
  Picture picture = Picture::local;
  InitialState initial_state = InitialState::vacuum;
  std::optional<SweepAxis> sweep;
  std::string output_dir = "out";
  int checkpoint_every = 0;  // samples between checkpoints; the final state is always written
  int workers = 1;
  std::uint64_t config_hash = 0;  // FNV-1a of the file bytes
  std::string source;             // path, or "<string>"

  /// Parameter set of each sweep point (one entry without a sweep).
  std::vector<SystemParams> points() const;
  /// Integrator settings with t_end and tau filled in for `p`.
  IntegratorConfig integrator_for(const SystemParams& p) const;
  void validate() const;
};

/// Scenario defaults: horizon, sweep axis and parameter overrides.
ScenarioConfig scenario_defaults(ScenarioId id);

/// Parses "key = value" lines ('#' starts a comment). Unknown keys, malformed
/// values and frequency keys without their unit suffix are ConfigError with the
/// line number. Throws IoError if the file cannot be read.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Every key accepted by the parser, with a short description.
std::vector<std::pair<std::string, std::string>> config_keys();

}  // namespace mechent::experiments
