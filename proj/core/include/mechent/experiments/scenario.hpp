#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mechent/experiments/config.hpp"
#include "mechent/integrator.hpp"

namespace mechent::experiments {

/// Column order of every emitted series file.
const std::vector<std::string>& series_columns();

/// Writes one CSV row per sample with 17 significant digits. Throws Error for an
/// empty trajectory (no file is created) and IoError on write failure.
void emit_series(const Trajectory& traj, const std::string& path);

struct SeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
};

SeriesTable read_series(const std::string& path);

struct PointSummary {
  std::size_t index = 0;
  std::optional<double> sweep_value;
  SystemParams params;
  std::uint64_t params_hash = 0;
  std::string series_file;
  std::string checkpoint_file;
  bool healthy = true;
  std::string error;
  double t_final = 0.0;  // seconds, last sample
  std::size_t samples = 0;
  double max_trace_err = 0.0;
  double min_eig = 0.0;
  double max_top_level = 0.0;
  bool top_level_flag = false;
  double final_log_negativity = 0.0;
  double final_delta12 = 0.0;
  std::optional<StabilityReport> stability;
  double wall_seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;  // hex FNV-1a of the config file bytes
  std::string config_source;
  std::string scenario;
  std::string software_version;
  std::string started;  // ISO-8601 UTC
  std::string finished;
  double horizon_tau = 0.0;
  std::vector<int> dims;
  std::string frame;
  std::string picture;
  std::vector<PointSummary> points;
  std::vector<std::string> files;
  bool resumed = false;

  bool healthy() const;
  std::string to_json() const;
};

struct RunOptions {
  /// Overrides the configured worker count when > 0.
  int workers = 0;
  /// Called once per finished sweep point (from worker threads, serialized).
  std::function<void(const PointSummary&)> on_point;
  bool write_files = true;
  /// Keep the trajectories in memory (returned through `trajectories`).
  std::vector<Trajectory>* trajectories = nullptr;
};

/// Integrates every sweep point and writes `<output_dir>/<scenario>_<k>.csv`,
/// `<scenario>_<k>.ckpt` and `manifest.json`. Integration-health failures keep the
/// partial series and are reported in the manifest rather than thrown.
RunManifest run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

/// Continues the sweep point whose parameter hash matches the checkpoint from the
/// stored (t, rho) to the configured horizon, appending to its series file.
/// Throws CheckpointError (with both hashes) when no point matches.
RunManifest resume(const std::string& checkpoint_path, const ScenarioConfig& cfg, const RunOptions& opt = {});

/// Initial state of a run.
DensityMatrix initial_state(const ScenarioConfig& cfg, const SystemParams& p);

std::string hex64(std::uint64_t v);

}  // namespace mechent::experiments
