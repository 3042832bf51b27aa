#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mechent/errors.hpp"
#include "mechent/experiments/config.hpp"
#include "mechent/experiments/scenario.hpp"
#include "mechent/model.hpp"

namespace ex = mechent::experiments;

namespace {

enum Exit { ok = 0, config_error = 2, health_failure = 3, io_error = 4 };

struct Overrides {
  std::string out_dir;
  int workers = 0;
  double horizon_tau = -1.0;
  std::string dims;
  std::string frame;

  void add_to(CLI::App* app) {
    app->add_option("--out-dir", out_dir, "Output directory (overrides output_dir)");
    app->add_option("--workers", workers, "Sweep points integrated concurrently")->check(CLI::PositiveNumber);
    app->add_option("--horizon-tau", horizon_tau, "Integration horizon in units of tau")->check(CLI::NonNegativeNumber);
    app->add_option("--dims", dims, "Fock truncation t,m1,m2");
    app->add_option("--frame", frame, "rotating or lab")->check(CLI::IsMember({"rotating", "lab"}));
  }

  void apply(ex::ScenarioConfig& cfg) const {
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (workers > 0) cfg.workers = workers;
    if (horizon_tau >= 0.0) cfg.horizon_tau = horizon_tau;
    if (!frame.empty()) cfg.frame = mechent::frame_from_string(frame);
    if (!dims.empty()) {
      std::vector<int> d;
      std::stringstream ss(dims);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          d.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw mechent::ConfigError("--dims: '" + dims + "' is not a list of integers");
        }
      }
      if (d.size() != 3) throw mechent::ConfigError("--dims needs three entries t,m1,m2");
      try {
        cfg.layout = mechent::FockLayout(d);
      } catch (const mechent::Error& e) {
        throw mechent::ConfigError(std::string("--dims: ") + e.what());
      }
    }
    cfg.validate();
  }
};

void print_point(const ex::PointSummary& s) {
  std::fprintf(stderr, "point %zu%s: %s, %zu samples, E_N = %.6g bits, delta12 = %.6g nats, %.1f s%s\n", s.index,
               s.sweep_value ? (" (" + std::to_string(*s.sweep_value) + ")").c_str() : "",
               s.healthy ? "ok" : "HEALTH FAILURE", s.samples, s.final_log_negativity, s.final_delta12,
               s.wall_seconds, s.top_level_flag ? " [top-level population flagged]" : "");
  if (!s.healthy) std::fprintf(stderr, "  %s\n", s.error.c_str());
}

int finish(const ex::RunManifest& m, const std::string& out_dir) {
  std::printf("manifest: %s/manifest.json (config hash %s)\n", out_dir.c_str(), m.config_hash.c_str());
  return m.healthy() ? ok : health_failure;
}

int cmd_validate(const std::string& path) {
  const ex::ScenarioConfig cfg = ex::load_config(path);
  std::printf("config %s: valid (hash %s)\n", path.c_str(), ex::hex64(cfg.config_hash).c_str());
  std::printf("scenario %s, dims %d,%d,%d, frame %s, picture %s, horizon %g tau\n", ex::to_string(cfg.scenario),
              cfg.layout.dim(0), cfg.layout.dim(1), cfg.layout.dim(2), mechent::to_string(cfg.frame),
              mechent::to_string(cfg.picture), cfg.horizon_tau);
  const auto points = cfg.points();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    std::printf("point %zu: tau = %.6g s, t_end = %.6g s", k, p.tau(), cfg.horizon_tau * p.tau());
    if (cfg.sweep) std::printf(", %s = %g", cfg.sweep->parameter.c_str(), cfg.sweep->values[k]);
    std::printf("\n");
    try {
      const auto r = mechent::validity_check(p);
      std::printf("  effective-model validity: max g_x/|eps - omega| = %.4g / %.4g, %s\n", r.max_upsilon1,
                  r.max_upsilon2, r.passed ? "within threshold" : "above threshold");
    } catch (const mechent::SingularityError& e) {
      std::printf("  effective-model validity: singular within a drive period (%s)\n", e.what());
    }
  }
  return ok;
}

int cmd_params() {
  std::printf("parameter schema version %d\n", mechent::param_schema_version);
  std::printf("%-14s %-5s %-14s %s\n", "key", "unit", "default", "description");
  for (const auto& f : mechent::param_schema()) {
    std::printf("%-14s %-5s %-14.8g %s\n", f.key.c_str(), f.unit.c_str(), f.default_value, f.description.c_str());
  }
  std::printf("\nother configuration keys:\n");
  for (const auto& [k, d] : ex::config_keys()) {
    bool schema = false;
    for (const auto& f : mechent::param_schema()) schema = schema || f.key == k;
    if (!schema) std::printf("  %-18s %s\n", k.c_str(), d.c_str());
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven transmon + two-resonator entanglement simulator"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, resume_config;
  Overrides run_over, resume_over;

  auto* run = app.add_subcommand("run", "Run a scenario configuration");
  run->add_option("config", config_path, "Configuration file")->required();
  run_over.add_to(run);

  auto* res = app.add_subcommand("resume", "Continue a run from a checkpoint");
  res->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
  res->add_option("--config", resume_config, "Configuration of the interrupted run")->required();
  resume_over.add_to(res);

  auto* val = app.add_subcommand("validate", "Check a configuration without running it");
  std::string validate_path;
  val->add_option("config", validate_path, "Configuration file")->required();

  app.add_subcommand("params", "Print the parameter schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (run->parsed()) {
      ex::ScenarioConfig cfg = ex::load_config(config_path);
      run_over.apply(cfg);
      ex::RunOptions opt;
      opt.on_point = print_point;
      return finish(ex::run_scenario(cfg, opt), cfg.output_dir);
    }
    if (res->parsed()) {
      ex::ScenarioConfig cfg = ex::load_config(resume_config);
      resume_over.apply(cfg);
      ex::RunOptions opt;
      opt.on_point = print_point;
      return finish(ex::resume(checkpoint_path, cfg, opt), cfg.output_dir);
    }
    if (val->parsed()) return cmd_validate(validate_path);
    return cmd_params();
  } catch (const mechent::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const mechent::ParameterError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const mechent::CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return io_error;
  } catch (const mechent::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return io_error;
  } catch (const mechent::HealthError& e) {
    std::fprintf(stderr, "health failure: %s\n", e.what());
    return health_failure;
  } catch (const mechent::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return health_failure;
  }
}
