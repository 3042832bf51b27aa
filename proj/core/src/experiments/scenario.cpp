#include "mechent/experiments/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mechent/checkpoint.hpp"
#include "mechent/errors.hpp"
#include "mechent/local_picture.hpp"

#ifndef MECHENT_VERSION
#define MECHENT_VERSION "unknown"
#endif

namespace mechent::experiments {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> sample_row(const SampleRecord& s, double tau, const Trajectory& traj) {
  const double nan = std::nan("");
  auto expect = [&](const char* name) {
    const auto& names = traj.observable_names;
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == name) return s.expectations[k];
    }
    return nan;
  };
  const bool m = s.measures.has_value();
  return {s.t / tau,
          s.t,
          m ? s.measures->log_negativity : nan,
          m ? s.measures->delta12 : nan,
          m ? s.measures->nu_plus : nan,
          m ? s.measures->nu_minus : nan,
          expect("n_transmon"),
          expect("n_mr1"),
          expect("n_mr2"),
          s.health.trace_err,
          s.health.min_eig,
          s.health.top_level_pop};
}

void write_rows(const std::string& path, const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  const auto& cols = series_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format17(row[k]);
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  const std::string s = out.str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw IoError("write failed for " + path);
}

std::string stem_for(const ScenarioConfig& cfg, std::size_t k) {
  return std::string(to_string(cfg.scenario)) + "_" + std::to_string(k);
}

void summarize(PointSummary& s, const Trajectory& traj) {
  s.samples = traj.samples.size();
  if (traj.samples.empty()) return;
  s.min_eig = traj.samples.front().health.min_eig;
  for (const SampleRecord& r : traj.samples) {
    s.max_trace_err = std::max(s.max_trace_err, r.health.trace_err);
    s.min_eig = std::min(s.min_eig, r.health.min_eig);
    s.max_top_level = std::max(s.max_top_level, r.health.top_level_pop);
    s.top_level_flag = s.top_level_flag || r.health.top_level_flag;
  }
  const SampleRecord& last = traj.samples.back();
  s.t_final = last.t;
  if (last.measures) {
    s.final_log_negativity = last.measures->log_negativity;
    s.final_delta12 = last.measures->delta12;
  }
  const std::size_t window = std::max<std::size_t>(1, traj.samples.size() / 5);
  if (traj.samples.size() >= 2 * window && traj.observable_names.size() == 3) {
    s.stability = stability_monitor(traj, window, 0.05);
  }
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

RunManifest manifest_header(const ScenarioConfig& cfg) {
  RunManifest m;
  m.config_hash = hex64(cfg.config_hash);
  m.config_source = cfg.source;
  m.scenario = to_string(cfg.scenario);
  m.software_version = MECHENT_VERSION;
  m.started = utc_now();
  m.horizon_tau = cfg.horizon_tau;
  m.dims = cfg.layout.dims();
  m.frame = to_string(cfg.frame);
  m.picture = to_string(cfg.picture);
  return m;
}

void write_manifest(const ScenarioConfig& cfg, RunManifest& m) {
  m.files.push_back("manifest.json");
  const std::string path = (fs::path(cfg.output_dir) / "manifest.json").string();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << m.to_json() << '\n';
  if (!f) throw IoError("write failed for " + path);
}

// Integrates one point from (t0, rho0); fills the summary and returns the trajectory (possibly partial).
Trajectory run_point(const ScenarioConfig& cfg, const SystemParams& p, const DensityMatrix& rho0, double t0,
                     PointSummary& s, bool write_files) {
  const auto start = std::chrono::steady_clock::now();
  const std::string ckpt_path = (fs::path(cfg.output_dir) / s.checkpoint_file).string();
  Observers obs = default_observers(cfg.layout);
  obs.checkpoint_every = cfg.checkpoint_every;
  if (write_files) {
    obs.on_checkpoint = [&](double t, const Operator& rho) {
      write_checkpoint(ckpt_path, Checkpoint{cfg.layout.dims(), t, s.params_hash, rho});
    };
  }
  Trajectory traj;
  try {
    const auto gen = make_generator(p, cfg.layout, cfg.frame, cfg.picture);
    traj = integrate(rho0, cfg.integrator_for(p), *gen, cfg.layout, obs, t0);
  } catch (const IntegrationError& e) {
    traj = e.partial();
    s.healthy = false;
    s.error = e.what();
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    s.healthy = false;
    s.error = e.what();
  }
  summarize(s, traj);
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return traj;
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols = {"t_over_tau", "t_seconds", "EN_bits",    "delta12_nats",
                                                "nu_plus",    "nu_minus",  "n_transmon", "n_mr1",
                                                "n_mr2",      "trace_err", "min_eig",    "top_level_pop"};
  return cols;
}

void emit_series(const Trajectory& traj, const std::string& path) {
  if (traj.samples.empty()) throw Error("emit_series: trajectory has no samples");
  if (!(traj.tau > 0.0)) throw Error("emit_series: trajectory has no tau");
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.samples.size());
  for (const SampleRecord& s : traj.samples) rows.push_back(sample_row(s, traj.tau, traj));
  write_rows(path, rows);
}

std::vector<double> SeriesTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("series has no column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

SeriesTable read_series(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  SeriesTable t;
  std::string line;
  if (!std::getline(f, line)) throw IoError(path + ": empty series file");
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) t.columns.push_back(c);
  }
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end != c.c_str() + c.size()) throw IoError(path + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) throw IoError(path + ":" + std::to_string(lineno) + ": wrong column count");
    t.rows.push_back(std::move(row));
  }
  return t;
}

bool RunManifest::healthy() const {
  return std::all_of(points.begin(), points.end(), [](const PointSummary& p) { return p.healthy; });
}

std::string RunManifest::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["config_hash"] = config_hash;
  j["config_source"] = config_source;
  j["scenario"] = scenario;
  j["software_version"] = software_version;
  j["started"] = started;
  j["finished"] = finished;
  j["resumed"] = resumed;
  j["horizon_tau"] = horizon_tau;
  j["dims"] = dims;
  j["frame"] = frame;
  j["picture"] = picture;
  j["healthy"] = healthy();
  ordered_json pts = ordered_json::array();
  for (const PointSummary& p : points) {
    ordered_json o;
    o["index"] = p.index;
    o["sweep_value"] = p.sweep_value ? ordered_json(*p.sweep_value) : ordered_json(nullptr);
    ordered_json params;
    for (const ParamField& f : param_schema()) {
      params[f.key] = f.angular ? p.params.*(f.member) / two_pi : p.params.*(f.member);
    }
    o["parameters"] = params;
    o["params_hash"] = hex64(p.params_hash);
    o["series_file"] = p.series_file;
    o["checkpoint_file"] = p.checkpoint_file;
    o["healthy"] = p.healthy;
    o["error"] = p.error;
    o["samples"] = p.samples;
    o["t_final_s"] = p.t_final;
    o["max_trace_err"] = p.max_trace_err;
    o["min_eig"] = p.min_eig;
    o["max_top_level_pop"] = p.max_top_level;
    o["top_level_flag"] = p.top_level_flag;
    o["final_EN_bits"] = p.final_log_negativity;
    o["final_delta12_nats"] = p.final_delta12;
    if (p.stability) {
      o["stability"] = {{"stationary", p.stability->stationary},
                        {"diverged", p.stability->diverged},
                        {"max_drift", p.stability->max_drift},
                        {"worst_observable", p.stability->worst_observable}};
    }
    o["wall_seconds"] = p.wall_seconds;
    pts.push_back(o);
  }
  j["points"] = pts;
  j["files"] = files;
  return j.dump(2);
}

DensityMatrix initial_state(const ScenarioConfig& cfg, const SystemParams& p) {
  const FockLayout& l = cfg.layout;
  const DensityMatrix ground = DensityMatrix::fock(l.dim(slot::transmon), 0);
  if (cfg.initial_state == InitialState::vacuum) {
    return DensityMatrix::product(ground, DensityMatrix::product(DensityMatrix::fock(l.dim(slot::mr1), 0),
                                                                 DensityMatrix::fock(l.dim(slot::mr2), 0)));
  }
  return DensityMatrix::product(ground, DensityMatrix::product(DensityMatrix::thermal(l.dim(slot::mr1), p.nbar1),
                                                               DensityMatrix::thermal(l.dim(slot::mr2), p.nbar2)));
}

RunManifest run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  if (opt.write_files) prepare_dir(cfg.output_dir);
  RunManifest manifest = manifest_header(cfg);
  const std::vector<SystemParams> points = cfg.points();
  manifest.points.resize(points.size());
  if (opt.trajectories) opt.trajectories->assign(points.size(), Trajectory{});

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr io_failure;
  auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      PointSummary s;
      s.index = k;
      if (cfg.sweep) s.sweep_value = cfg.sweep->values[k];
      s.params = points[k];
      s.params_hash = params_hash(points[k], cfg.frame);
      s.series_file = stem_for(cfg, k) + ".csv";
      s.checkpoint_file = stem_for(cfg, k) + ".ckpt";
      try {
        Trajectory traj = run_point(cfg, points[k], initial_state(cfg, points[k]), 0.0, s, opt.write_files);
        if (opt.write_files && !traj.samples.empty()) {
          emit_series(traj, (fs::path(cfg.output_dir) / s.series_file).string());
        }
        std::lock_guard<std::mutex> lock(mu);
        if (opt.trajectories) (*opt.trajectories)[k] = std::move(traj);
        manifest.points[k] = s;
        if (opt.on_point) opt.on_point(s);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!io_failure) io_failure = std::current_exception();
      }
    }
  };
  const int nworkers =
      std::max(1, std::min<int>(opt.workers > 0 ? opt.workers : cfg.workers, static_cast<int>(points.size())));
  if (nworkers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (io_failure) std::rethrow_exception(io_failure);

  for (const PointSummary& s : manifest.points) {
    if (s.samples > 0) manifest.files.push_back(s.series_file);
    manifest.files.push_back(s.checkpoint_file);
  }
  manifest.finished = utc_now();
  if (opt.write_files) write_manifest(cfg, manifest);
  return manifest;
}

RunManifest resume(const std::string& checkpoint_path, const ScenarioConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  const Checkpoint ck = read_checkpoint(checkpoint_path);
  const std::vector<SystemParams> points = cfg.points();
  std::optional<std::size_t> match;
  std::ostringstream hashes;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const std::uint64_t h = params_hash(points[k], cfg.frame);
    hashes << (k ? ", " : "") << hex64(h);
    if (h == ck.params_hash && !match) match = k;
  }
  if (!match) {
    throw CheckpointError("resume: checkpoint parameter hash " + hex64(ck.params_hash) +
                          " does not match the configuration (" + hashes.str() + ")");
  }
  if (ck.dims != cfg.layout.dims()) throw CheckpointError("resume: checkpoint dims differ from the configured dims");

  const std::size_t k = *match;
  const SystemParams& p = points[k];
  RunManifest manifest = manifest_header(cfg);
  manifest.resumed = true;
  PointSummary s;
  s.index = k;
  if (cfg.sweep) s.sweep_value = cfg.sweep->values[k];
  s.params = p;
  s.params_hash = ck.params_hash;
  s.series_file = stem_for(cfg, k) + ".csv";
  s.checkpoint_file = stem_for(cfg, k) + ".ckpt";
  s.t_final = ck.t;

  const double t_end = cfg.integrator_for(p).t_end;
  if (ck.t >= t_end * (1.0 - 1e-12)) {
    manifest.points.push_back(s);
    manifest.finished = utc_now();
    return manifest;  // nothing left to integrate
  }

  if (opt.write_files) prepare_dir(cfg.output_dir);
  const Trajectory traj = run_point(cfg, p, DensityMatrix::trusted(ck.rho), ck.t, s, opt.write_files);
  if (opt.trajectories) opt.trajectories->assign(1, traj);

  if (opt.write_files && !traj.samples.empty()) {
    const std::string series_path = (fs::path(cfg.output_dir) / s.series_file).string();
    std::vector<std::vector<double>> rows;
    if (fs::exists(series_path)) {
      for (auto& r : read_series(series_path).rows) {
        if (r[1] < ck.t * (1.0 - 1e-12)) rows.push_back(std::move(r));
      }
    }
    for (const SampleRecord& rec : traj.samples) rows.push_back(sample_row(rec, traj.tau, traj));
    write_rows(series_path, rows);
    manifest.files.push_back(s.series_file);
  }
  manifest.files.push_back(s.checkpoint_file);
  manifest.points.push_back(s);
  if (opt.on_point) opt.on_point(s);
  manifest.finished = utc_now();
  if (opt.write_files) write_manifest(cfg, manifest);
  return manifest;
}

}  // namespace mechent::experiments
