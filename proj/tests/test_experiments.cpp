#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "mechent/checkpoint.hpp"
#include "mechent/errors.hpp"
#include "mechent/experiments/config.hpp"
#include "mechent/experiments/scenario.hpp"

using namespace mechent;
using namespace mechent::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mechent_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

/// Small, fast run: (3,4,4) over a couple of periods.
ScenarioConfig small_run(const fs::path& out, double horizon = 2.0) {
  std::ostringstream os;
  os << "scenario = entanglement_ng\n"
     << "dims = 3,4,4\n"
     << "horizon_tau = " << horizon << "\n"
     << "output_dir = " << out.string() << "\n";
  return parse_config(os.str());
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.conf");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("minimal config gives the reference defaults") {
  const ScenarioConfig c = parse_config("scenario = entanglement_ng\n");
  const SystemParams d = SystemParams::reference_defaults();
  CHECK(c.params.omega1 == d.omega1);
  CHECK(c.params.g02 == d.g02);
  CHECK(c.params.amp1 == d.amp1);
  CHECK(c.horizon_tau == 200.0);
  CHECK(c.layout == FockLayout{3, 8, 8});
  CHECK(c.points().size() == 1);
}

TEST_CASE("frequencies are given in Hz and stored as angular frequencies") {
  const ScenarioConfig c = parse_config("scenario = custom\nomega1_hz = 10e6\n");
  CHECK(c.params.omega1 == doctest::Approx(2.0 * std::numbers::pi * 10e6));
}

TEST_CASE("config errors carry the line") {
  const std::string unknown = config_error("scenario = custom\n\ngamma_x = 3\n");
  CHECK(unknown.find("test.conf:3") != std::string::npos);
  CHECK(unknown.find("gamma_x") != std::string::npos);
  CHECK(config_error("omega1 = 10e6\n").find("omega1_hz") != std::string::npos);
  CHECK(config_error("dt_max = 1e-9\n").find("dt_max_s") != std::string::npos);
  CHECK(config_error("rtol = 1e-8\nrtol = 1e-9\n").find("duplicate") != std::string::npos);
  CHECK(config_error("rtol = fast\n").find("rtol") != std::string::npos);
  CHECK(config_error("gamma_t_hz = -5\n") != "");
  CHECK(config_error("dims = 3,8\n") != "");
  CHECK(config_error("sweep_parameter = nbar\n") != "");
  CHECK(config_error("scenario = nonsense\n") != "");
  CHECK(config_error("# only a comment\n[section]\nrtol = 1e-7   # trailing\n") == "");
  CHECK_THROWS_AS(load_config("/nonexistent/file.conf"), IoError);
}

TEST_CASE("scenario sweeps") {
  const ScenarioConfig asym = parse_config("scenario = coupling_asymmetry\n");
  const auto pts = asym.points();
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].g01 - pts[0].g02 == doctest::Approx(0.0));
  CHECK(pts[1].g01 - pts[1].g02 == doctest::Approx(two_pi * 6.1e3));
  CHECK(pts[2].g01 - pts[2].g02 == doctest::Approx(two_pi * 13.9e3));
  CHECK(0.5 * (pts[2].g01 + pts[2].g02) == doctest::Approx(SystemParams::reference_defaults().g01));

  const auto th = parse_config("scenario = thermal_noise\n").points();
  REQUIRE(th.size() == 3);
  CHECK(th[1].nbar1 == 8.0);
  CHECK(th[2].nbar2 == 20.0);

  const auto qd = parse_config("scenario = qubit_decoherence\n").points();
  REQUIRE(qd.size() == 2);
  for (const auto& p : qd) CHECK(p.gamma_phi == doctest::Approx(2.0 * p.gamma_t));

  const ScenarioConfig custom = parse_config("sweep_parameter = omega2_hz\nsweep_values = 9.9e6, 10e6\n");
  REQUIRE(custom.points().size() == 2);
  CHECK(custom.points()[1].omega2 == doctest::Approx(two_pi * 10e6));
}

TEST_CASE("checkpoint round trip is bit exact") {
  const fs::path dir = scratch_dir("ckpt");
  std::srand(3);
  Checkpoint ck{{3, 2, 2}, 1.25e-7, 0x0123456789abcdefULL, Operator::Random(12, 12)};
  const std::string path = (dir / "a.ckpt").string();
  write_checkpoint(path, ck);
  const Checkpoint back = read_checkpoint(path);
  CHECK(back.dims == ck.dims);
  CHECK(back.t == ck.t);
  CHECK(back.params_hash == ck.params_hash);
  CHECK((back.rho.array() == ck.rho.array()).all());
  CHECK(fs::file_size(path) == 8 + 4 + 4 + 12 + 8 + 8 + 144 * 16 + 8);

  // Flip a byte in the payload.
  std::string bytes = slurp(path);
  bytes[100] ^= 0x01;
  std::ofstream(dir / "b.ckpt", std::ios::binary) << bytes;
  CHECK_THROWS_AS(read_checkpoint((dir / "b.ckpt").string()), CheckpointError);
  std::ofstream(dir / "c.ckpt", std::ios::binary) << slurp(path).substr(0, 200);
  CHECK_THROWS_AS(read_checkpoint((dir / "c.ckpt").string()), CheckpointError);
  std::ofstream(dir / "d.ckpt", std::ios::binary) << "not a checkpoint";
  CHECK_THROWS_AS(read_checkpoint((dir / "d.ckpt").string()), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint((dir / "missing.ckpt").string()), IoError);
}

TEST_CASE("parameter hash") {
  SystemParams p = SystemParams::reference_defaults();
  const auto h = params_hash(p, Frame::rotating);
  CHECK(h == params_hash(SystemParams::reference_defaults(), Frame::rotating));
  CHECK(h != params_hash(p, Frame::lab));
  p.nbar1 = std::nextafter(p.nbar1, 1.0);
  CHECK(h != params_hash(p, Frame::rotating));
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("series output") {
  const fs::path dir = scratch_dir("series");
  Trajectory empty;
  empty.tau = 1.0;
  CHECK_THROWS_AS(emit_series(empty, (dir / "e.csv").string()), Error);
  CHECK_FALSE(fs::exists(dir / "e.csv"));

  Trajectory one;
  one.tau = 5e-8;
  one.observable_names = {"n_transmon", "n_mr1", "n_mr2"};
  SampleRecord r;
  r.t = 1.0 / 3.0 * 1e-7;
  r.expectations = {0.1, 1.0 / 7.0, std::sqrt(2.0)};
  r.measures = MeasureRecord{0.123456789012345678, 2e-17, 1.5, 1.0, 0.0, 0.0};
  r.health.trace_err = 3e-15;
  one.samples.push_back(r);
  const std::string path = (dir / "one.csv").string();
  emit_series(one, path);
  const SeriesTable t = read_series(path);
  CHECK(t.columns == series_columns());
  REQUIRE(t.rows.size() == 1);
  CHECK(t.column("t_seconds")[0] == r.t);
  CHECK(t.column("n_mr1")[0] == r.expectations[1]);
  CHECK(t.column("n_mr2")[0] == r.expectations[2]);
  CHECK(t.column("EN_bits")[0] == r.measures->log_negativity);
  CHECK(t.column("trace_err")[0] == 3e-15);
  // Rewriting the parsed values reproduces the same bytes.
  std::string text = slurp(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("run, determinism and sweep order") {
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  RunManifest ma = run_scenario(small_run(a, 1.0));
  RunManifest mb = run_scenario(small_run(b, 1.0));
  CHECK(ma.healthy());
  CHECK(slurp(a / "entanglement_ng_0.csv") == slurp(b / "entanglement_ng_0.csv"));
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(slurp(a / "manifest.json").find("\"config_hash\"") != std::string::npos);

  // Sweep points do not depend on scheduling.
  const fs::path s1 = scratch_dir("sweep1"), s2 = scratch_dir("sweep2");
  auto sweep = [](const fs::path& out, int workers) {
    std::ostringstream os;
    os << "scenario = thermal_noise\ndims = 3,4,4\nhorizon_tau = 0.5\nworkers = " << workers
       << "\noutput_dir = " << out.string() << "\n";
    return parse_config(os.str());
  };
  run_scenario(sweep(s1, 1));
  run_scenario(sweep(s2, 3));
  for (int k = 0; k < 3; ++k) {
    const std::string f = "thermal_noise_" + std::to_string(k) + ".csv";
    CHECK(slurp(s1 / f) == slurp(s2 / f));
  }
}

TEST_CASE("resume") {
  const fs::path full = scratch_dir("resume_full"), split = scratch_dir("resume_split");
  const ScenarioConfig cfg_full = small_run(full, 2.0);
  run_scenario(cfg_full);

  // Immediate resume at t_end does nothing.
  const std::string before = slurp(full / "entanglement_ng_0.csv");
  const RunManifest noop = resume((full / "entanglement_ng_0.ckpt").string(), cfg_full);
  CHECK(noop.resumed);
  CHECK(slurp(full / "entanglement_ng_0.csv") == before);

  // Stop halfway, then continue to the end.
  run_scenario(small_run(split, 1.0));
  const ScenarioConfig cfg_split = small_run(split, 2.0);
  const RunManifest m = resume((split / "entanglement_ng_0.ckpt").string(), cfg_split);
  CHECK(m.healthy());
  const SeriesTable x = read_series((full / "entanglement_ng_0.csv").string());
  const SeriesTable y = read_series((split / "entanglement_ng_0.csv").string());
  REQUIRE(x.rows.size() == y.rows.size());
  const double tol = 10.0 * cfg_full.integrator.rtol;
  for (const char* col : {"n_transmon", "n_mr1", "n_mr2", "EN_bits"}) {
    const auto u = x.column(col), v = y.column(col);
    for (std::size_t k = 0; k < u.size(); ++k) {
      CHECK(std::abs(u[k] - v[k]) <= tol * std::max(1.0, std::abs(u[k])));
    }
  }

  // A checkpoint from other parameters is refused, naming both hashes.
  ScenarioConfig other = cfg_split;
  other.params.g01 *= 1.01;
  try {
    resume((split / "entanglement_ng_0.ckpt").string(), other);
    FAIL("expected a CheckpointError");
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    const Checkpoint ck = read_checkpoint((split / "entanglement_ng_0.ckpt").string());
    CHECK(msg.find(hex64(ck.params_hash)) != std::string::npos);
    CHECK(msg.find(hex64(params_hash(other.params, other.frame))) != std::string::npos);
  }
}

}
