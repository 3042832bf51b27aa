// Acceptance suite: one PASS/FAIL verdict line per criterion on stdout, progress on
// stderr. Exit status is 0 when every criterion produced a verdict (1 with --strict
// and any FAIL); an exception that prevents a verdict is reported as FAIL and exits 2.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mechent/errors.hpp"
#include "mechent/experiments/config.hpp"
#include "mechent/experiments/scenario.hpp"
#include "mechent/integrator.hpp"
#include "mechent/lindblad.hpp"
#include "mechent/local_picture.hpp"
#include "mechent/measures.hpp"
#include "mechent/model.hpp"

using namespace mechent;
namespace ex = mechent::experiments;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, bool pass, const std::string& detail) {
  verdicts.push_back({id, pass, detail});
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

void progress(const std::string& s) {
  std::fprintf(stderr, "[acceptance] %s\n", s.c_str());
  std::fflush(stderr);
}

// ---------------------------------------------------------------------------
// Full-model runs through the production pipeline, memoized by label.

struct Run {
  Trajectory traj;
  ex::PointSummary summary;
  double wall = 0.0;

  double final_en() const { return traj.samples.back().measures->log_negativity; }
  std::vector<double> en() const {
    std::vector<double> v;
    for (const auto& s : traj.samples) v.push_back(s.measures ? s.measures->log_negativity : std::nan(""));
    return v;
  }
};

class Runs {
 public:
  explicit Runs(fs::path root) : root_(std::move(root)) {}

  ex::ScenarioConfig config(const std::string& label, const SystemParams& p, const FockLayout& dims,
                            double horizon) const {
    ex::ScenarioConfig c = ex::scenario_defaults(ex::ScenarioId::custom);
    c.params = p;
    c.layout = dims;
    c.horizon_tau = horizon;
    c.output_dir = (root_ / label).string();
    return c;
  }

  const Run& get(const std::string& label, const SystemParams& p, const FockLayout& dims, double horizon) {
    const std::string key = label + dims_tag(dims);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    progress("run " + key + fmt(" (%g tau)", horizon));
    const ex::ScenarioConfig c = config(key, p, dims, horizon);
    std::vector<Trajectory> trajs;
    ex::RunOptions opt;
    opt.trajectories = &trajs;
    const auto t0 = Clock::now();
    const ex::RunManifest m = ex::run_scenario(c, opt);
    Run r;
    r.wall = seconds_since(t0);
    r.traj = std::move(trajs.at(0));
    r.summary = m.points.at(0);
    if (!r.summary.healthy) throw HealthError("run " + key + " failed: " + r.summary.error);
    progress(fmt("  done in %.0f s, E_N(end) = %.6g bits, max top-level population %.3g", r.wall, r.final_en(),
                 r.summary.max_top_level));
    return cache_.emplace(key, std::move(r)).first->second;
  }

  const fs::path& root() const { return root_; }

  static std::string dims_tag(const FockLayout& d) {
    return fmt("_%d_%d_%d", d.dim(0), d.dim(1), d.dim(2));
  }

 private:
  fs::path root_;
  std::map<std::string, Run> cache_;
};

// Parameter variants used by criteria 4-10.
SystemParams baseline() { return SystemParams::reference_defaults(); }

SystemParams detuned_drive() {
  SystemParams p = baseline();
  apply_drive_detuning(p, 10.0 * p.delta());
  return p;
}

SystemParams equal_frequencies() {
  SystemParams p = baseline();
  p.omega2 = p.omega1;
  p.gamma2 = damping_from_quality(p.omega2, 2e5);
  apply_drive_detuning(p, 0.0);
  return p;
}

SystemParams asymmetric(double dg_hz) {
  SystemParams p = baseline();
  apply_coupling_asymmetry(p, 0.5 * (p.g01 + p.g02), two_pi * dg_hz);
  return p;
}

SystemParams thermal(double nbar) {
  SystemParams p = baseline();
  p.nbar1 = p.nbar2 = nbar;
  return p;
}

SystemParams qubit_decay(double hz) {
  SystemParams p = baseline();
  p.gamma_t = two_pi * hz;
  p.gamma_phi = 2.0 * p.gamma_t;
  return p;
}

const FockLayout small_dims{3, 8, 8};
const FockLayout large_dims{4, 10, 10};
constexpr double horizon = 200.0;

// ---------------------------------------------------------------------------
// Criterion 1: analytic oracles.

void criterion1() {
  const auto t0 = Clock::now();
  std::vector<std::string> bad;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };

  // Single-mode decay, d<n>/dt = -gamma <n>.
  {
    const int d = 4;
    const double gamma = 1.0;
    const Operator b = annihilation(d);
    const DenseGenerator gen([d](double) { return Operator(Operator::Zero(d, d)); }, {{"down", b, gamma}}, d);
    IntegratorConfig c;
    c.tau = 1.0;
    c.t_end = 5.0;
    c.sample_stride = 8;
    c.dt_init = 1e-4;
    c.dt_max = 0.1;
    c.rtol = 1e-10;
    c.atol = 1e-12;
    Observers obs;
    obs.observables.push_back({"n", number(d)});
    const Trajectory tr = integrate(DensityMatrix::fock(d, 1), c, gen, FockLayout{d}, obs);
    double err = 0.0;
    for (const auto& s : tr.samples) err = std::max(err, std::abs(s.expectations[0] - std::exp(-gamma * s.t)));
    check(err < 1e-6, fmt("decay error %.2e", err));
  }
  // Thermal relaxation of a damped mode to the bath occupation.
  {
    const int d = 16;
    const double gamma = 1.0, nbar = 0.2;
    const Operator b = annihilation(d);
    const DenseGenerator gen([d](double) { return Operator(Operator::Zero(d, d)); },
                             {{"down", b, (nbar + 1) * gamma}, {"up", b.adjoint(), nbar * gamma}}, d);
    IntegratorConfig c;
    c.tau = 30.0;
    c.t_end = 30.0;
    c.sample_stride = 1;
    c.dt_init = 1e-3;
    c.dt_max = 1.0;
    c.rtol = 1e-10;
    c.atol = 1e-12;
    const Operator rho = propagate(DensityMatrix::fock(d, 0).op(), 0.0, c.t_end, c, gen);
    const double n = (number(d) * rho).trace().real();
    check(std::abs(n - nbar) < 1e-4, fmt("thermal <n> = %.8f", n));
  }
  // Bell state.
  {
    StateVector psi = StateVector::Zero(4);
    psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
    const double en = log_negativity(DensityMatrix::pure(psi), {2, 2});
    check(std::abs(en - 1.0) < 1e-9, fmt("Bell E_N = %.12f", en));
  }
  // Two-mode squeezed vacuum, r = 0.1, dims 12.
  {
    const double r = 0.1;
    const int d = 12;
    StateVector psi = StateVector::Zero(d * d);
    for (int k = 0; k < d; ++k) psi(k * d + k) = std::pow(-std::tanh(r), k) / std::cosh(r);
    const DensityMatrix s = DensityMatrix::pure(psi.normalized());
    const double en = log_negativity(s, {d, d});
    const SymplecticSpectrum sp = symplectic_eigenvalues(covariance_matrix(s, {d, d}));
    check(std::abs(en - 2.0 * r / std::numbers::ln2) < 1e-3, fmt("TMSV E_N = %.6f", en));
    check(std::abs(sp.nu_plus - 1.0) < 1e-4 && std::abs(sp.nu_minus - 1.0) < 1e-4,
          fmt("TMSV nu = (%.6f, %.6f)", sp.nu_plus, sp.nu_minus));
  }
  // Gaussian products have delta12 = 0.
  {
    const int d = 20;
    StateVector vac = StateVector::Zero(d);
    vac(0) = 1.0;
    const DensityMatrix vv = DensityMatrix::pure(kron(vac, vac));
    const DensityMatrix cc = DensityMatrix::pure(kron(coherent_state(d, {0.4, 0.3}), coherent_state(d, {-0.2, 0.1})));
    const DensityMatrix tt = DensityMatrix::product(DensityMatrix::thermal(d, 0.5), DensityMatrix::thermal(d, 0.3));
    for (const auto& [name, st] : {std::pair{"vacuum", &vv}, std::pair{"coherent", &cc}, std::pair{"thermal", &tt}}) {
      const double dl = non_gaussianity(*st, {d, d}).delta12;
      check(std::abs(dl) < 1e-5, fmt("%s delta12 = %.2e", name, dl));
    }
  }
  // One phonon in mode 1.
  {
    StateVector psi = StateVector::Zero(16);
    psi(1 * 4 + 0) = 1.0;
    const double dl = non_gaussianity(DensityMatrix::pure(psi), {4, 4}).delta12;
    check(std::abs(dl - 2.0 * std::numbers::ln2) < 1e-8, fmt("delta12(|1,0>) = %.12f", dl));
  }
  const double wall = seconds_since(t0);
  check(wall < 60.0, fmt("runtime %.1f s", wall));
  std::string detail = fmt("oracle suite in %.2f s", wall);
  for (const auto& b : bad) detail += "; " + b;
  if (bad.empty()) detail += " (decay, thermal, Bell, TMSV, Gaussian delta12, |1,0> delta12 all within tolerance)";
  report(1, bad.empty(), detail);
}

// ---------------------------------------------------------------------------

void criterion2(Runs& runs) {
  const Run& r = runs.get("baseline", baseline(), small_dims, horizon);
  double worst_trace = 0.0, worst_eig = 0.0, worst_top = 0.0, t_top = -1.0;
  for (const auto& s : r.traj.samples) {
    worst_trace = std::max(worst_trace, s.health.trace_err);
    worst_eig = std::min(worst_eig, s.health.min_eig);
    if (s.health.top_level_pop > 1e-3 && t_top < 0.0) t_top = s.t / r.traj.tau;
    worst_top = std::max(worst_top, s.health.top_level_pop);
  }
  const bool pass = worst_trace <= 1e-7 && worst_eig >= -1e-7 && worst_top <= 1e-3 && r.wall <= 1800.0;
  std::string d = fmt("200 tau at (3,8,8): max |tr-1| = %.2e, min eigenvalue = %.2e, max top-level population = %.3g",
                      worst_trace, worst_eig, worst_top);
  if (t_top >= 0.0) d += fmt(" (exceeds 1e-3 from t = %.1f tau)", t_top);
  d += fmt(", runtime %.0f s", r.wall);
  report(2, pass, d);
}

// ---------------------------------------------------------------------------
// Criterion 3: full model with the transmon traced out vs the effective model.

struct MomentSeries {
  std::vector<double> t;
  std::vector<std::array<double, 6>> m;  // n1, n2, |b1 b2|, |b1^2|, |b2^2|, |b1^dag b2|
};

std::vector<Observable> moment_observables(const FockLayout& layout, std::size_t s1, std::size_t s2) {
  const Operator b1 = embed(annihilation(layout.dim(s1)), layout, s1);
  const Operator b2 = embed(annihilation(layout.dim(s2)), layout, s2);
  std::vector<Observable> obs;
  auto add_complex = [&](const std::string& name, const Operator& x) {
    obs.push_back({name + "_re", 0.5 * (x + x.adjoint())});
    obs.push_back({name + "_im", Complex(0.0, -0.5) * (x - x.adjoint())});
  };
  obs.push_back({"n1", b1.adjoint() * b1});
  obs.push_back({"n2", b2.adjoint() * b2});
  add_complex("b1b2", b1 * b2);
  add_complex("b1b1", b1 * b1);
  add_complex("b2b2", b2 * b2);
  add_complex("b1db2", b1.adjoint() * b2);
  return obs;
}

MomentSeries moments(const Trajectory& tr) {
  MomentSeries out;
  for (const auto& s : tr.samples) {
    const auto& e = s.expectations;
    out.t.push_back(s.t);
    out.m.push_back({e[0], e[1], std::hypot(e[2], e[3]), std::hypot(e[4], e[5]), std::hypot(e[6], e[7]),
                     std::hypot(e[8], e[9])});
  }
  return out;
}

void criterion3() {
  SystemParams p = baseline();
  p.gamma_t = p.gamma_phi = p.gamma1 = p.gamma2 = 0.0;
  p.nbar1 = p.nbar2 = 0.0;
  const double h = 100.0;
  const int dm = 8;

  std::string validity;
  try {
    const ValidityReport v = validity_check(p);
    validity = fmt("max upsilon = %.3g", std::max(v.max_upsilon1, v.max_upsilon2));
  } catch (const SingularityError& e) {
    validity = std::string("validity check: ") + e.what();
  }

  // Effective two-mode evolution in the frame rotating at omega1, omega2.
  const FockLayout mech{dm, dm};
  IntegratorConfig c;
  c.tau = p.tau();
  c.t_end = h * c.tau;
  c.sample_stride = 4;
  c.rtol = 1e-8;
  c.atol = 1e-10;
  c.dt_init = 1e-11;
  c.dt_max = c.tau / 20.0;
  Observers obs_eff;
  obs_eff.observables = moment_observables(mech, 0, 1);
  Trajectory eff;
  try {
    const DenseGenerator gen([&](double t) { return effective_hamiltonian(t, p, mech); }, {}, mech.total());
    eff = integrate(DensityMatrix::fock(mech.total(), 0), c, gen, mech, obs_eff);
  } catch (const Error& e) {
    report(3, false, std::string("effective model cannot be evaluated over the drive period: ") + e.what() + " [" +
                         validity + "]");
    return;
  }

  // Full model, dissipation-free, local picture; moment magnitudes are frame independent.
  progress("criterion 3: full dissipation-free model over 100 tau");
  Observers obs_full;
  obs_full.observables = moment_observables(small_dims, slot::mr1, slot::mr2);
  IntegratorConfig cf = ex::scenario_defaults(ex::ScenarioId::custom).integrator;
  cf.tau = c.tau;
  cf.t_end = c.t_end;
  const auto gen = make_generator(p, small_dims, Frame::rotating, Picture::local);
  const Trajectory full = integrate(DensityMatrix::fock(small_dims.total(), 0), cf, *gen, small_dims, obs_full);

  const MomentSeries a = moments(full), b = moments(eff);
  const char* names[] = {"n1", "n2", "|<b1 b2>|", "|<b1^2>|", "|<b2^2>|", "|<b1^dag b2>|"};
  double worst = 0.0;
  std::string worst_name;
  for (int k = 0; k < 6; ++k) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.m.size() && i < b.m.size(); ++i) {
      scale = std::max(scale, std::abs(a.m[i][k]));
      diff = std::max(diff, std::abs(a.m[i][k] - b.m[i][k]));
    }
    const double rel = scale > 0.0 ? diff / scale : diff;
    if (rel > worst) {
      worst = rel;
      worst_name = names[k];
    }
  }
  report(3, worst <= 0.05,
         fmt("largest relative deviation of second moments over 100 tau: %.3g (%s) [", worst, worst_name.c_str()) +
             validity + "]");
}

// ---------------------------------------------------------------------------

struct Quantities {
  double resonant, detuned, equal, dg0, dg61, dg139, nth02, nth8, nth20;
};

Quantities quantities(Runs& runs, const FockLayout& dims) {
  Quantities q{};
  q.resonant = runs.get("baseline", baseline(), dims, horizon).final_en();
  q.detuned = runs.get("detuned_drive", detuned_drive(), dims, horizon).final_en();
  q.equal = runs.get("equal_frequencies", equal_frequencies(), dims, horizon).final_en();
  q.dg0 = q.resonant;
  q.dg61 = runs.get("delta_g_6.1kHz", asymmetric(6.1e3), dims, horizon).final_en();
  q.dg139 = runs.get("delta_g_13.9kHz", asymmetric(13.9e3), dims, horizon).final_en();
  q.nth02 = q.resonant;
  q.nth8 = runs.get("nth_8", thermal(8.0), dims, horizon).final_en();
  q.nth20 = runs.get("nth_20", thermal(20.0), dims, horizon).final_en();
  return q;
}

void criterion4(Runs& runs) {
  const double res = runs.get("baseline", baseline(), small_dims, horizon).final_en();
  const double det = runs.get("detuned_drive", detuned_drive(), small_dims, horizon).final_en();
  const double ratio = det > 0.0 ? res / det : std::numeric_limits<double>::infinity();
  report(4, ratio >= 5.0,
         fmt("E_N(200 tau): resonant %.6g bits, drive detuned by 10 (w1-w2) %.6g bits, ratio %.4g (need >= 5)", res,
             det, ratio));
}

void criterion5(Runs& runs) {
  const double eq = runs.get("equal_frequencies", equal_frequencies(), small_dims, horizon).final_en();
  const double base = runs.get("baseline", baseline(), small_dims, horizon).final_en();
  const bool pass = eq <= 1e-3 && base >= 10.0 * eq;
  report(5, pass,
         fmt("E_N(200 tau) with w1 = w2: %.6g bits (need <= 1e-3); detuned-frequency baseline %.6g bits (ratio %.4g, "
             "need >= 10)",
             eq, base, eq > 0.0 ? base / eq : std::numeric_limits<double>::infinity()));
}

void criterion6(Runs& runs) {
  const Run* r[3] = {&runs.get("baseline", baseline(), small_dims, horizon),
                     &runs.get("delta_g_6.1kHz", asymmetric(6.1e3), small_dims, horizon),
                     &runs.get("delta_g_13.9kHz", asymmetric(13.9e3), small_dims, horizon)};
  const double e0 = r[0]->final_en(), e139 = r[2]->final_en();
  // Pairwise relative difference on samples up to 50 tau where E_N is resolvable.
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const auto a = r[i]->en(), b = r[j]->en();
      for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
        if (r[i]->traj.samples[k].t > 50.0 * r[i]->traj.tau * (1 + 1e-12)) break;
        const double m = std::max(std::abs(a[k]), std::abs(b[k]));
        if (m < 1e-9) continue;
        worst = std::max(worst, std::abs(a[k] - b[k]) / m);
      }
    }
  }
  report(6, e0 >= e139 && worst <= 0.1,
         fmt("E_N(200 tau): dg = 0 -> %.8g, 6.1 kHz -> %.8g, 13.9 kHz -> %.8g bits; largest pairwise relative "
             "difference for t <= 50 tau: %.3g",
             e0, r[1]->final_en(), e139, worst));
}

void criterion7(Runs& runs) {
  const double a = runs.get("baseline", baseline(), small_dims, horizon).final_en();
  const double b = runs.get("nth_8", thermal(8.0), small_dims, horizon).final_en();
  const double c = runs.get("nth_20", thermal(20.0), small_dims, horizon).final_en();
  report(7, a >= b && b >= c,
         fmt("E_N(200 tau) for n_th = 0.2, 8, 20: %.8g, %.8g, %.8g bits", a, b, c));
}

/// First time after the peak at which E_N drops below half the peak, if any.
std::optional<double> half_peak_time(const Run& r) {
  const auto en = r.en();
  const auto it = std::max_element(en.begin(), en.end());
  const double peak = *it;
  for (auto k = static_cast<std::size_t>(it - en.begin()); k < en.size(); ++k) {
    if (en[k] < 0.5 * peak) return r.traj.samples[k].t / r.traj.tau;
  }
  return std::nullopt;
}

void criterion8(Runs& runs) {
  const Run& slow = runs.get("gamma_t_0.05kHz", qubit_decay(50.0), small_dims, horizon);
  const Run& fast = runs.get("baseline", baseline(), small_dims, horizon);
  const auto ts = half_peak_time(slow), tf = half_peak_time(fast);
  auto show = [](const std::optional<double>& t, const Run& r) {
    const auto en = r.en();
    const auto it = std::max_element(en.begin(), en.end());
    const double t_peak = r.traj.samples[static_cast<std::size_t>(it - en.begin())].t / r.traj.tau;
    return t ? fmt("%.2f tau", *t)
             : fmt("not reached (peak %.4g bits at %.1f tau of %.0f)", *it, t_peak, r.traj.samples.back().t / r.traj.tau);
  };
  // A time beyond the horizon is only comparable against one inside it.
  const bool pass = tf && (!ts || *ts > *tf);
  report(8, pass,
         "half-peak decay time: gamma_t/2pi = 0.05 kHz -> " + show(ts, slow) + "; 4.5 kHz -> " + show(tf, fast));
}

void criterion9(Runs& runs, double long_tau) {
  const Run& desk = runs.get("baseline", baseline(), small_dims, horizon);
  const double eps_ng = MeasureOptions{}.eps_ng;
  // Desk horizon: delta12 > 0 wherever E_N > 0, and at the end.
  std::size_t entangled = 0, both = 0;
  for (const auto& s : desk.traj.samples) {
    if (s.measures->log_negativity > 0.0) {
      ++entangled;
      if (s.measures->delta12 > 0.0) ++both;
    }
  }
  const auto& last = desk.traj.samples.back();
  const bool desk_ok = entangled > 0 && both == entangled && last.measures->delta12 > 0.0;

  // Long horizon: continue the baseline from its final checkpoint.
  const std::string key = "baseline" + Runs::dims_tag(small_dims);
  ex::ScenarioConfig cfg = runs.config(key, baseline(), small_dims, long_tau);
  cfg.integrator.sample_stride = 1;
  progress(fmt("criterion 9: continuing the baseline to %.0f tau", long_tau));
  std::vector<Trajectory> trajs;
  ex::RunOptions opt;
  opt.trajectories = &trajs;
  const auto t0 = Clock::now();
  const ex::RunManifest m = ex::resume((fs::path(cfg.output_dir) / "custom_0.ckpt").string(), cfg, opt);
  const double wall = seconds_since(t0);
  const ex::PointSummary& s = m.points.at(0);
  std::string long_detail;
  bool long_ok = false;
  if (trajs.empty() || trajs[0].samples.empty()) {
    long_detail = "long run produced no samples" + (s.error.empty() ? std::string() : ": " + s.error);
  } else {
    const auto& f = trajs[0].samples.back();
    const double en = f.measures ? f.measures->log_negativity : std::nan("");
    const double dl = f.measures ? f.measures->delta12 : std::nan("");
    long_ok = s.healthy && dl > 10.0 * eps_ng && en < 1e-3;
    long_detail = fmt("at %.0f tau: delta12 = %.4g nats (need > %.0e), E_N = %.4g bits (need < 1e-3), %s, %.0f s",
                      f.t / trajs[0].tau, dl, 10.0 * eps_ng, en, s.healthy ? "healthy" : "unhealthy", wall);
    if (!s.healthy) long_detail += ": " + s.error;
  }
  report(9, desk_ok && long_ok,
         fmt("desk horizon: delta12 > 0 on %zu of %zu entangled samples, final delta12 = %.4g nats with E_N = %.4g "
             "bits; long horizon ",
             both, entangled, last.measures->delta12, last.measures->log_negativity) +
             long_detail);
}

void criterion10(Runs& runs) {
  const Quantities a = quantities(runs, small_dims);
  const Quantities b = quantities(runs, large_dims);
  const std::pair<const char*, double Quantities::*> fields[] = {
      {"resonant", &Quantities::resonant}, {"detuned", &Quantities::detuned}, {"w1=w2", &Quantities::equal},
      {"dg=6.1kHz", &Quantities::dg61},    {"dg=13.9kHz", &Quantities::dg139}, {"n_th=8", &Quantities::nth8},
      {"n_th=20", &Quantities::nth20}};
  double worst = 0.0;
  std::string list;
  for (const auto& [name, f] : fields) {
    const double x = a.*f, y = b.*f;
    const double rel = std::abs(y - x) / std::max(std::abs(x), 1e-300);
    worst = std::max(worst, rel);
    list += fmt("%s%s %.4g->%.4g (%.2g%%)", list.empty() ? "" : ", ", name, x, y, 100.0 * rel);
  }
  report(10, worst < 0.02, fmt("E_N(200 tau) at (3,8,8) -> (4,10,10): ", 0) + list);
}

// ---------------------------------------------------------------------------

void criterion11() {
  SystemParams p = SystemParams::reference_defaults();
  p.amp2 = 0.0;
  const FockLayout layout{2, 8, 8};
  const GeneratorTerms g = fn_generator(0.0, p, layout);
  const double constant = g.residual.norm() / g.h1.norm();

  // Unequal tones keep epsilon(t) away from the mechanical poles; evaluate at a
  // quarter modulation period, where the envelope changes fastest.
  std::vector<double> x, y;
  for (double f : {1e4, 2e4, 5e4, 1e5}) {
    SystemParams q = SystemParams::reference_defaults();
    q.amp2 = 0.1 * q.amp1;
    q.omegaL1 = q.omegaL2 = 0.5 * two_pi * f;
    const double t = 0.25 / f;
    const GeneratorTerms m = fn_generator(t, q, layout);
    x.push_back(std::log(two_pi * f));
    y.push_back(std::log(m.residual.norm() / m.h1.norm()));
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  report(11, constant <= 1e-10 && std::abs(slope - 1.0) <= 0.1,
         fmt("constant-drive relative residual %.2e (need <= 1e-10); modulated log-log slope over one decade %.4f",
             constant, slope));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  bool strict = false;
  double long_tau = 1000.0;
  std::string work = (fs::temp_directory_path() / "mechent_acceptance").string();
  std::vector<int> only;
  app.add_flag("--strict", strict, "Exit non-zero if any criterion fails");
  app.add_option("--long-tau", long_tau, "Horizon of the extended run of criterion 9 (tau)")->check(CLI::Range(200.0, 1e6));
  app.add_option("--work-dir", work, "Directory for run outputs");
  app.add_option("--only", only, "Evaluate only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Runs runs(work);
  const std::vector<std::pair<int, std::function<void()>>> criteria = {
      {1, criterion1},
      {2, [&] { criterion2(runs); }},
      {3, criterion3},
      {4, [&] { criterion4(runs); }},
      {5, [&] { criterion5(runs); }},
      {6, [&] { criterion6(runs); }},
      {7, [&] { criterion7(runs); }},
      {8, [&] { criterion8(runs); }},
      {9, [&] { criterion9(runs, long_tau); }},
      {10, [&] { criterion10(runs); }},
      {11, criterion11},
  };
  const auto t0 = Clock::now();
  bool aborted = false;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("not evaluated: ") + e.what());
      aborted = true;
    }
  }
  const auto fails = std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return !v.pass; });
  std::printf("summary: %zu criteria evaluated, %zu passed, %ld failed, %.0f s\n", verdicts.size(),
              verdicts.size() - static_cast<std::size_t>(fails), static_cast<long>(fails), seconds_since(t0));
  if (aborted) return 2;
  return strict && fails > 0 ? 1 : 0;
}
