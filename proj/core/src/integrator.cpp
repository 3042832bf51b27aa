#include "mechent/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mechent {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

void symmetrize(Operator& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    m(j, j) = Complex(m(j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Complex v = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }
}

bool all_finite(const Operator& m) {
  const double* p = reinterpret_cast<const double*>(m.data());
  const Eigen::Index n = 2 * m.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!std::isfinite(p[k])) return false;
  }
  return true;
}

// Fixed-step or adaptive stepping between two times, with FSAL state kept across calls.
class Stepper {
 public:
  Stepper(const IntegratorConfig& cfg, const Generator& gen)
      : cfg_(cfg), gen_(gen), h_(std::min(cfg.dt_init, cfg.dt_max)) {
    const int n = gen.dim();
    for (auto* m : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_}) m->resize(n, n);
  }

  // Advances y from t to t_target exactly. Throws std::runtime_error-derived messages via `fail`.
  void advance(double& t, Operator& y, double t_target) {
    if (cfg_.method == Method::rk4) {
      advance_rk4(t, y, t_target);
    } else {
      advance_dopri(t, y, t_target);
    }
  }

  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::string failure;

 private:
  void advance_rk4(double& t, Operator& y, double t_target) {
    while (t < t_target) {
      const double remaining = t_target - t;
      const int nsteps = std::max(1, static_cast<int>(std::ceil(remaining / cfg_.dt_max - 1e-9)));
      const double h = remaining / nsteps;
      for (int s = 0; s < nsteps; ++s) {
        gen_.apply(t, y, k1_);
        tmp_ = y + (0.5 * h) * k1_;
        gen_.apply(t + 0.5 * h, tmp_, k2_);
        tmp_ = y + (0.5 * h) * k2_;
        gen_.apply(t + 0.5 * h, tmp_, k3_);
        tmp_ = y + h * k3_;
        gen_.apply(t + h, tmp_, k4_);
        y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
        symmetrize(y);
        t = (s + 1 == nsteps) ? t_target : t + h;
        ++accepted;
        if (!all_finite(y)) {
          failure = "non-finite state entries";
          return;
        }
      }
    }
  }

  void advance_dopri(double& t, Operator& y, double t_target) {
    const double h_min = 1e-14 * std::max(std::abs(t_target), cfg_.tau);
    if (!fsal_valid_ || fsal_t_ != t) {
      gen_.apply(t, y, k1_);
      fsal_valid_ = true;
      fsal_t_ = t;
    }
    while (t < t_target) {
      double h = std::min(h_, cfg_.dt_max);
      bool last = false;
      if (t + h >= t_target * (1.0 - 1e-15) || t_target - (t + h) < 1e-3 * h) {
        h = t_target - t;
        last = true;
      }
      tmp_ = y + (h * a21) * k1_;
      gen_.apply(t + c2 * h, tmp_, k2_);
      tmp_ = y + h * (a31 * k1_ + a32 * k2_);
      gen_.apply(t + c3 * h, tmp_, k3_);
      tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
      gen_.apply(t + c4 * h, tmp_, k4_);
      tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
      gen_.apply(t + c5 * h, tmp_, k5_);
      tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
      gen_.apply(t + h, tmp_, k6_);
      ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
      symmetrize(ynew_);
      const double t_new = last ? t_target : t + h;
      gen_.apply(t_new, ynew_, k7_);
      tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

      double acc = 0.0;
      const Eigen::Index n = y.size();
      for (Eigen::Index k = 0; k < n; ++k) {
        const double sc = cfg_.atol + cfg_.rtol * std::max(std::abs(y(k)), std::abs(ynew_(k)));
        const double r = std::abs(tmp_(k)) / sc;
        acc += r * r;
      }
      const double err = std::sqrt(acc / static_cast<double>(n));

      if (!std::isfinite(err)) {
        failure = "non-finite error estimate";
        return;
      }
      if (err <= 1.0) {
        t = t_new;
        y.swap(ynew_);
        k1_.swap(k7_);
        fsal_t_ = t;
        ++accepted;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // A step shortened to hit the target does not shrink the next proposal.
        if (!last || h >= h_) h_ = std::min(h * fac, cfg_.dt_max);
        if (!all_finite(y)) {
          failure = "non-finite state entries";
          return;
        }
      } else {
        ++rejected;
        h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
        if (h_ < h_min) {
          std::ostringstream os;
          os << "step size underflow (h = " << h_ << " s)";
          failure = os.str();
          return;
        }
      }
    }
  }

  const IntegratorConfig& cfg_;
  const Generator& gen_;
  double h_;
  bool fsal_valid_ = false;
  double fsal_t_ = 0.0;
  Operator k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
};

std::string describe(const HealthReport& h, const HealthThresholds& th) {
  std::ostringstream os;
  if (h.trace_err > th.trace) os << "trace error " << h.trace_err << " exceeds " << th.trace;
  if (h.min_eig < th.min_eig) {
    if (os.tellp() > 0) os << "; ";
    os << "minimum eigenvalue " << h.min_eig << " below " << th.min_eig;
  }
  return os.str();
}

}  // namespace

const char* to_string(Method m) { return m == Method::dopri5 ? "dopri5" : "rk4"; }

Method method_from_string(const std::string& s) {
  if (s == "dopri5") return Method::dopri5;
  if (s == "rk4") return Method::rk4;
  throw ParameterError("unknown integrator method '" + s + "' (expected dopri5 or rk4)");
}

void IntegratorConfig::validate() const {
  auto bad = [](const std::string& m) { throw ParameterError("integrator: " + m); };
  if (!(rtol > 0.0) || !(atol > 0.0)) bad("rtol and atol must be positive");
  if (!(dt_init > 0.0) || !(dt_max > 0.0)) bad("dt_init and dt_max must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau)) bad("tau must be positive");
  if (sample_stride < 1) bad("sample_stride must be >= 1");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) bad("t_end must be finite and non-negative");
}

std::size_t Trajectory::observable_index(const std::string& name) const {
  const auto it = std::find(observable_names.begin(), observable_names.end(), name);
  if (it == observable_names.end()) throw Error("trajectory has no observable '" + name + "'");
  return static_cast<std::size_t>(it - observable_names.begin());
}

std::vector<double> Trajectory::series(const std::string& name) const {
  const std::size_t k = observable_index(name);
  std::vector<double> out;
  out.reserve(samples.size());
  for (const SampleRecord& s : samples) out.push_back(s.expectations[k]);
  return out;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const SampleRecord& s : samples) out.push_back(s.t);
  return out;
}

Observers default_observers(const FockLayout& layout) {
  static const char* names[] = {"n_transmon", "n_mr1", "n_mr2"};
  Observers obs;
  for (std::size_t s = 0; s < layout.slots() && s < 3; ++s) {
    obs.observables.push_back({names[s], embed(number(layout.dim(s)), layout, s)});
  }
  if (layout.slots() == 3) obs.bipartition = {slot::mr1, slot::mr2};
  return obs;
}

HealthReport health_report(const Operator& rho, const FockLayout& layout, const HealthThresholds& th) {
  if (rho.rows() != layout.total() || rho.cols() != layout.total()) {
    throw DimensionError("health_report: state does not match layout");
  }
  HealthReport h;
  h.trace_err = std::abs(rho.trace() - Complex(1.0));
  h.herm_err = hermiticity_error(rho);
  Operator sym = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(sym, Eigen::EigenvaluesOnly);
  h.min_eig = es.eigenvalues().minCoeff();

  // Population of the highest retained level in each slot.
  const Eigen::VectorXd diag = rho.diagonal().real();
  int stride = layout.total();
  for (std::size_t s = 0; s < layout.slots(); ++s) {
    const int d = layout.dim(s);
    stride /= d;
    double pop = 0.0;
    for (int k = 0; k < layout.total(); ++k) {
      if ((k / stride) % d == d - 1) pop += diag(k);
    }
    h.top_level_pop = std::max(h.top_level_pop, pop);
  }
  h.top_level_flag = h.top_level_pop > th.top_level;
  return h;
}

Trajectory integrate(const DensityMatrix& rho0, const IntegratorConfig& config, const Generator& generator,
                     const FockLayout& layout, const Observers& observers, double t0) {
  config.validate();
  if (rho0.dim() != generator.dim() || layout.total() != generator.dim()) {
    throw DimensionError("integrate: state, layout and generator dimensions differ");
  }
  for (const Observable& o : observers.observables) {
    if (o.op.rows() != layout.total()) throw DimensionError("integrate: observable " + o.name + " has wrong size");
  }
  std::vector<int> sub_dims;
  for (std::size_t s : observers.bipartition) sub_dims.push_back(layout.dim(s));
  if (!observers.bipartition.empty() && sub_dims.size() != 2) {
    throw DimensionError("integrate: bipartition must name exactly two slots");
  }

  Trajectory traj;
  traj.tau = config.tau;
  for (const Observable& o : observers.observables) traj.observable_names.push_back(o.name);

  const double dt_s = config.sample_interval();
  auto record = [&](double t, const Operator& rho_pic) {
    const Operator rho = generator.to_schrodinger(t, rho_pic);
    SampleRecord rec;
    rec.t = t;
    rec.health = health_report(rho, layout, config.health);
    const DensityMatrix dm = DensityMatrix::trusted(rho);
    for (const Observable& o : observers.observables) rec.expectations.push_back(expectation(o.op, dm).real());
    const std::string problem = describe(rec.health, config.health);
    if (!problem.empty()) {
      traj.samples.push_back(std::move(rec));
      std::ostringstream os;
      os << "integrate: unhealthy state at t = " << t << " s: " << problem;
      throw IntegrationError(os.str(), traj, t);
    }
    if (!observers.bipartition.empty()) {
      const DensityMatrix r12 = partial_trace(dm, layout, std::span<const std::size_t>(observers.bipartition));
      rec.measures = measure_bipartition(r12, {sub_dims[0], sub_dims[1]}, observers.measure_options);
    }
    traj.samples.push_back(std::move(rec));
    const bool due = observers.checkpoint_every > 0 &&
                     traj.samples.size() % static_cast<std::size_t>(observers.checkpoint_every) == 0;
    if (due) {
      if (observers.on_checkpoint) observers.on_checkpoint(t, rho);
      if (observers.keep_snapshots) traj.snapshots.emplace_back(t, rho);
    }
    return rho;
  };

  Operator y = generator.from_schrodinger(t0, rho0.op());
  double t = t0;
  Stepper stepper(config, generator);
  const std::size_t evals0 = generator.rhs_evaluations();

  // First grid point at or after t0.
  long long k = static_cast<long long>(std::ceil(t0 / dt_s - 1e-9));
  Operator last_rho = rho0.op();
  double last_t = t0;
  bool last_saved = false;
  auto finish = [&]() {
    traj.steps_accepted = stepper.accepted;
    traj.steps_rejected = stepper.rejected;
    traj.rhs_evaluations = generator.rhs_evaluations() - evals0;
  };

  while (true) {
    double target = static_cast<double>(k) * dt_s;
    if (target > config.t_end * (1.0 + 1e-12)) break;
    target = std::min(target, config.t_end);
    if (target > t) {
      stepper.advance(t, y, target);
      if (!stepper.failure.empty()) {
        finish();
        std::ostringstream os;
        os << "integrate: " << stepper.failure << " at t = " << t << " s";
        throw IntegrationError(os.str(), traj, t);
      }
      t = target;
    }
    try {
      last_rho = record(t, y);
    } catch (IntegrationError&) {
      throw;
    } catch (const Error& e) {
      finish();
      std::ostringstream os;
      os << "integrate: measure evaluation failed at t = " << t << " s: " << e.what();
      throw IntegrationError(os.str(), traj, t);
    }
    last_t = t;
    last_saved = observers.checkpoint_every > 0 &&
                 traj.samples.size() % static_cast<std::size_t>(observers.checkpoint_every) == 0;
    ++k;
  }
  // The end of the run is always checkpointed.
  if (!last_saved && !traj.samples.empty()) {
    if (observers.on_checkpoint) observers.on_checkpoint(last_t, last_rho);
    if (observers.keep_snapshots) traj.snapshots.emplace_back(last_t, last_rho);
  }
  finish();
  return traj;
}

Operator propagate(const Operator& rho0, double t0, double t1, const IntegratorConfig& config,
                   const Generator& generator) {
  if (rho0.rows() != generator.dim()) throw DimensionError("propagate: state dimension mismatch");
  if (t1 < t0) throw ParameterError("propagate: t1 < t0");
  Operator y = generator.from_schrodinger(t0, rho0);
  double t = t0;
  Stepper stepper(config, generator);
  if (t1 > t0) stepper.advance(t, y, t1);
  if (!stepper.failure.empty()) throw HealthError("propagate: " + stepper.failure);
  return generator.to_schrodinger(t1, y);
}

StabilityReport stability_monitor(const std::vector<std::pair<std::string, std::vector<double>>>& series,
                                  std::size_t window, double tol, double ceiling) {
  if (window == 0) throw ParameterError("stability_monitor: window must be positive");
  if (series.empty()) throw ParameterError("stability_monitor: no series");
  StabilityReport r;
  bool all_stationary = true;
  for (const auto& [name, v] : series) {
    for (double x : v) {
      if (!std::isfinite(x) || std::abs(x) > ceiling) {
        r.diverged = true;
        r.worst_observable = name;
      }
    }
    if (v.size() < 2 * window) {
      std::ostringstream os;
      os << "stability_monitor: insufficient samples for '" << name << "' (" << v.size() << " < 2 x window "
         << window << ")";
      throw ParameterError(os.str());
    }
    auto mean_of = [&](std::size_t w) {  // w = 0 is the last window
      const std::size_t end = v.size() - w * window;
      double s = 0.0;
      for (std::size_t i = end - window; i < end; ++i) s += v[i];
      return s / static_cast<double>(window);
    };
    const double m0 = mean_of(0), m1 = mean_of(1);
    const double drift = std::abs(m0 - m1) / std::max(std::abs(m1), 1e-12);
    if (drift > r.max_drift) {
      r.max_drift = drift;
      if (!r.diverged) r.worst_observable = name;
    }
    if (drift >= tol) all_stationary = false;
    if (v.size() >= 3 * window) {
      const double m2 = mean_of(2);
      const double d1 = m1 - m2, d0 = m0 - m1;
      if (d1 > 0.0 && d0 > d1 && drift >= tol) {
        r.diverged = true;
        r.worst_observable = name;
      }
    }
  }
  r.stationary = all_stationary && !r.diverged;
  return r;
}

StabilityReport stability_monitor(const Trajectory& traj, std::size_t window, double tol, double ceiling) {
  std::vector<std::pair<std::string, std::vector<double>>> s;
  for (const char* n : {"n_transmon", "n_mr1", "n_mr2"}) s.emplace_back(n, traj.series(n));
  return stability_monitor(s, window, tol, ceiling);
}

}  // namespace mechent
