#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mechent/errors.hpp"
#include "mechent/lindblad.hpp"
#include "mechent/measures.hpp"
#include "mechent/operator_algebra.hpp"

namespace mechent {

enum class Method { dopri5, rk4 };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct HealthThresholds {
  double trace = 1e-7;
  double min_eig = -1e-7;
  double top_level = 1e-3;  // flagged, not fatal
};

/// Time stepping and sampling. Samples sit on the grid k * tau / sample_stride,
/// anchored at t = 0, up to t_end. `rk4` takes fixed steps of dt_max.
struct IntegratorConfig {
  Method method = Method::dopri5;
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_init = 1e-12;
  double dt_max = 5e-11;
  double t_end = 0.0;
  int sample_stride = 4;  // samples per tau
  double tau = 0.0;       // 2 pi / (omega1 + omega2), seconds
  HealthThresholds health;

  void validate() const;
  double sample_interval() const { return tau / sample_stride; }
};

struct HealthReport {
  double trace_err = 0.0;
  double herm_err = 0.0;
  double min_eig = 0.0;
  double top_level_pop = 0.0;  // largest highest-level population over subsystems
  bool top_level_flag = false;
};

struct Observable {
  std::string name;
  Operator op;
};

struct SampleRecord {
  double t = 0.0;
  std::vector<double> expectations;
  std::optional<MeasureRecord> measures;
  HealthReport health;
};

struct Trajectory {
  std::vector<std::string> observable_names;
  std::vector<SampleRecord> samples;
  std::vector<std::pair<double, Operator>> snapshots;  // Schrodinger-picture states at checkpoints
  double tau = 0.0;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  std::size_t rhs_evaluations = 0;

  /// Index of a named observable, or throws.
  std::size_t observable_index(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
  std::vector<double> times() const;
};

struct Observers {
  std::vector<Observable> observables;
  /// Slots of the bipartition measured for E_N and delta12 (empty: skip).
  std::vector<std::size_t> bipartition;
  MeasureOptions measure_options;
  /// Called with the Schrodinger-picture state every `checkpoint_every` samples and at the end.
  std::function<void(double, const Operator&)> on_checkpoint;
  int checkpoint_every = 0;
  bool keep_snapshots = false;
};

/// Number operators of every slot named n_transmon, n_mr1, n_mr2 (full layout)
/// and the (MR1, MR2) bipartition.
Observers default_observers(const FockLayout& layout);

/// Raised when integration stops early; carries everything sampled so far.
class IntegrationError : public HealthError {
 public:
  IntegrationError(const std::string& what, Trajectory partial, double t_fail)
      : HealthError(what), partial_(std::move(partial)), t_fail_(t_fail) {}
  const Trajectory& partial() const noexcept { return partial_; }
  double failure_time() const noexcept { return t_fail_; }

 private:
  Trajectory partial_;
  double t_fail_;
};

HealthReport health_report(const Operator& rho, const FockLayout& layout, const HealthThresholds& th = {});

/// Integrates the master equation from (t0, rho0) to config.t_end. `rho0` is given
/// in the Schrodinger picture of the model frame. Throws IntegrationError on step
/// underflow, non-finite entries, or a trace/positivity violation at any sample.
Trajectory integrate(const DensityMatrix& rho0, const IntegratorConfig& config, const Generator& generator,
                     const FockLayout& layout, const Observers& observers, double t0 = 0.0);

/// Propagates without sampling; returns the Schrodinger-picture state at t1.
Operator propagate(const Operator& rho0, double t0, double t1, const IntegratorConfig& config,
                   const Generator& generator);

struct StabilityReport {
  bool stationary = false;
  bool diverged = false;
  double max_drift = 0.0;  // relative change between the last two window means
  std::string worst_observable;
};

/// Quasi-stationarity test over n_transmon, n_mr1, n_mr2: stationary when the
/// relative change between the means of the last two windows is below `tol` for
/// all three; diverged when any value exceeds `ceiling` or the last three window
/// means grow with increasing increments. Throws ParameterError with fewer than
/// 2 x window samples.
StabilityReport stability_monitor(const Trajectory& traj, std::size_t window, double tol, double ceiling = 1e3);

/// Same test over arbitrary named series.
StabilityReport stability_monitor(const std::vector<std::pair<std::string, std::vector<double>>>& series,
                                  std::size_t window, double tol, double ceiling = 1e3);

}  // namespace mechent
