#pragma once

#include <numbers>
#include <string>
#include <vector>

namespace mechent {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Physical parameters of the driven transmon + two-resonator device.
/// Every frequency and rate is angular (rad/s); occupations are dimensionless.
struct SystemParams {
  double omega_t = 0.0;     // transmon 0-1 transition
  double lambda_anh = 0.0;  // Duffing anharmonicity (the -lambda a^dag^2 a^2 term)
  double omega1 = 0.0;
  double omega2 = 0.0;
  double g01 = 0.0;
  double g02 = 0.0;
  double gamma_t = 0.0;    // transmon relaxation
  double gamma_phi = 0.0;  // transmon pure dephasing
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double nbar1 = 0.0;
  double nbar2 = 0.0;
  double amp1 = 0.0;  // real drive amplitudes
  double amp2 = 0.0;
  double omegaL1 = 0.0;
  double omegaL2 = 0.0;

  /// Mechanical detuning omega1 - omega2.
  double delta() const noexcept { return omega1 - omega2; }
  /// Drive modulation frequency omegaL1 + omegaL2.
  double omega_drive() const noexcept { return omegaL1 + omegaL2; }
  /// Period of the two-mode squeezing process, 2 pi / (omega1 + omega2).
  double tau() const;

  /// Throws ParameterError for negative rates, occupations or amplitudes and non-finite values.
  void validate() const;

  /// Operating point used throughout the numerical experiments: omega1/2pi = 10 MHz,
  /// omega2/2pi = 9.95 MHz, Q = 2e5, n_th = 0.2, omega_t/2pi = 17 GHz,
  /// lambda/2pi = 0.25 GHz, gamma_t/2pi = 4.5 kHz, gamma_phi = 2 gamma_t,
  /// drive amplitudes 2pi x 8 MHz, g0j/2pi = 325.6 kHz, resonant drive tones.
  static SystemParams reference_defaults();
};

/// Mechanical damping from a quality factor, gamma = omega / Q.
double damping_from_quality(double omega, double quality);

/// Applies a coupling asymmetry symmetrically about the mean coupling g0:
/// g01 = g0 + dg/2, g02 = g0 - dg/2.
void apply_coupling_asymmetry(SystemParams& p, double g0, double delta_g);

/// Shifts both drive tones so that omegaL1 + omegaL2 = omega1 + omega2 + detuning.
void apply_drive_detuning(SystemParams& p, double detuning);

/// One entry of the versioned parameter schema.
struct ParamField {
  std::string key;          // configuration key (frequency keys carry the _hz suffix)
  std::string unit;         // "Hz" (converted to rad/s) or "1"
  std::string description;
  double default_value;     // in the configuration unit
  double SystemParams::*member;
  bool angular;             // multiply by 2 pi when loading
};

inline constexpr int param_schema_version = 1;
const std::vector<ParamField>& param_schema();

}  // namespace mechent
