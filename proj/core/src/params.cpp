#include "mechent/params.hpp"

#include <cmath>
#include <sstream>

#include "mechent/errors.hpp"

namespace mechent {

namespace {

constexpr double reference_quality = 2e5;

}  // namespace

double SystemParams::tau() const {
  const double s = omega1 + omega2;
  if (!(s > 0.0)) throw ParameterError("tau: omega1 + omega2 must be positive");
  return two_pi / s;
}

void SystemParams::validate() const {
  for (const ParamField& f : param_schema()) {
    const double v = this->*f.member;
    if (!std::isfinite(v)) throw ParameterError("parameter " + f.key + " is not finite");
  }
  const std::pair<const char*, double> nonneg[] = {
      {"gamma_t", gamma_t}, {"gamma_phi", gamma_phi}, {"gamma1", gamma1}, {"gamma2", gamma2},
      {"nbar1", nbar1},     {"nbar2", nbar2},         {"amp1", amp1},     {"amp2", amp2},
      {"lambda_anh", lambda_anh}};
  for (const auto& [name, v] : nonneg) {
    if (v < 0.0) {
      std::ostringstream os;
      os << "parameter " << name << " must be >= 0 (got " << v << ")";
      throw ParameterError(os.str());
    }
  }
  if (!(omega1 > 0.0) || !(omega2 > 0.0)) throw ParameterError("mechanical frequencies must be positive");
}

SystemParams SystemParams::reference_defaults() {
  SystemParams p;
  for (const ParamField& f : param_schema()) p.*f.member = f.angular ? two_pi * f.default_value : f.default_value;
  return p;
}

double damping_from_quality(double omega, double quality) {
  if (!(quality > 0.0)) throw ParameterError("quality factor must be positive");
  return omega / quality;
}

void apply_coupling_asymmetry(SystemParams& p, double g0, double delta_g) {
  p.g01 = g0 + 0.5 * delta_g;
  p.g02 = g0 - 0.5 * delta_g;
}

void apply_drive_detuning(SystemParams& p, double detuning) {
  p.omegaL1 = p.omega1 + 0.5 * detuning;
  p.omegaL2 = p.omega2 + 0.5 * detuning;
}

const std::vector<ParamField>& param_schema() {
  static const std::vector<ParamField> schema = {
      {"omega_t_hz", "Hz", "transmon 0-1 transition frequency", 17e9, &SystemParams::omega_t, true},
      {"lambda_hz", "Hz", "transmon anharmonicity", 0.25e9, &SystemParams::lambda_anh, true},
      {"omega1_hz", "Hz", "MR1 frequency", 10e6, &SystemParams::omega1, true},
      {"omega2_hz", "Hz", "MR2 frequency", 9.95e6, &SystemParams::omega2, true},
      {"g01_hz", "Hz", "transmon-MR1 coupling", 325.6e3, &SystemParams::g01, true},
      {"g02_hz", "Hz", "transmon-MR2 coupling", 325.6e3, &SystemParams::g02, true},
      {"gamma_t_hz", "Hz", "transmon relaxation rate", 4.5e3, &SystemParams::gamma_t, true},
      {"gamma_phi_hz", "Hz", "transmon pure dephasing rate", 9e3, &SystemParams::gamma_phi, true},
      {"gamma1_hz", "Hz", "MR1 damping rate", 10e6 / reference_quality, &SystemParams::gamma1, true},
      {"gamma2_hz", "Hz", "MR2 damping rate", 9.95e6 / reference_quality, &SystemParams::gamma2, true},
      {"nbar1", "1", "MR1 bath occupation", 0.2, &SystemParams::nbar1, false},
      {"nbar2", "1", "MR2 bath occupation", 0.2, &SystemParams::nbar2, false},
      {"amp1_hz", "Hz", "drive amplitude of tone 1", 8e6, &SystemParams::amp1, true},
      {"amp2_hz", "Hz", "drive amplitude of tone 2", 8e6, &SystemParams::amp2, true},
      {"omegaL1_hz", "Hz", "drive tone 1 frequency (rotating frame)", 10e6, &SystemParams::omegaL1, true},
      {"omegaL2_hz", "Hz", "drive tone 2 frequency (rotating frame)", 9.95e6, &SystemParams::omegaL2, true},
  };
  return schema;
}

}  // namespace mechent
