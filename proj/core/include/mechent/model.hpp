#pragma once

#include <string>
#include <vector>

#include "mechent/operator_algebra.hpp"
#include "mechent/params.hpp"

namespace mechent {

/// Reference frame of the full-model Hamiltonian. `rotating` rotates at omega_t.
enum class Frame { rotating, lab };

const char* to_string(Frame f);
Frame frame_from_string(const std::string& s);

struct TransmonDerived {
  double omega_t;
  double lambda_anh;
  double zeta;
  bool transmon_regime;  // false when EJ/EC < 20
};

/// omega_t = EC (sqrt(8 zeta) - 1), lambda = EC / 2 with zeta = EJ / EC.
TransmonDerived derive_transmon(double ej, double ec);

/// g0j = sqrt(2 zeta) EC (C_Bj / C_Sigma) (x_zp,j / d0j).
double coupling_from_geometry(double ec, double zeta, double cap_ratio, double zp_ratio);

struct StaticHamiltonian {
  Operator op;
  Frame frame;
  FockLayout layout;
};

/// -lambda a^dag^2 a^2 + sum_j omega_j b_j^dag b_j + g0j a^dag a (b_j + b_j^dag),
/// plus omega_t a^dag a in the lab frame. Layout is transmon (x) MR1 (x) MR2.
StaticHamiltonian static_hamiltonian(const SystemParams& p, const FockLayout& layout,
                                     Frame frame = Frame::rotating);

/// E(t) = E1 exp(-i omegaL1 t) + E2 exp(+i omegaL2 t).
Complex drive_amplitude(double t, const SystemParams& p);

/// Coefficient multiplying the embedded a^dag in the given frame.
Complex drive_coefficient(double t, const SystemParams& p, Frame frame);

/// H(t) = H_static + c(t) a^dag + conj(c(t)) a with c from drive_coefficient.
Operator hamiltonian_at(double t, const SystemParams& p, const StaticHamiltonian& h0, Frame frame);

/// Lambda(t) = 2 sqrt(E1^2 + E2^2 + 2 E1 E2 cos(omega_D t)).
double lambda_envelope(double t, const SystemParams& p);
/// Analytic time derivative of lambda_envelope.
double lambda_envelope_rate(double t, const SystemParams& p);

struct DressedSnapshot {
  double t;
  double Lambda;
  double epsilon;
  double theta;
  double g1x, g2x;
  double G1, G2;
  double G12;
  double upsilon1, upsilon2;  // g_jx / |epsilon - omega_j|
};

/// Dressed two-level quantities and effective couplings at time t. Throws
/// SingularityError when |epsilon - omega_j| <= 10 g_jx (or exactly zero).
DressedSnapshot dressed_snapshot(double t, const SystemParams& p);

/// Shift/squeeze factor 2 eps g^2 / (eps^2 - omega^2).
double shift_factor(double epsilon, double gx, double omega);
/// Effective mechanical coupling g1x g2x eps (w1^2 - w2^2) / ((eps^2 - w1^2)(eps^2 - w2^2)).
double effective_coupling(double epsilon, double g1x, double g2x, double omega1, double omega2);

struct ValidityOptions {
  double threshold = 0.1;
  int samples = 4096;  // per drive period
};

struct ValidityReport {
  double max_upsilon1 = 0.0;
  double max_upsilon2 = 0.0;
  double max_slow_ratio1 = 0.0;  // |dg_jx/dt / g_jx| / |epsilon - omega_j|
  double max_slow_ratio2 = 0.0;
  double threshold = 0.1;
  bool passed = false;
};

/// Scans one drive period (a single instant for a constant envelope) for the
/// large-detuning ratio and the slow-drive ratio. Throws SingularityError if
/// epsilon(t) reaches a mechanical frequency within the period.
ValidityReport validity_check(const SystemParams& p, const ValidityOptions& opt = {});

/// Large-detuning and slow-drive ratios at a single instant.
ValidityReport validity_at(double t, const SystemParams& p, double threshold = 0.1);

/// Fully mechanical effective Hamiltonian in the frame rotating at omega1, omega2.
/// `mech` is the two-mode layout (MR1, MR2).
Operator effective_hamiltonian(double t, const SystemParams& p, const FockLayout& mech);

/// Dressed qubit (x) two-mode operators used by the transformation generator.
/// Basis of the qubit factor is (g, e); sigma_z = diag(1, -1), sigma_+ = |e><g|.
struct GeneratorTerms {
  Operator S;         // anti-Hermitian generator
  Operator dS_dt;     // analytic time derivative
  Operator h0;        // -(eps/2) sigma_z + sum omega_j n_j
  Operator h1;        // -sigma_x sum g_jx (b_j + b_j^dag)
  Operator residual;  // h1 + [h0, S] - i dS/dt
};

/// `layout` must be (2, d1, d2).
GeneratorTerms fn_generator(double t, const SystemParams& p, const FockLayout& layout);

struct CollapseTerm {
  std::string label;
  Operator op;
  double rate;
};

using CollapseSet = std::vector<CollapseTerm>;

/// Relaxation a (gamma_t), dephasing a^dag a (gamma_phi), and per resonator
/// b_j ((nbar_j + 1) gamma_j) and b_j^dag (nbar_j gamma_j).
CollapseSet collapse_operators(const SystemParams& p, const FockLayout& layout);

}  // namespace mechent
