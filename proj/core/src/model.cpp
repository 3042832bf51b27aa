#include "mechent/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mechent/errors.hpp"

namespace mechent {

namespace {

constexpr Complex I{0.0, 1.0};
constexpr double pole_margin = 10.0;

void require_full_layout(const FockLayout& layout, const char* what) {
  if (layout.slots() != 3) {
    throw LayoutError(std::string(what) + ": layout must be transmon (x) MR1 (x) MR2");
  }
}

void check_pole(double epsilon, double gx, double omega, int mode) {
  const double gap = std::abs(epsilon - omega);
  if (gap == 0.0 || gap <= pole_margin * std::abs(gx)) {
    std::ostringstream os;
    os << "dressed splitting epsilon = " << epsilon << " rad/s is within " << pole_margin
       << " g_" << mode << "x of omega_" << mode << " = " << omega << " rad/s";
    throw SingularityError(os.str());
  }
}

struct DressedRates {
  double lambda_rate;
  double epsilon_rate;
  double g1x_rate, g2x_rate;
};

DressedRates dressed_rates(double t, const SystemParams& p, const DressedSnapshot& s) {
  DressedRates r{};
  r.lambda_rate = lambda_envelope_rate(t, p);
  if (s.epsilon > 0.0) {
    r.epsilon_rate = s.Lambda * r.lambda_rate / s.epsilon;
    const double d2 = p.delta() * p.delta();
    const double k = r.lambda_rate * d2 / (s.epsilon * s.epsilon * s.epsilon);
    r.g1x_rate = p.g01 * k;
    r.g2x_rate = p.g02 * k;
  }
  return r;
}

}  // namespace

const char* to_string(Frame f) { return f == Frame::rotating ? "rotating" : "lab"; }

Frame frame_from_string(const std::string& s) {
  if (s == "rotating") return Frame::rotating;
  if (s == "lab") return Frame::lab;
  throw ParameterError("unknown frame '" + s + "' (expected rotating or lab)");
}

TransmonDerived derive_transmon(double ej, double ec) {
  if (!(ej > 0.0) || !(ec > 0.0)) throw ParameterError("derive_transmon: energies must be positive");
  const double zeta = ej / ec;
  return {ec * (std::sqrt(8.0 * zeta) - 1.0), 0.5 * ec, zeta, zeta >= 20.0};
}

double coupling_from_geometry(double ec, double zeta, double cap_ratio, double zp_ratio) {
  if (!(ec > 0.0) || !(zeta > 0.0) || !(cap_ratio > 0.0) || !(zp_ratio > 0.0)) {
    throw ParameterError("coupling_from_geometry: inputs must be positive");
  }
  return std::sqrt(2.0 * zeta) * ec * cap_ratio * zp_ratio;
}

StaticHamiltonian static_hamiltonian(const SystemParams& p, const FockLayout& layout, Frame frame) {
  require_full_layout(layout, "static_hamiltonian");
  const int dt = layout.dim(slot::transmon);
  const Operator a = annihilation(dt);
  const Operator ad = a.adjoint();
  const Operator nt = ad * a;

  Operator transmon = -p.lambda_anh * (ad * ad * a * a);
  if (frame == Frame::lab) transmon += p.omega_t * nt;

  const Operator nt_full = embed(nt, layout, slot::transmon);
  Operator h = embed(transmon, layout, slot::transmon);
  const std::pair<std::size_t, double> modes[] = {{slot::mr1, p.omega1}, {slot::mr2, p.omega2}};
  const double couplings[] = {p.g01, p.g02};
  for (int j = 0; j < 2; ++j) {
    const auto [s, omega] = modes[j];
    const int dm = layout.dim(s);
    const Operator b = annihilation(dm);
    h += embed(omega * number(dm), layout, s);
    h += couplings[j] * nt_full * embed(b + b.adjoint(), layout, s);
  }
  return {0.5 * (h + h.adjoint()), frame, layout};
}

Complex drive_amplitude(double t, const SystemParams& p) {
  return p.amp1 * std::exp(-I * (p.omegaL1 * t)) + p.amp2 * std::exp(I * (p.omegaL2 * t));
}

Complex drive_coefficient(double t, const SystemParams& p, Frame frame) {
  const Complex e = drive_amplitude(t, p);
  return frame == Frame::lab ? e * std::exp(-I * (p.omega_t * t)) : e;
}

Operator hamiltonian_at(double t, const SystemParams& p, const StaticHamiltonian& h0, Frame frame) {
  if (frame != h0.frame) {
    throw LayoutError(std::string("hamiltonian_at: static Hamiltonian was built in the ") + to_string(h0.frame) +
                      " frame, requested " + to_string(frame));
  }
  const Complex c = drive_coefficient(t, p, frame);
  const Operator ad = embed(creation(h0.layout.dim(slot::transmon)), h0.layout, slot::transmon);
  Operator h = h0.op;
  h += c * ad;
  h += std::conj(c) * ad.adjoint();
  return h;
}

double lambda_envelope(double t, const SystemParams& p) {
  const double q = p.amp1 * p.amp1 + p.amp2 * p.amp2 + 2.0 * p.amp1 * p.amp2 * std::cos(p.omega_drive() * t);
  return 2.0 * std::sqrt(std::max(0.0, q));
}

double lambda_envelope_rate(double t, const SystemParams& p) {
  const double wd = p.omega_drive();
  const double q = p.amp1 * p.amp1 + p.amp2 * p.amp2 + 2.0 * p.amp1 * p.amp2 * std::cos(wd * t);
  if (q <= 0.0) return 0.0;
  return -2.0 * p.amp1 * p.amp2 * wd * std::sin(wd * t) / std::sqrt(q);
}

double shift_factor(double epsilon, double gx, double omega) {
  return 2.0 * epsilon * gx * gx / (epsilon * epsilon - omega * omega);
}

double effective_coupling(double epsilon, double g1x, double g2x, double omega1, double omega2) {
  const double e2 = epsilon * epsilon;
  return g1x * g2x * epsilon * (omega1 * omega1 - omega2 * omega2) /
         ((e2 - omega1 * omega1) * (e2 - omega2 * omega2));
}

DressedSnapshot dressed_snapshot(double t, const SystemParams& p) {
  DressedSnapshot s{};
  s.t = t;
  const double delta = p.delta();
  s.Lambda = lambda_envelope(t, p);
  s.epsilon = std::hypot(delta, s.Lambda);
  if (delta != 0.0) {
    s.theta = 0.5 * std::atan(s.Lambda / delta);
  } else {
    s.theta = s.Lambda > 0.0 ? 0.25 * std::numbers::pi : 0.0;
  }
  if (s.epsilon > 0.0) {
    s.g1x = p.g01 * s.Lambda / s.epsilon;
    s.g2x = p.g02 * s.Lambda / s.epsilon;
  }
  check_pole(s.epsilon, s.g1x, p.omega1, 1);
  check_pole(s.epsilon, s.g2x, p.omega2, 2);
  s.G1 = shift_factor(s.epsilon, s.g1x, p.omega1);
  s.G2 = shift_factor(s.epsilon, s.g2x, p.omega2);
  s.G12 = effective_coupling(s.epsilon, s.g1x, s.g2x, p.omega1, p.omega2);
  s.upsilon1 = std::abs(s.g1x) / std::abs(s.epsilon - p.omega1);
  s.upsilon2 = std::abs(s.g2x) / std::abs(s.epsilon - p.omega2);
  return s;
}

ValidityReport validity_at(double t, const SystemParams& p, double threshold) {
  const DressedSnapshot s = dressed_snapshot(t, p);
  const DressedRates r = dressed_rates(t, p, s);
  ValidityReport rep;
  rep.threshold = threshold;
  rep.max_upsilon1 = s.upsilon1;
  rep.max_upsilon2 = s.upsilon2;
  if (s.g1x != 0.0) rep.max_slow_ratio1 = std::abs(r.g1x_rate / s.g1x) / std::abs(s.epsilon - p.omega1);
  if (s.g2x != 0.0) rep.max_slow_ratio2 = std::abs(r.g2x_rate / s.g2x) / std::abs(s.epsilon - p.omega2);
  rep.passed = std::max({rep.max_upsilon1, rep.max_upsilon2, rep.max_slow_ratio1, rep.max_slow_ratio2}) <= threshold;
  return rep;
}

ValidityReport validity_check(const SystemParams& p, const ValidityOptions& opt) {
  const bool modulated = p.amp1 != 0.0 && p.amp2 != 0.0 && p.omega_drive() != 0.0;
  if (!modulated) return validity_at(0.0, p, opt.threshold);

  const int n = std::max(opt.samples, 8);
  const double period = two_pi / std::abs(p.omega_drive());
  ValidityReport rep;
  rep.threshold = opt.threshold;
  double prev1 = 0.0, prev2 = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = period * k / n;
    // A sign change of epsilon - omega_j between samples means the pole was crossed.
    const double eps = std::hypot(p.delta(), lambda_envelope(t, p));
    const double d1 = eps - p.omega1, d2 = eps - p.omega2;
    if (k > 0 && (d1 * prev1 <= 0.0 || d2 * prev2 <= 0.0)) {
      std::ostringstream os;
      os << "validity_check: epsilon(t) crosses a mechanical frequency near t = " << t << " s";
      throw SingularityError(os.str());
    }
    prev1 = d1;
    prev2 = d2;
    const ValidityReport at = validity_at(t, p, opt.threshold);
    rep.max_upsilon1 = std::max(rep.max_upsilon1, at.max_upsilon1);
    rep.max_upsilon2 = std::max(rep.max_upsilon2, at.max_upsilon2);
    rep.max_slow_ratio1 = std::max(rep.max_slow_ratio1, at.max_slow_ratio1);
    rep.max_slow_ratio2 = std::max(rep.max_slow_ratio2, at.max_slow_ratio2);
  }
  rep.passed =
      std::max({rep.max_upsilon1, rep.max_upsilon2, rep.max_slow_ratio1, rep.max_slow_ratio2}) <= opt.threshold;
  return rep;
}

Operator effective_hamiltonian(double t, const SystemParams& p, const FockLayout& mech) {
  if (mech.slots() != 2) throw LayoutError("effective_hamiltonian: layout must be MR1 (x) MR2");
  const DressedSnapshot s = dressed_snapshot(t, p);
  const Operator b1 = embed(annihilation(mech.dim(0)), mech, 0);
  const Operator b2 = embed(annihilation(mech.dim(1)), mech, 1);
  const Operator n1 = b1.adjoint() * b1;
  const Operator n2 = b2.adjoint() * b2;

  Operator h = -s.G1 * n1 + s.G2 * n2;

  Operator squeeze = s.G1 * std::exp(-I * (2.0 * p.omega1 * t)) * (b1 * b1) -
                     s.G2 * std::exp(-I * (2.0 * p.omega2 * t)) * (b2 * b2);
  h -= 0.5 * (squeeze + squeeze.adjoint());

  Operator pair = std::exp(-I * ((p.omega1 + p.omega2) * t)) * (b1 * b2) +
                  std::exp(I * ((p.omega1 - p.omega2) * t)) * (b1.adjoint() * b2);
  h -= s.G12 * (pair + pair.adjoint());
  return h;
}

GeneratorTerms fn_generator(double t, const SystemParams& p, const FockLayout& layout) {
  if (layout.slots() != 3 || layout.dim(0) != 2) {
    throw LayoutError("fn_generator: layout must be qubit(2) (x) MR1 (x) MR2");
  }
  const DressedSnapshot s = dressed_snapshot(t, p);
  const DressedRates r = dressed_rates(t, p, s);

  Operator sz = Operator::Zero(2, 2);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  Operator sp = Operator::Zero(2, 2);
  sp(1, 0) = 1.0;  // |e><g|
  const Operator sm = sp.adjoint();

  const Operator SZ = embed(sz, layout, 0);
  const Operator SP = embed(sp, layout, 0);
  const Operator SM = embed(sm, layout, 0);

  GeneratorTerms out;
  const Eigen::Index d = layout.total();
  out.S = Operator::Zero(d, d);
  out.dS_dt = Operator::Zero(d, d);
  out.h0 = -0.5 * s.epsilon * SZ;
  out.h1 = Operator::Zero(d, d);

  const double omegas[] = {p.omega1, p.omega2};
  const double gx[] = {s.g1x, s.g2x};
  const double gx_rate[] = {r.g1x_rate, r.g2x_rate};
  for (int j = 0; j < 2; ++j) {
    const std::size_t sl = static_cast<std::size_t>(j + 1);
    const Operator b = embed(annihilation(layout.dim(sl)), layout, sl);
    const Operator bd = b.adjoint();
    out.h0 += omegas[j] * (bd * b);
    out.h1 -= gx[j] * (SP + SM) * (b + bd);

    const double sum = s.epsilon + omegas[j];
    const double diff = s.epsilon - omegas[j];
    const Operator counter = bd * SP - b * SM;  // over (eps + omega_j)
    const Operator rotating = b * SP - bd * SM;  // over (eps - omega_j)
    out.S += gx[j] * (counter / sum + rotating / diff);

    const double c1_rate = gx_rate[j] / sum - gx[j] * r.epsilon_rate / (sum * sum);
    const double c2_rate = gx_rate[j] / diff - gx[j] * r.epsilon_rate / (diff * diff);
    out.dS_dt += c1_rate * counter + c2_rate * rotating;
  }
  out.residual = out.h1 + (out.h0 * out.S - out.S * out.h0) - I * out.dS_dt;
  return out;
}

CollapseSet collapse_operators(const SystemParams& p, const FockLayout& layout) {
  require_full_layout(layout, "collapse_operators");
  const double rates[] = {p.gamma_t, p.gamma_phi, p.gamma1, p.gamma2, p.nbar1, p.nbar2};
  for (double r : rates) {
    if (r < 0.0) throw ParameterError("collapse_operators: negative rate or occupation");
  }
  const Operator a = embed(annihilation(layout.dim(slot::transmon)), layout, slot::transmon);
  const Operator b1 = embed(annihilation(layout.dim(slot::mr1)), layout, slot::mr1);
  const Operator b2 = embed(annihilation(layout.dim(slot::mr2)), layout, slot::mr2);
  CollapseSet set;
  set.push_back({"transmon_relaxation", a, p.gamma_t});
  set.push_back({"transmon_dephasing", a.adjoint() * a, p.gamma_phi});
  set.push_back({"mr1_damping", b1, (p.nbar1 + 1.0) * p.gamma1});
  set.push_back({"mr1_heating", b1.adjoint(), p.nbar1 * p.gamma1});
  set.push_back({"mr2_damping", b2, (p.nbar2 + 1.0) * p.gamma2});
  set.push_back({"mr2_heating", b2.adjoint(), p.nbar2 * p.gamma2});
  return set;
}

}  // namespace mechent
