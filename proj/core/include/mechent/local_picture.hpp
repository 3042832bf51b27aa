#pragma once

#include <deque>
#include <memory>

#include "mechent/lindblad.hpp"
#include "mechent/model.hpp"
#include "mechent/operator_algebra.hpp"
#include "mechent/params.hpp"

namespace mechent {

/// Propagator U(t) of i dU/dt = (h0 + c(t) a^dag + c(t)^* a) U, U(0) = 1, on a single
/// transmon. Fourth-order Magnus steps on a fixed grid anchored at t = 0, so U(t)
/// does not depend on the order of queries.
class TransmonPropagator {
 public:
  /// `substep` <= 0 picks 0.05 / (spectral scale of the Hamiltonian).
  TransmonPropagator(Operator h0, Coefficient drive, double drive_bound, double substep = 0.0);

  Operator at(double t) const;
  double substep() const noexcept { return delta_; }
  Operator hamiltonian(double t) const;

 private:
  Operator magnus_step(const Operator& u, double t, double h) const;
  const Operator& grid_point(long long k) const;

  Operator h0_, a_, ad_;
  Coefficient drive_;
  double delta_;
  mutable std::deque<Operator> cache_;  // U(k delta) for k in [first_, first_ + size)
  mutable long long first_ = 0;
};

/// Master equation of the full model integrated in the picture of the uncoupled
/// evolution U0(t) = U_T(t) (x) exp(-i omega1 n1 t) (x) exp(-i omega2 n2 t), where U_T
/// is the driven transmon propagator. In this picture only the transmon-resonator
/// coupling and the (conjugated) dissipators act, which removes the anharmonic
/// transmon time scale from the step-size control. Exact up to the accuracy of U_T.
class LocalPictureGenerator : public Generator {
 public:
  LocalPictureGenerator(const SystemParams& p, const FockLayout& layout, Frame frame = Frame::rotating,
                        double substep = 0.0);

  int dim() const noexcept override { return dim_; }
  Picture picture() const noexcept override { return Picture::local; }

  using Generator::apply;
  void apply(double t, const Operator& rho, Operator& drho) const override;

  Operator to_schrodinger(double t, const Operator& rho) const override;
  Operator from_schrodinger(double t, const Operator& rho) const override;

  const TransmonPropagator& propagator() const noexcept { return prop_; }

 private:
  void conjugate(double t, const Operator& in, Operator& out, bool forward) const;

  int dim_, d0_, block_;
  std::size_t stride_[2];
  double omega_[2], g0_[2];
  double gamma_t_, gamma_phi_;
  double rate_down_[2], rate_up_[2];
  Operator n_t_, a_t_, c_t_;            // transmon number, lowering, gamma_t n + gamma_phi n^2
  Eigen::VectorXd w_down_[2], w_up_[2];  // row weights of b_j and b_j^dag on the full space
  Eigen::VectorXd decay_diag_;           // mechanical part of sum rate A^dag A (full space)
  Eigen::VectorXd mech_energy_;          // omega1 m1 + omega2 m2 per full index
  TransmonPropagator prop_;

  mutable Operator y_, m_;
};

/// Generator of the full model in the requested frame and picture.
std::unique_ptr<Generator> make_generator(const SystemParams& p, const FockLayout& layout, Frame frame,
                                          Picture picture);

}  // namespace mechent
