#include "mechent/local_picture.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mechent/errors.hpp"

namespace mechent {

namespace {

constexpr Complex I{0.0, 1.0};
constexpr std::size_t max_cached = 4096;

}  // namespace

TransmonPropagator::TransmonPropagator(Operator h0, Coefficient drive, double drive_bound, double substep)
    : h0_(std::move(h0)), drive_(std::move(drive)) {
  const int d = static_cast<int>(h0_.rows());
  if (d < 2 || h0_.cols() != d) throw DimensionError("TransmonPropagator: h0 must be square with dim >= 2");
  a_ = annihilation(d);
  ad_ = a_.adjoint();
  if (substep > 0.0) {
    delta_ = substep;
  } else {
    const Eigen::VectorXd ev = hermitian_eigenvalues(h0_);
    const double scale = (ev.maxCoeff() - ev.minCoeff()) + 2.0 * std::sqrt(d - 1.0) * std::abs(drive_bound);
    if (!(scale > 0.0)) throw ParameterError("TransmonPropagator: Hamiltonian has no energy scale; give a substep");
    delta_ = 0.05 / scale;
  }
  cache_.push_back(identity(d));
}

Operator TransmonPropagator::hamiltonian(double t) const {
  const Complex c = drive_ ? drive_(t) : Complex(0.0);
  return h0_ + c * ad_ + std::conj(c) * a_;
}

Operator TransmonPropagator::magnus_step(const Operator& u, double t, double h) const {
  // Two-point Gauss-Legendre Magnus integrator of order four.
  const double r = std::sqrt(3.0) / 6.0;
  const Operator h1 = hamiltonian(t + (0.5 - r) * h);
  const Operator h2 = hamiltonian(t + (0.5 + r) * h);
  const Operator comm = h1 * h2 - h2 * h1;
  Operator g = (0.5 * h) * (h1 + h2) + I * (std::sqrt(3.0) / 12.0 * h * h) * comm;
  g = 0.5 * (g + g.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Operator> es(g);
  const Eigen::VectorXcd ph = (-I * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * u;
}

const Operator& TransmonPropagator::grid_point(long long k) const {
  if (k < first_) {
    cache_.clear();
    cache_.push_back(identity(static_cast<int>(h0_.rows())));
    first_ = 0;
  }
  while (first_ + static_cast<long long>(cache_.size()) - 1 < k) {
    const long long last = first_ + static_cast<long long>(cache_.size()) - 1;
    cache_.push_back(magnus_step(cache_.back(), static_cast<double>(last) * delta_, delta_));
    if (cache_.size() > max_cached) {
      cache_.pop_front();
      ++first_;
    }
  }
  return cache_[static_cast<std::size_t>(k - first_)];
}

Operator TransmonPropagator::at(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("TransmonPropagator: time must be finite and >= 0");
  const long long k = static_cast<long long>(std::floor(t / delta_));
  const double rest = t - static_cast<double>(k) * delta_;
  const Operator& u = grid_point(k);
  if (rest <= 0.0) return u;
  return magnus_step(u, static_cast<double>(k) * delta_, rest);
}

LocalPictureGenerator::LocalPictureGenerator(const SystemParams& p, const FockLayout& layout, Frame frame,
                                             double substep)
    : dim_(layout.total()),
      d0_(layout.slots() == 3 ? layout.dim(slot::transmon) : 0),
      block_(layout.slots() == 3 ? layout.dim(slot::mr1) * layout.dim(slot::mr2) : 0),
      prop_(
          [&] {
            if (layout.slots() != 3) throw LayoutError("LocalPictureGenerator: layout must be transmon (x) MR1 (x) MR2");
            p.validate();
            const Operator a = annihilation(layout.dim(slot::transmon));
            Operator h0 = -p.lambda_anh * (a.adjoint() * a.adjoint() * a * a);
            if (frame == Frame::lab) h0 += p.omega_t * (a.adjoint() * a);
            return h0;
          }(),
          [p, frame](double t) { return drive_coefficient(t, p, frame); }, std::abs(p.amp1) + std::abs(p.amp2),
          substep) {
  const int d1 = layout.dim(slot::mr1), d2 = layout.dim(slot::mr2);
  stride_[0] = static_cast<std::size_t>(d2);
  stride_[1] = 1;
  omega_[0] = p.omega1;
  omega_[1] = p.omega2;
  g0_[0] = p.g01;
  g0_[1] = p.g02;
  gamma_t_ = p.gamma_t;
  gamma_phi_ = p.gamma_phi;
  rate_down_[0] = (p.nbar1 + 1.0) * p.gamma1;
  rate_up_[0] = p.nbar1 * p.gamma1;
  rate_down_[1] = (p.nbar2 + 1.0) * p.gamma2;
  rate_up_[1] = p.nbar2 * p.gamma2;

  a_t_ = annihilation(d0_);
  n_t_ = number(d0_);
  c_t_ = gamma_t_ * n_t_ + gamma_phi_ * (n_t_ * n_t_);

  const int dims[2] = {d1, d2};
  mech_energy_.resize(dim_);
  decay_diag_.setZero(dim_);
  for (int j = 0; j < 2; ++j) {
    w_down_[j].setZero(dim_);
    w_up_[j].setZero(dim_);
  }
  for (int i = 0; i < dim_; ++i) {
    const int m = i % block_;
    const int mj[2] = {m / d2, m % d2};
    mech_energy_(i) = omega_[0] * mj[0] + omega_[1] * mj[1];
    for (int j = 0; j < 2; ++j) {
      if (mj[j] < dims[j] - 1) w_down_[j](i) = std::sqrt(mj[j] + 1.0);
      w_up_[j](i) = std::sqrt(static_cast<double>(mj[j]));
      decay_diag_(i) += rate_down_[j] * mj[j] + rate_up_[j] * w_down_[j](i) * w_down_[j](i);
    }
  }
  y_.resize(dim_, dim_);
  m_.resize(dim_, dim_);
}

void LocalPictureGenerator::apply(double t, const Operator& rho, Operator& drho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) throw DimensionError("LocalPictureGenerator: state dimension mismatch");
  ++evaluations_;
  const Operator u = prop_.at(t);
  const Operator nt = u.adjoint() * n_t_ * u;
  const Operator at = u.adjoint() * a_t_ * u;
  const Operator ct = u.adjoint() * c_t_ * u;
  const Eigen::Index d = dim_, B = block_;

  // y = (1 (x) K) rho with K = sum_j g0j (b_j e^{-i w_j t} + h.c.).
  y_.setZero();
  for (int j = 0; j < 2; ++j) {
    const Eigen::Index s = static_cast<Eigen::Index>(stride_[j]), n = d - s;
    const Complex ph = std::polar(1.0, -omega_[j] * t);
    const Eigen::VectorXcd wd = (g0_[j] * ph) * w_down_[j].head(n).cast<Complex>();
    const Eigen::VectorXcd wu = (g0_[j] * std::conj(ph)) * w_up_[j].tail(n).cast<Complex>();
    y_.topRows(n).noalias() += wd.asDiagonal() * rho.bottomRows(n);
    y_.bottomRows(n).noalias() += wu.asDiagonal() * rho.topRows(n);
  }

  // m = -i H_eff rho with H_eff = N(t) (x) K - (i/2)(C(t) (x) 1 + 1 (x) mechanical decay).
  for (Eigen::Index a = 0; a < d0_; ++a) {
    auto row = m_.middleRows(a * B, B);
    row.setZero();
    for (Eigen::Index c = 0; c < d0_; ++c) {
      row.noalias() += (-I * nt(a, c)) * y_.middleRows(c * B, B);
      row.noalias() += (-0.5 * ct(a, c)) * rho.middleRows(c * B, B);
    }
  }
  m_.noalias() -= 0.5 * (decay_diag_.asDiagonal() * rho);

  // Transmon jumps J = sum_k r_k T_k rho T_k^dag. J is Hermitian and m is symmetrized
  // below, so only blocks a <= b are needed: weight 1 above the diagonal, 1/2 on it.
  for (Eigen::Index a = 0; a < d0_; ++a) {
    for (Eigen::Index b = a; b < d0_; ++b) {
      auto blk = m_.block(a * B, b * B, B, B);
      const double w = a == b ? 0.5 : 1.0;
      for (Eigen::Index c = 0; c < d0_; ++c) {
        for (Eigen::Index e = 0; e < d0_; ++e) {
          const Complex s =
              gamma_t_ * at(a, c) * std::conj(at(b, e)) + gamma_phi_ * nt(a, c) * std::conj(nt(b, e));
          if (s == 0.0) continue;
          blk.noalias() += (w * s) * rho.block(c * B, e * B, B, B);
        }
      }
    }
  }

  // Mechanical jumps; phases cancel in b rho b^dag.
  for (int j = 0; j < 2; ++j) {
    const Eigen::Index s = static_cast<Eigen::Index>(stride_[j]), n = d - s;
    if (rate_down_[j] > 0.0) {
      const auto w = w_down_[j].head(n).asDiagonal();
      m_.topLeftCorner(n, n).noalias() += (0.5 * rate_down_[j]) * (w * rho.bottomRightCorner(n, n) * w);
    }
    if (rate_up_[j] > 0.0) {
      const auto w = w_up_[j].tail(n).asDiagonal();
      m_.bottomRightCorner(n, n).noalias() += (0.5 * rate_up_[j]) * (w * rho.topLeftCorner(n, n) * w);
    }
  }

  drho = m_ + m_.adjoint();
}

void LocalPictureGenerator::conjugate(double t, const Operator& in, Operator& out, bool forward) const {
  // forward: out = U0 in U0^dag; otherwise out = U0^dag in U0.
  if (in.rows() != dim_ || in.cols() != dim_) throw DimensionError("LocalPictureGenerator: state dimension mismatch");
  const Eigen::Index B = block_;
  const Operator u0 = prop_.at(t);
  const Operator u = forward ? u0 : Operator(u0.adjoint());
  const double sign = forward ? -1.0 : 1.0;

  Eigen::VectorXcd ph(dim_);
  for (int i = 0; i < dim_; ++i) ph(i) = std::polar(1.0, sign * mech_energy_(i) * t);
  const Operator x = ph.asDiagonal() * in * ph.conjugate().asDiagonal();

  Operator z = Operator::Zero(dim_, dim_);
  for (Eigen::Index a = 0; a < d0_; ++a) {
    for (Eigen::Index c = 0; c < d0_; ++c) z.middleRows(a * B, B) += u(a, c) * x.middleRows(c * B, B);
  }
  out.setZero(dim_, dim_);
  for (Eigen::Index b = 0; b < d0_; ++b) {
    for (Eigen::Index e = 0; e < d0_; ++e) out.middleCols(b * B, B) += std::conj(u(b, e)) * z.middleCols(e * B, B);
  }
}

Operator LocalPictureGenerator::to_schrodinger(double t, const Operator& rho) const {
  Operator out;
  conjugate(t, rho, out, true);
  return out;
}

Operator LocalPictureGenerator::from_schrodinger(double t, const Operator& rho) const {
  Operator out;
  conjugate(t, rho, out, false);
  return out;
}

std::unique_ptr<Generator> make_generator(const SystemParams& p, const FockLayout& layout, Frame frame,
                                          Picture picture) {
  if (picture == Picture::local) return std::make_unique<LocalPictureGenerator>(p, layout, frame);
  return std::make_unique<LindbladGenerator>(full_model(p, layout, frame), picture);
}

}  // namespace mechent
