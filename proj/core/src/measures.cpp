#include "mechent/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mechent/errors.hpp"

namespace mechent {

namespace {

void require_dims(const DensityMatrix& rho12, ModeDims dims, const char* what) {
  if (dims.first < 2 || dims.second < 2 || rho12.dim() != dims.first * dims.second) {
    std::ostringstream os;
    os << what << ": state of dimension " << rho12.dim() << " does not factor as " << dims.first << " x "
       << dims.second;
    throw DimensionError(os.str());
  }
}

double h_entropy(double x) {
  const double up = 0.5 * (x + 1.0);
  const double dn = 0.5 * (x - 1.0);
  double v = up * std::log(up);
  if (dn > 0.0) v -= dn * std::log(dn);
  return v;
}

}  // namespace

CovarianceMatrix covariance_matrix(const DensityMatrix& rho12, ModeDims dims) {
  require_dims(rho12, dims, "covariance_matrix");
  const FockLayout mech{dims.first, dims.second};
  const Operator b[2] = {embed(annihilation(dims.first), mech, 0), embed(annihilation(dims.second), mech, 1)};

  Complex m[2], n[2][2], mm[2][2];
  for (int i = 0; i < 2; ++i) {
    m[i] = expectation(b[i], rho12);
    for (int j = 0; j < 2; ++j) {
      n[i][j] = expectation(b[i].adjoint() * b[j], rho12);  // <b_i^dag b_j>
      mm[i][j] = expectation(b[i] * b[j], rho12);          // <b_i b_j>
    }
  }

  CovarianceMatrix cm;
  cm.first_moments << m[0], m[1], std::conj(m[0]), std::conj(m[1]);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double kd = i == j ? 1.0 : 0.0;
      cm.sigma(i, j) = 2.0 * n[j][i] + kd - 2.0 * m[i] * std::conj(m[j]);
      cm.sigma(i, j + 2) = 2.0 * mm[i][j] - 2.0 * m[i] * m[j];
      cm.sigma(i + 2, j) = 2.0 * std::conj(mm[j][i]) - 2.0 * std::conj(m[i]) * std::conj(m[j]);
      cm.sigma(i + 2, j + 2) = 2.0 * n[i][j] + kd - 2.0 * std::conj(m[i]) * m[j];
    }
  }
  cm.sigma = 0.5 * (cm.sigma + cm.sigma.adjoint()).eval();
  return cm;
}

SymplecticSpectrum symplectic_eigenvalues(const CovarianceMatrix& cm, const MeasureOptions& opt) {
  // i Omega = diag(1, 1, -1, -1) for Omega = diag(-i, -i, i, i).
  Eigen::Matrix4cd k = cm.sigma;
  k.bottomRows<2>() *= -1.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(k, false);
  if (es.info() != Eigen::Success) throw Error("symplectic_eigenvalues: eigensolver failed");
  std::array<Complex, 4> ev;
  for (int i = 0; i < 4; ++i) ev[i] = es.eigenvalues()(i);
  std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return a.real() < b.real(); });

  const double pair_err = std::max(std::abs(ev[0] + ev[3]), std::abs(ev[1] + ev[2]));
  double imag_err = 0.0;
  for (const Complex& e : ev) imag_err = std::max(imag_err, std::abs(e.imag()));
  const double scale = std::max(1.0, std::abs(ev[3]));
  if (pair_err > opt.pairing_tol * scale || imag_err > opt.pairing_tol * scale) {
    std::ostringstream os;
    os << "symplectic_eigenvalues: spectrum of i Omega sigma is not of the form {+-nu} (pairing error "
       << pair_err << ", imaginary part " << imag_err << ")";
    throw PhysicalityError(os.str());
  }
  SymplecticSpectrum s{0.5 * (ev[3].real() - ev[0].real()), 0.5 * (ev[2].real() - ev[1].real())};
  if (s.nu_minus < 1.0 - opt.eps_phys) {
    std::ostringstream os;
    os << "symplectic_eigenvalues: nu_minus = " << s.nu_minus << " violates nu >= 1";
    throw PhysicalityError(os.str());
  }
  return s;
}

double gaussian_entropy(double nu_plus, double nu_minus, double eps_phys) {
  double s = 0.0;
  for (double nu : {nu_plus, nu_minus}) {
    if (!(nu >= 1.0 - eps_phys)) {
      std::ostringstream os;
      os << "gaussian_entropy: symplectic eigenvalue " << nu << " below 1";
      throw PhysicalityError(os.str());
    }
    s += h_entropy(std::max(nu, 1.0));
  }
  return s;
}

NonGaussianity non_gaussianity(const DensityMatrix& rho12, ModeDims dims, const MeasureOptions& opt) {
  const CovarianceMatrix cm = covariance_matrix(rho12, dims);
  const SymplecticSpectrum sp = symplectic_eigenvalues(cm, opt);
  NonGaussianity ng{};
  ng.nu_plus = sp.nu_plus;
  ng.nu_minus = sp.nu_minus;
  ng.s_gauss = gaussian_entropy(sp.nu_plus, sp.nu_minus, opt.eps_phys);
  ng.s_rho = von_neumann_entropy(rho12, opt.eps_pos);
  double delta = ng.s_gauss - ng.s_rho;
  if (delta < 0.0) {
    if (delta < -opt.eps_num) {
      std::ostringstream os;
      os << "non_gaussianity: delta12 = " << delta << " is negative beyond " << opt.eps_num;
      throw PhysicalityError(os.str());
    }
    delta = 0.0;
    ng.clamped = true;
  }
  ng.delta12 = delta;
  ng.non_gaussian = delta > opt.eps_ng;
  return ng;
}

double log_negativity(const DensityMatrix& rho12, ModeDims dims, Subsystem which) {
  require_dims(rho12, dims, "log_negativity");
  const Operator pt = partial_transpose(rho12.op(), dims, which);
  const double en = std::log2(trace_norm_hermitian(pt));
  if (en < -1e-10) {
    std::ostringstream os;
    os << "log_negativity: negative value " << en << " (state trace below 1)";
    throw PositivityError(os.str());
  }
  return std::max(en, 0.0);
}

MeasureRecord measure_bipartition(const DensityMatrix& rho12, ModeDims dims, const MeasureOptions& opt) {
  const NonGaussianity ng = non_gaussianity(rho12, dims, opt);
  return {log_negativity(rho12, dims), ng.delta12, ng.nu_plus, ng.nu_minus, ng.s_rho, ng.s_gauss};
}

}  // namespace mechent
