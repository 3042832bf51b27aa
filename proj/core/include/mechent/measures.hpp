#pragma once

#include <utility>

#include <Eigen/Dense>

#include "mechent/operator_algebra.hpp"

namespace mechent {

using ModeDims = std::pair<int, int>;

/// Second moments of the two-mode state in the operator basis (b1, b2, b1^dag, b2^dag):
/// sigma_ij = <{X_i, X_j^dag}> - 2 <X_i><X_j^dag>.
struct CovarianceMatrix {
  Eigen::Matrix4cd sigma;
  Eigen::Vector4cd first_moments;
};

struct SymplecticSpectrum {
  double nu_plus;
  double nu_minus;
};

struct MeasureOptions {
  double eps_phys = 1e-6;  // tolerated nu < 1 before PhysicalityError
  double eps_ng = 1e-6;    // non-Gaussian iff delta12 > eps_ng
  double eps_num = 1e-6;   // negative delta12 above -eps_num is clamped to 0
  double eps_pos = 1e-8;   // eigenvalue clamp for the von Neumann entropy
  double pairing_tol = 1e-8;
};

/// Non-Gaussianity delta12 = S(rho_G) - S(rho12) in nats, with its ingredients.
struct NonGaussianity {
  double delta12;
  double s_rho;
  double s_gauss;
  double nu_plus;
  double nu_minus;
  bool non_gaussian;
  bool clamped;  // a small negative delta12 was clamped to zero
};

/// Per-sample record. E_N in bits, entropies in nats.
struct MeasureRecord {
  double log_negativity;
  double delta12;
  double nu_plus;
  double nu_minus;
  double s_rho;
  double s_gauss;
};

/// The anticommutators are evaluated from normal-ordered moments with the canonical
/// commutator [b, b^dag] = 1, which keeps the vacuum contribution exact when a state
/// populates the truncation edge.
CovarianceMatrix covariance_matrix(const DensityMatrix& rho12, ModeDims dims);

/// Positive pair of the spectrum {+-nu_plus, +-nu_minus} of i Omega sigma,
/// Omega = diag(-i, -i, i, i).
SymplecticSpectrum symplectic_eigenvalues(const CovarianceMatrix& cm, const MeasureOptions& opt = {});

/// h(x) = ((x+1)/2) ln((x+1)/2) - ((x-1)/2) ln((x-1)/2), summed over both modes (nats).
double gaussian_entropy(double nu_plus, double nu_minus, double eps_phys = 1e-6);

NonGaussianity non_gaussianity(const DensityMatrix& rho12, ModeDims dims, const MeasureOptions& opt = {});

/// log2 of the trace norm of the partial transpose (bits).
double log_negativity(const DensityMatrix& rho12, ModeDims dims, Subsystem which = Subsystem::second);

MeasureRecord measure_bipartition(const DensityMatrix& rho12, ModeDims dims, const MeasureOptions& opt = {});

}  // namespace mechent
