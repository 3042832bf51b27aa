#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mechent {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Numerical tolerances applied when validating states and Hermitian inputs.
struct Tolerances {
  double hermiticity = 1e-9;
  double trace = 1e-8;
  double positivity = 1e-8;
};

/// Subsystem slots of the full model, ordered transmon (x) MR1 (x) MR2.
namespace slot {
inline constexpr std::size_t transmon = 0;
inline constexpr std::size_t mr1 = 1;
inline constexpr std::size_t mr2 = 2;
}  // namespace slot

/// Truncation dimensions of a tensor-product Fock space. Every dim is >= 2.
class FockLayout {
 public:
  explicit FockLayout(std::vector<int> dims);
  FockLayout(std::initializer_list<int> dims) : FockLayout(std::vector<int>(dims)) {}

  const std::vector<int>& dims() const noexcept { return dims_; }
  int dim(std::size_t slot) const;
  std::size_t slots() const noexcept { return dims_.size(); }
  int total() const noexcept { return total_; }

  /// Layout restricted to the listed slots, preserving their original order.
  FockLayout subset(std::span<const std::size_t> keep) const;

  bool operator==(const FockLayout&) const = default;

 private:
  std::vector<int> dims_;
  int total_ = 1;
};

Operator identity(int n);
/// Truncated lowering operator: entries (k, k+1) = sqrt(k+1).
Operator annihilation(int n);
Operator creation(int n);
Operator number(int n);

Operator kron(const Operator& a, const Operator& b);

/// Kronecker product of `op` with identities on every other slot.
Operator embed(const Operator& op, const FockLayout& layout, std::size_t slot);

/// Hermitian, positive semidefinite, unit-trace operator.
class DensityMatrix {
 public:
  /// Validates Hermiticity, trace and positivity against `tol`.
  explicit DensityMatrix(Operator op, const Tolerances& tol = {});

  /// Wraps an operator that is already known to be a valid state (no checks).
  static DensityMatrix trusted(Operator op);

  static DensityMatrix pure(const StateVector& psi);
  static DensityMatrix fock(int dim, int n);
  /// Gibbs state with mean occupation `nbar`, renormalized on the truncated space.
  static DensityMatrix thermal(int dim, double nbar);
  static DensityMatrix product(const DensityMatrix& a, const DensityMatrix& b);

  const Operator& op() const noexcept { return op_; }
  int dim() const noexcept { return static_cast<int>(op_.rows()); }

 private:
  struct Unchecked {};
  DensityMatrix(Operator op, Unchecked) : op_(std::move(op)) {}

  Operator op_;
};

/// Normalized coherent state truncated to `dim` levels.
StateVector coherent_state(int dim, Complex alpha);

/// tr(op * rho).
Complex expectation(const Operator& op, const DensityMatrix& rho);

/// Largest |M - M^dagger| entry.
double hermiticity_error(const Operator& m);

DensityMatrix partial_trace(const DensityMatrix& rho, const FockLayout& layout,
                            std::span<const std::size_t> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const FockLayout& layout,
                            std::initializer_list<std::size_t> keep);

enum class Subsystem { first, second };

/// Partial transpose of a bipartite operator on d1 (x) d2 over one factor.
Operator partial_transpose(const Operator& rho12, std::pair<int, int> dims,
                           Subsystem which = Subsystem::second);

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;  // ascending
  Operator eigenvectors;        // columns
};

/// Eigen-decomposition of a Hermitian operator. The Hermiticity tolerance is
/// applied relative to max(1, max|M_ij|).
SpectralDecomposition hermitian_spectrum(const Operator& m, double herm_tol = 1e-9);
Eigen::VectorXd hermitian_eigenvalues(const Operator& m, double herm_tol = 1e-9);

/// Sum of |eigenvalues| of a Hermitian operator.
double trace_norm_hermitian(const Operator& m, double herm_tol = 1e-9);

/// Von Neumann entropy in nats. Eigenvalues in [-eps_pos, 0) count as zero.
double von_neumann_entropy(const DensityMatrix& rho, double eps_pos = 1e-8);
double von_neumann_entropy_from_spectrum(const Eigen::VectorXd& eigenvalues, double eps_pos = 1e-8);

/// exp(-iG) for Hermitian G, exp(G) for anti-Hermitian G.
Operator unitary_from_generator(const Operator& g, double herm_tol = 1e-9);

}  // namespace mechent
