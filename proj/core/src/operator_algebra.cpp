#include "mechent/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mechent/errors.hpp"

namespace mechent {

namespace {

double scale_of(const Operator& m) {
  return std::max(1.0, m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff());
}

void require_square(const Operator& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": operator must be square and non-empty (got " << m.rows() << "x" << m.cols() << ")";
    throw DimensionError(os.str());
  }
}

void require_hermitian(const Operator& m, double tol, const char* what) {
  require_square(m, what);
  const double err = hermiticity_error(m);
  if (err > tol * scale_of(m)) {
    std::ostringstream os;
    os << what << ": operator is not Hermitian (max |M - M^dagger| = " << err << ")";
    throw HermiticityError(os.str());
  }
}

}  // namespace

FockLayout::FockLayout(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw LayoutError("FockLayout: at least one subsystem is required");
  for (int d : dims_) {
    if (d < 2) throw LayoutError("FockLayout: every truncation dimension must be >= 2");
    total_ *= d;
  }
}

int FockLayout::dim(std::size_t slot) const {
  if (slot >= dims_.size()) throw LayoutError("FockLayout: slot index out of range");
  return dims_[slot];
}

FockLayout FockLayout::subset(std::span<const std::size_t> keep) const {
  std::vector<std::size_t> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> out;
  out.reserve(sorted.size());
  for (std::size_t s : sorted) out.push_back(dim(s));
  return FockLayout(std::move(out));
}

Operator identity(int n) {
  if (n < 1) throw DimensionError("identity: dimension must be positive");
  return Operator::Identity(n, n);
}

Operator annihilation(int n) {
  if (n < 2) throw DimensionError("annihilation: dimension must be >= 2");
  Operator a = Operator::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  return a;
}

Operator creation(int n) { return annihilation(n).adjoint(); }

Operator number(int n) {
  if (n < 2) throw DimensionError("number: dimension must be >= 2");
  Operator m = Operator::Zero(n, n);
  for (int k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
  return m;
}

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator embed(const Operator& op, const FockLayout& layout, std::size_t slot) {
  require_square(op, "embed");
  if (op.rows() != layout.dim(slot)) {
    std::ostringstream os;
    os << "embed: operator dimension " << op.rows() << " does not match slot " << slot
       << " dimension " << layout.dim(slot);
    throw LayoutError(os.str());
  }
  Operator out = Operator::Identity(1, 1);
  for (std::size_t s = 0; s < layout.slots(); ++s) {
    out = kron(out, s == slot ? op : identity(layout.dim(s)));
  }
  return out;
}

DensityMatrix::DensityMatrix(Operator op, const Tolerances& tol) : op_(std::move(op)) {
  require_hermitian(op_, tol.hermiticity, "DensityMatrix");
  const Complex tr = op_.trace();
  if (std::abs(tr - 1.0) > tol.trace) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr.real() << " differs from 1 by more than " << tol.trace;
    throw PositivityError(os.str());
  }
  const Eigen::VectorXd ev = hermitian_eigenvalues(op_, tol.hermiticity);
  if (ev(0) < -tol.positivity) {
    std::ostringstream os;
    os << "DensityMatrix: minimum eigenvalue " << ev(0) << " below -" << tol.positivity;
    throw PositivityError(os.str());
  }
}

DensityMatrix DensityMatrix::trusted(Operator op) { return DensityMatrix(std::move(op), Unchecked{}); }

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw DimensionError("DensityMatrix::pure: zero vector");
  const StateVector v = psi / n;
  return DensityMatrix(v * v.adjoint(), Unchecked{});
}

DensityMatrix DensityMatrix::fock(int dim, int n) {
  if (dim < 2 || n < 0 || n >= dim) throw DimensionError("DensityMatrix::fock: level outside truncation");
  Operator m = Operator::Zero(dim, dim);
  m(n, n) = 1.0;
  return DensityMatrix(std::move(m), Unchecked{});
}

DensityMatrix DensityMatrix::thermal(int dim, double nbar) {
  if (dim < 2) throw DimensionError("DensityMatrix::thermal: dimension must be >= 2");
  if (!(nbar >= 0.0)) throw ParameterError("DensityMatrix::thermal: occupation must be >= 0");
  Operator m = Operator::Zero(dim, dim);
  if (nbar == 0.0) {
    m(0, 0) = 1.0;
    return DensityMatrix(std::move(m), Unchecked{});
  }
  const double q = nbar / (1.0 + nbar);
  double norm = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double p = std::pow(q, k);
    m(k, k) = p;
    norm += p;
  }
  m /= norm;
  return DensityMatrix(std::move(m), Unchecked{});
}

DensityMatrix DensityMatrix::product(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.op(), b.op()), Unchecked{});
}

StateVector coherent_state(int dim, Complex alpha) {
  if (dim < 2) throw DimensionError("coherent_state: dimension must be >= 2");
  StateVector psi(dim);
  Complex c = 1.0;
  for (int k = 0; k < dim; ++k) {
    if (k > 0) c *= alpha / std::sqrt(static_cast<double>(k));
    psi(k) = c;
  }
  return psi / psi.norm();
}

Complex expectation(const Operator& op, const DensityMatrix& rho) {
  if (op.rows() != rho.dim() || op.cols() != rho.dim()) {
    throw DimensionError("expectation: operator and state dimensions differ");
  }
  // tr(A rho) = sum_ij A_ij rho_ji
  return (op.array() * rho.op().transpose().array()).sum();
}

double hermiticity_error(const Operator& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix partial_trace(const DensityMatrix& rho, const FockLayout& layout,
                            std::span<const std::size_t> keep) {
  if (keep.empty()) throw LayoutError("partial_trace: keep set is empty");
  if (rho.dim() != layout.total()) throw DimensionError("partial_trace: state does not match layout");
  const std::size_t n = layout.slots();
  std::vector<bool> kept(n, false);
  for (std::size_t s : keep) {
    if (s >= n) throw LayoutError("partial_trace: slot index out of range");
    kept[s] = true;
  }

  // Row-major strides of the full index (slot 0 is the most significant).
  std::vector<int> stride(n, 1);
  for (std::size_t s = n - 1; s > 0; --s) stride[s - 1] = stride[s] * layout.dim(s);

  std::vector<std::size_t> kslots, tslots;
  for (std::size_t s = 0; s < n; ++s) (kept[s] ? kslots : tslots).push_back(s);

  int dk = 1, dt = 1;
  for (auto s : kslots) dk *= layout.dim(s);
  for (auto s : tslots) dt *= layout.dim(s);

  auto offsets = [&](const std::vector<std::size_t>& slots, int count) {
    std::vector<int> off(count, 0);
    for (int idx = 0; idx < count; ++idx) {
      int rem = idx, o = 0;
      for (std::size_t k = slots.size(); k-- > 0;) {
        const int d = layout.dim(slots[k]);
        o += (rem % d) * stride[slots[k]];
        rem /= d;
      }
      off[idx] = o;
    }
    return off;
  };
  const std::vector<int> koff = offsets(kslots, dk);
  const std::vector<int> toff = offsets(tslots, dt);

  const Operator& m = rho.op();
  Operator out = Operator::Zero(dk, dk);
  for (int j = 0; j < dk; ++j) {
    for (int i = 0; i < dk; ++i) {
      Complex acc = 0.0;
      for (int t = 0; t < dt; ++t) acc += m(koff[i] + toff[t], koff[j] + toff[t]);
      out(i, j) = acc;
    }
  }
  return DensityMatrix::trusted(std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const FockLayout& layout,
                            std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, layout, std::span<const std::size_t>(keep.begin(), keep.size()));
}

Operator partial_transpose(const Operator& rho12, std::pair<int, int> dims, Subsystem which) {
  const auto [d1, d2] = dims;
  if (d1 < 1 || d2 < 1 || rho12.rows() != static_cast<Eigen::Index>(d1) * d2 || rho12.cols() != rho12.rows()) {
    throw DimensionError("partial_transpose: operator dimension is not d1*d2");
  }
  Operator out(rho12.rows(), rho12.cols());
  for (int i1 = 0; i1 < d1; ++i1) {
    for (int i2 = 0; i2 < d2; ++i2) {
      for (int j1 = 0; j1 < d1; ++j1) {
        for (int j2 = 0; j2 < d2; ++j2) {
          const Complex v = rho12(i1 * d2 + i2, j1 * d2 + j2);
          if (which == Subsystem::second) {
            out(i1 * d2 + j2, j1 * d2 + i2) = v;
          } else {
            out(j1 * d2 + i2, i1 * d2 + j2) = v;
          }
        }
      }
    }
  }
  return out;
}

SpectralDecomposition hermitian_spectrum(const Operator& m, double herm_tol) {
  require_hermitian(m, herm_tol, "hermitian_spectrum");
  const Operator sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(sym);
  if (es.info() != Eigen::Success) throw Error("hermitian_spectrum: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::VectorXd hermitian_eigenvalues(const Operator& m, double herm_tol) {
  require_hermitian(m, herm_tol, "hermitian_eigenvalues");
  const Operator sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("hermitian_eigenvalues: eigensolver failed");
  return es.eigenvalues();
}

double trace_norm_hermitian(const Operator& m, double herm_tol) {
  return hermitian_eigenvalues(m, herm_tol).cwiseAbs().sum();
}

double von_neumann_entropy_from_spectrum(const Eigen::VectorXd& eigenvalues, double eps_pos) {
  double s = 0.0;
  for (double l : eigenvalues) {
    if (l < -eps_pos) {
      std::ostringstream os;
      os << "von_neumann_entropy: eigenvalue " << l << " below -" << eps_pos;
      throw PositivityError(os.str());
    }
    if (l > 0.0) s -= l * std::log(l);
  }
  return std::max(0.0, s);
}

double von_neumann_entropy(const DensityMatrix& rho, double eps_pos) {
  return von_neumann_entropy_from_spectrum(hermitian_eigenvalues(rho.op()), eps_pos);
}

Operator unitary_from_generator(const Operator& g, double herm_tol) {
  require_square(g, "unitary_from_generator");
  const double scale = scale_of(g);
  Operator h;
  if ((g - g.adjoint()).cwiseAbs().maxCoeff() <= herm_tol * scale) {
    h = g;
  } else if ((g + g.adjoint()).cwiseAbs().maxCoeff() <= herm_tol * scale) {
    h = Complex(0.0, 1.0) * g;  // exp(G) = exp(-i (iG)), iG Hermitian
  } else {
    throw GeneratorError("unitary_from_generator: generator is neither Hermitian nor anti-Hermitian");
  }
  const SpectralDecomposition sd = hermitian_spectrum(h, herm_tol);
  Eigen::VectorXcd phases(sd.eigenvalues.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(Complex(0.0, -sd.eigenvalues(k)));
  return sd.eigenvectors * phases.asDiagonal() * sd.eigenvectors.adjoint();
}

}  // namespace mechent
