#include "mechent/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mechent/errors.hpp"

namespace mechent {

namespace {

constexpr Complex I{0.0, 1.0};
constexpr double drop_tol = 0.0;

using SparseRM = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

SparseRM sparsify(const Operator& op) {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (Eigen::Index j = 0; j < op.cols(); ++j) {
    for (Eigen::Index i = 0; i < op.rows(); ++i) {
      if (std::abs(op(i, j)) > drop_tol) trip.emplace_back(i, j, op(i, j));
    }
  }
  SparseRM s(op.rows(), op.cols());
  s.setFromTriplets(trip.begin(), trip.end());
  s.makeCompressed();
  return s;
}

Eigen::Index find_slot(const SparseRM& pattern, Eigen::Index row, Eigen::Index col) {
  const auto* outer = pattern.outerIndexPtr();
  const auto* inner = pattern.innerIndexPtr();
  const auto* first = inner + outer[row];
  const auto* last = inner + outer[row + 1];
  const auto* it = std::lower_bound(first, last, static_cast<int>(col));
  if (it == last || *it != col) throw Error("LindbladGenerator: entry missing from sparsity pattern");
  return static_cast<Eigen::Index>(it - inner);
}

void check_dim(const Operator& op, int dim, const std::string& what) {
  if (op.rows() != dim || op.cols() != dim) {
    std::ostringstream os;
    os << "LindbladGenerator: " << what << " has dimension " << op.rows() << "x" << op.cols() << ", expected "
       << dim;
    throw DimensionError(os.str());
  }
}

}  // namespace

LindbladModel full_model(const SystemParams& p, const FockLayout& layout, Frame frame) {
  p.validate();
  LindbladModel m;
  m.h_static = static_hamiltonian(p, layout, frame).op;
  const Operator ad = embed(creation(layout.dim(slot::transmon)), layout, slot::transmon);
  m.drive.push_back({ad, [p, frame](double t) { return drive_coefficient(t, p, frame); }});
  m.drive.push_back({ad.adjoint(), [p, frame](double t) { return std::conj(drive_coefficient(t, p, frame)); }});
  m.collapses = collapse_operators(p, layout);
  return m;
}

const char* to_string(Picture p) {
  switch (p) {
    case Picture::schrodinger: return "schrodinger";
    case Picture::interaction: return "interaction";
    case Picture::local: return "local";
  }
  return "?";
}

Picture picture_from_string(const std::string& s) {
  if (s == "schrodinger") return Picture::schrodinger;
  if (s == "interaction") return Picture::interaction;
  if (s == "local") return Picture::local;
  throw ParameterError("unknown picture '" + s + "' (expected schrodinger, interaction or local)");
}

Operator Generator::apply(double t, const Operator& rho) const {
  Operator out(dim(), dim());
  apply(t, rho, out);
  return out;
}

Operator lindblad_rhs(const Operator& rho, double t, const std::function<Operator(double)>& h_at,
                      const CollapseSet& collapses) {
  const Operator h = h_at(t);
  if (h.rows() != rho.rows() || h.cols() != rho.cols() || rho.rows() != rho.cols()) {
    throw DimensionError("lindblad_rhs: Hamiltonian and state dimensions differ");
  }
  Operator out = -I * (h * rho - rho * h);
  for (const CollapseTerm& c : collapses) {
    if (c.op.rows() != rho.rows()) throw DimensionError("lindblad_rhs: collapse operator dimension mismatch");
    if (c.rate < 0.0) throw ParameterError("lindblad_rhs: negative rate");
    if (c.rate == 0.0) continue;
    const Operator ada = c.op.adjoint() * c.op;
    out += c.rate * (c.op * rho * c.op.adjoint() - 0.5 * (ada * rho + rho * ada));
  }
  return out;
}

std::vector<LindbladGenerator::Entry> LindbladGenerator::collect(const Operator& op, const Sparse& pattern,
                                                                 const Eigen::VectorXd& diag, bool phased) {
  std::vector<Entry> out;
  for (Eigen::Index i = 0; i < op.rows(); ++i) {
    for (Eigen::Index j = 0; j < op.cols(); ++j) {
      const Complex v = op(i, j);
      if (std::abs(v) <= drop_tol) continue;
      out.push_back({find_slot(pattern, i, j), v, phased ? diag(i) - diag(j) : 0.0});
    }
  }
  return out;
}

LindbladGenerator::LindbladGenerator(const LindbladModel& model, Picture picture)
    : dim_(static_cast<int>(model.h_static.rows())), picture_(picture) {
  if (picture == Picture::local) throw ParameterError("LindbladGenerator: the local picture needs LocalPictureGenerator");
  check_dim(model.h_static, dim_, "static Hamiltonian");
  const bool phased = picture == Picture::interaction;
  diag_ = phased ? Eigen::VectorXd(model.h_static.diagonal().real()) : Eigen::VectorXd::Zero(dim_);

  Operator h_rest = model.h_static;
  if (phased) h_rest.diagonal().setZero();

  Operator dissipative = Operator::Zero(dim_, dim_);
  for (const CollapseTerm& c : model.collapses) {
    check_dim(c.op, dim_, "collapse operator " + c.label);
    if (c.rate < 0.0) throw ParameterError("LindbladGenerator: negative rate for " + c.label);
    if (c.rate == 0.0) continue;
    dissipative += c.rate * (c.op.adjoint() * c.op);
  }
  const Operator heff_static = h_rest - 0.5 * I * dissipative;

  // Union sparsity pattern of every Hamiltonian contribution.
  Operator mask = heff_static.cwiseAbs().cast<Complex>();
  for (const DriveTerm& d : model.drive) {
    check_dim(d.op, dim_, "drive operator");
    mask += d.op.cwiseAbs().cast<Complex>();
  }
  heff_ = sparsify(mask);

  groups_.push_back({Coefficient{}, collect(heff_static, heff_, diag_, phased)});
  for (const DriveTerm& d : model.drive) groups_.push_back({d.coef, collect(d.op, heff_, diag_, phased)});

  for (const CollapseTerm& c : model.collapses) {
    if (c.rate == 0.0) continue;
    Jump j{c.rate, sparsify(c.op), {}};
    j.entries = collect(c.op, j.op, diag_, phased);
    for (const Entry& e : j.entries) {
      if (e.freq != 0.0) time_dependent_jumps_ = true;
    }
    jumps_.push_back(std::move(j));
  }

  x_.resize(dim_, dim_);
  y_.resize(dim_, dim_);
  m_.resize(dim_, dim_);
}

void LindbladGenerator::refresh(double t) const {
  if (refreshed_ && refreshed_at_ == t) return;
  Complex* vals = heff_.valuePtr();
  std::fill(vals, vals + heff_.nonZeros(), Complex(0.0));
  for (const Group& g : groups_) {
    const Complex c = g.coef ? g.coef(t) : Complex(1.0);
    if (c == 0.0) continue;
    for (const Entry& e : g.entries) {
      vals[e.slot] += e.freq == 0.0 ? c * e.value : c * e.value * std::polar(1.0, e.freq * t);
    }
  }
  if (time_dependent_jumps_) {
    for (const Jump& j : jumps_) {
      Complex* jv = j.op.valuePtr();
      for (const Entry& e : j.entries) jv[e.slot] = e.value * std::polar(1.0, e.freq * t);
    }
  }
  refreshed_at_ = t;
  refreshed_ = true;
}

void LindbladGenerator::apply(double t, const Operator& rho, Operator& drho) const {
  check_dim(rho, dim_, "state");
  refresh(t);
  ++evaluations_;

  x_.noalias() = heff_ * rho;
  m_ = -I * x_;
  for (const Jump& j : jumps_) {
    y_.noalias() = j.op * rho;
    x_.noalias() = j.op * y_.adjoint();  // A rho A^dagger for Hermitian rho
    m_ += (0.5 * j.rate) * x_;
  }
  drho = m_ + m_.adjoint();
}

Operator LindbladGenerator::to_schrodinger(double t, const Operator& rho) const {
  check_dim(rho, dim_, "state");
  if (picture_ == Picture::schrodinger) return rho;
  Operator out(dim_, dim_);
  for (int j = 0; j < dim_; ++j) {
    for (int i = 0; i < dim_; ++i) out(i, j) = rho(i, j) * std::polar(1.0, -(diag_(i) - diag_(j)) * t);
  }
  return out;
}

Operator LindbladGenerator::from_schrodinger(double t, const Operator& rho) const {
  check_dim(rho, dim_, "state");
  if (picture_ == Picture::schrodinger) return rho;
  Operator out(dim_, dim_);
  for (int j = 0; j < dim_; ++j) {
    for (int i = 0; i < dim_; ++i) out(i, j) = rho(i, j) * std::polar(1.0, (diag_(i) - diag_(j)) * t);
  }
  return out;
}

DenseGenerator::DenseGenerator(std::function<Operator(double)> h_at, CollapseSet collapses, int dim)
    : h_at_(std::move(h_at)), collapses_(std::move(collapses)), dim_(dim) {
  if (dim < 1) throw DimensionError("DenseGenerator: dimension must be positive");
  for (const CollapseTerm& c : collapses_) check_dim(c.op, dim_, "collapse operator " + c.label);
}

void DenseGenerator::apply(double t, const Operator& rho, Operator& drho) const {
  ++evaluations_;
  drho = lindblad_rhs(rho, t, h_at_, collapses_);
}

}  // namespace mechent
