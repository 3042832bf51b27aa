#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "mechent/model.hpp"
#include "mechent/operator_algebra.hpp"

namespace mechent {

using Coefficient = std::function<Complex(double)>;

/// Operator multiplied by a time-dependent scalar.
struct DriveTerm {
  Operator op;
  Coefficient coef;
};

/// H(t) = h_static + sum_k coef_k(t) op_k, with a static set of dissipators.
struct LindbladModel {
  Operator h_static;
  std::vector<DriveTerm> drive;
  CollapseSet collapses;
};

/// Full transmon + two-resonator model in the requested frame.
LindbladModel full_model(const SystemParams& p, const FockLayout& layout, Frame frame = Frame::rotating);

/// `interaction` integrates in the picture generated by the diagonal of h_static:
/// rho_I = exp(iDt) rho exp(-iDt). Collapse operators are conjugated by the same
/// diagonal unitary, so the generator is exact in either picture.
///
/// `local` removes the full driven transmon evolution and the free mechanical
/// rotation (see LocalPictureGenerator); only the coupling and dissipation remain.
enum class Picture { schrodinger, interaction, local };

const char* to_string(Picture p);
Picture picture_from_string(const std::string& s);

/// Dense reference right-hand side: -i[H(t), rho] + sum rate D_A[rho].
Operator lindblad_rhs(const Operator& rho, double t, const std::function<Operator(double)>& h_at,
                      const CollapseSet& collapses);

/// Right-hand side of a master equation integrated in some picture.
class Generator {
 public:
  virtual ~Generator() = default;

  virtual int dim() const noexcept = 0;
  virtual Picture picture() const noexcept = 0;

  /// drho = L_t[rho] for Hermitian rho (in the integration picture).
  virtual void apply(double t, const Operator& rho, Operator& drho) const = 0;
  Operator apply(double t, const Operator& rho) const;

  /// Maps a state between the integration picture and the Schrodinger picture of the model frame.
  virtual Operator to_schrodinger(double t, const Operator& rho) const = 0;
  virtual Operator from_schrodinger(double t, const Operator& rho) const = 0;

  std::size_t rhs_evaluations() const noexcept { return evaluations_; }

 protected:
  mutable std::size_t evaluations_ = 0;
};

/// Sparse evaluation of the master-equation right-hand side. Uses
/// drho = M + M^dagger with M = -i H_eff rho + (1/2) sum rate A rho A^dagger and
/// H_eff = H - (i/2) sum rate A^dagger A, which requires a Hermitian rho.
///
/// Holds scratch buffers: one instance per trajectory.
class LindbladGenerator : public Generator {
 public:
  /// `picture` must be schrodinger or interaction.
  explicit LindbladGenerator(const LindbladModel& model, Picture picture = Picture::schrodinger);

  int dim() const noexcept override { return dim_; }
  Picture picture() const noexcept override { return picture_; }

  using Generator::apply;
  void apply(double t, const Operator& rho, Operator& drho) const override;

  Operator to_schrodinger(double t, const Operator& rho) const override;
  Operator from_schrodinger(double t, const Operator& rho) const override;

 private:
  using Sparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

  struct Entry {
    Eigen::Index slot;  // position in the compressed value array
    Complex value;
    double freq;  // D_row - D_col in the interaction picture, 0 otherwise
  };
  struct Group {
    Coefficient coef;  // empty: constant
    std::vector<Entry> entries;
  };
  struct Jump {
    double rate;
    mutable Sparse op;
    std::vector<Entry> entries;
  };

  static std::vector<Entry> collect(const Operator& op, const Sparse& pattern, const Eigen::VectorXd& diag,
                                    bool phased);
  void refresh(double t) const;

  int dim_ = 0;
  Picture picture_;
  Eigen::VectorXd diag_;  // generator of the interaction picture
  mutable Sparse heff_;
  std::vector<Group> groups_;
  std::vector<Jump> jumps_;
  bool time_dependent_jumps_ = false;

  mutable Operator x_, y_, m_;
  mutable double refreshed_at_ = 0.0;
  mutable bool refreshed_ = false;
};

/// Dense reference generator for small systems with an arbitrary H(t), always in
/// the Schrodinger picture.
class DenseGenerator : public Generator {
 public:
  DenseGenerator(std::function<Operator(double)> h_at, CollapseSet collapses, int dim);

  int dim() const noexcept override { return dim_; }
  Picture picture() const noexcept override { return Picture::schrodinger; }

  using Generator::apply;
  void apply(double t, const Operator& rho, Operator& drho) const override;
  Operator to_schrodinger(double, const Operator& rho) const override { return rho; }
  Operator from_schrodinger(double, const Operator& rho) const override { return rho; }

 private:
  std::function<Operator(double)> h_at_;
  CollapseSet collapses_;
  int dim_;
};

}  // namespace mechent
