#pragma once

#include "gdml/common.hpp"
#include "gdml/gd.hpp"
#include "gdml/model.hpp"
#include "gdml/testcases.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace gdml {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Right-hand side data: f, and F either piecewise constant (1D) or a
/// smooth vector field (integrated by quadrature).
struct SourceData {
  CellField f;
  std::vector<FluxPiece> flux_1d;
  CellVectorField flux_field;
};

struct EnergyCheck {
  double lhs;
  double rhs;
  double defect;
};

/// The discrete system of the gradient scheme:
///   M beta(u) + A zeta(u) = b   on unconstrained indices,
/// with boundary indices fixed to prescribed values. Vectors are full length
/// Card(I); at zero-weight indices the unknown stored is w_i = zeta(u)_i.
class DiscreteSystem {
public:
  Vector M;
  SparseMatrix A;
  Vector b;
  std::vector<bool> constrained;
  /// u values at constrained indices (zero elsewhere).
  Vector prescribed;
  /// Unconstrained indices with M_ii = 0, carrying w_i = zeta(u)_i.
  std::vector<bool> hybrid;
  std::vector<Index> free_dofs;
  /// Position in free_dofs, or -1 for constrained indices.
  std::vector<Index> free_pos;
  /// A restricted to free rows and columns.
  SparseMatrix A_ff;

  Index size() const { return M.size(); }
  Index num_free() const { return static_cast<Index>(free_dofs.size()); }

  /// zeta(u) as a full vector (w_i at hybrid indices).
  Vector zeta_values(const NonlinearModel& model, const Vector& x) const;
  /// G(x) on free indices (length num_free()).
  Vector residual(const NonlinearModel& model, const Vector& x) const;
  /// Same as residual but scattered into a full-length vector with zeros at constrained rows.
  Vector residual_full(const NonlinearModel& model, const Vector& x) const;
  /// dG/dx on free indices: diag(M beta') + A_ff diag(zeta' or 1 at hybrid).
  SparseMatrix jacobian(const NonlinearModel& model, const Vector& x) const;
  /// b_f - A_fc zeta(u_c): the load of the eliminated system.
  Vector effective_load(const NonlinearModel& model) const;
  /// Full vector with free entries from xf and constrained entries prescribed.
  Vector expand(const Vector& xf) const;
  Vector restrict_free(const Vector& x) const;

  /// Discrete energy identity tested with v = zeta(u) on free indices.
  EnergyCheck energy_identity_check(const NonlinearModel& model, const Vector& x) const;
};

DiscreteSystem assemble(const GradientDiscretisation& gd, const NonlinearModel& model,
                        const SourceData& source, const CellField& boundary_u);
DiscreteSystem assemble(const GradientDiscretisation& gd, const TestCase& tc);

/// Local stiffness int_K Lambda grad phi_i . grad phi_j.
Eigen::MatrixXd local_stiffness(const GradientDiscretisation& gd, const Eigen::Matrix2d& lambda,
                                Index cell);

/// -int F . grad_D phi_i for piecewise constant F: exact path through point
/// values of the basis at the piece ends, and a quadrature path on cells
/// split at the pieces (used to cross-check).
Vector flux_load_exact(const GradientDiscretisation& gd, const std::vector<FluxPiece>& flux);
Vector flux_load_quadrature(const GradientDiscretisation& gd, const std::vector<FluxPiece>& flux);

} // namespace gdml
