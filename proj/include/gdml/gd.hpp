#pragma once

#include "gdml/common.hpp"
#include "gdml/mesh.hpp"
#include "gdml/model.hpp"
#include "gdml/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gdml {

enum class GDKind { FE, DG };

/// A field evaluated cell by cell: f(x, inside) where `inside` is a point
/// strictly inside the cell being processed. Piecewise data use it to pick the
/// one-sided value when x sits on a breakpoint.
using CellField = std::function<double(const Point& x, const Point& inside)>;
using CellVectorField = std::function<Point(const Point& x, const Point& inside)>;

/// Parsed CLI variant name, e.g. fe-k1, fe-k3-equi8, fe-k1-quarter, dg-k3-gl.
struct GDVariant {
  std::string name;
  GDKind kind = GDKind::FE;
  int degree = 1;
  /// Rule name (see lumping_rule_from_name); resolved per dimension.
  std::string rule;
  /// P1 on the quarter-refined mesh (2D only).
  bool quarter = false;

  static GDVariant parse(const std::string& name);
  LumpingRule lumping_rule(int dim) const;
};

/// Per-cell affine geometry: x = origin + J xi.
struct CellGeometry {
  Point origin;
  Eigen::Matrix2d J;
  Eigen::Matrix2d Jinv;
  double measure = 0.0;
  Point centroid;
};

/// One point of the 1D DG face set. A side is either a cell (value and
/// derivative from its Lagrange basis) or a boundary-jump index.
struct DGFace {
  double x = 0.0;
  Index left_cell = -1;
  Index right_cell = -1;
  /// Boundary-jump index standing in for the missing side (-1 if interior).
  Index ghost = -1;
  double h = 0.0;
};

class GradientDiscretisation {
public:
  static GradientDiscretisation build_fe(const Mesh1D& mesh, int k, const LumpingRule& rule);
  static GradientDiscretisation build_fe(const Mesh2D& mesh, int k, const LumpingRule& rule);
  static GradientDiscretisation build_dg(const Mesh1D& mesh, int k, const LumpingRule& rule,
                                         double penalty = 0.6);

  int dim() const { return dim_; }
  GDKind kind() const { return kind_; }
  int degree() const { return degree_; }
  double penalty() const { return penalty_; }
  const LumpingRule& rule() const { return rule_; }

  Index num_dofs() const { return static_cast<Index>(nodes_.size()); }
  Index num_cells() const { return static_cast<Index>(cell_dofs_.size()); }
  Index num_local() const { return rule_.num_nodes(); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(Index i) const { return nodes_[i]; }
  bool is_boundary(Index i) const { return boundary_[i]; }
  const std::vector<Index>& boundary_indices() const { return boundary_indices_; }
  const std::vector<Index>& cell_dofs(Index cell) const { return cell_dofs_[cell]; }
  /// |U_i cap K| for the local nodes of the cell.
  std::vector<double> cell_weights(Index cell) const;
  /// |U_i| = sum over cells.
  const Vector& node_weights() const { return node_weights_; }
  const CellGeometry& geometry(Index cell) const { return geometry_[cell]; }
  double domain_measure() const;
  double h() const { return h_; }

  const std::vector<DGFace>& dg_faces() const { return faces_; }
  const std::optional<Mesh1D>& mesh1d() const { return mesh1d_; }
  const std::optional<Mesh2D>& mesh2d() const { return mesh2d_; }

  Index locate(const Point& x) const;
  Point to_reference(Index cell, const Point& x) const;
  Point to_physical(Index cell, const Point& xi) const;

  /// Reference Lagrange basis values and gradients (nloc x 2, y column zero in 1D).
  Vector ref_basis(const Point& xi) const;
  Eigen::MatrixX2d ref_grad(const Point& xi) const;
  /// Physical gradients of the local basis at reference point xi.
  Eigen::MatrixX2d phys_grad(Index cell, const Point& xi) const;

  /// Local region index (U_i cap K) of a reference point; never a zero-weight node.
  Index region(const Point& xi) const;

  Vector local_values(const Vector& v, Index cell) const;

  /// Pi_D v, Pi_D* v and grad_D v at x. With cell < 0 the cell is located.
  double pi_lumped(const Vector& v, const Point& x, Index cell = -1) const;
  double pi_star(const Vector& v, const Point& x, Index cell = -1) const;
  Point grad_d(const Vector& v, const Point& x, Index cell = -1) const;

  /// (Q_D g)|_K on U_i cap K, as [cell][local].
  std::vector<std::vector<double>> q_d(const CellField& g) const;
  /// (I_D phi)_i = phi(x_i).
  Vector interpolate_nodal(const CellField& phi) const;

  /// A cell containing node i (the first one in numbering order).
  Index cell_of_node(Index i) const { return node_cell_[i]; }

private:
  GradientDiscretisation() = default;
  void setup_basis();
  void finalize();

  int dim_ = 1;
  GDKind kind_ = GDKind::FE;
  int degree_ = 1;
  double penalty_ = 0.0;
  LumpingRule rule_;
  std::vector<Point> nodes_;
  std::vector<bool> boundary_;
  std::vector<Index> boundary_indices_;
  std::vector<std::vector<Index>> cell_dofs_;
  std::vector<CellGeometry> geometry_;
  std::vector<Index> node_cell_;
  Vector node_weights_;
  std::vector<DGFace> faces_;
  double h_ = 0.0;
  std::optional<Mesh1D> mesh1d_;
  std::optional<Mesh2D> mesh2d_;
  // Monomial exponents and inverse Vandermonde: phi_j = sum_m mono_m * coeff(m, j).
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coeff_;
  // Cumulative weight fractions (1D regions).
  std::vector<double> cumulative_;
};

Vector apply_nonlinearity(const Nonlinearity& g, const Vector& v);

} // namespace gdml
