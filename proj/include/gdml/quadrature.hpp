#pragma once

#include "gdml/common.hpp"

#include <string>
#include <vector>

namespace gdml {

enum class Lumping1D { Trapezoidal, Simpson, Equi6, Equi8, GaussLobatto };
enum class Lumping2D { Vertex, VertexEdgeMidpoint };

/// Mass-lumping rule on a reference cell. In 1D the nodes are affine
/// coordinates in [0,1]; in 2D they are (xi, eta) on the reference triangle
/// (0,0), (1,0), (0,1), i.e. barycentric (1-xi-eta, xi, eta).
struct LumpingRule {
  std::string name;
  int dim = 1;
  std::vector<Point> ref_nodes;
  /// |U_i cap K| / |K|; nonnegative and summing to one.
  std::vector<double> weight_fractions;
  /// Degree of exactness of sum_i w_i q(x_i) as a quadrature.
  int doe = 0;

  Index num_nodes() const { return static_cast<Index>(ref_nodes.size()); }
  /// Polynomial degree k of the matching Lagrange space.
  int degree() const;
  /// Whether the rule is exact at degree k at least (ell = doe - k >= 0).
  bool satisfies_kl() const { return doe >= degree(); }
  int ell() const { return doe - degree(); }
};

LumpingRule lumping_rule_1d(Lumping1D name);
LumpingRule lumping_rule_2d(Lumping2D name);
/// trapezoidal, simpson, equi6, equi8, gauss-lobatto, vertex, vertex-edge-midpoint
LumpingRule lumping_rule_from_name(const std::string& name);

/// True iff the rule integrates every monomial of total degree <= k_plus_l on
/// the reference cell within 1e-12.
bool verify_exactness(const LumpingRule& rule, int k_plus_l);

/// Exact integral of x^a on [0,1] or xi^a eta^b on the reference triangle.
double reference_monomial_integral(int a);
double reference_monomial_integral(int a, int b);

struct QuadPoint {
  Point ref;
  double weight;
};

/// Gauss rules for error integrals. The triangle rule is the collapsed
/// (Duffy) product of Gauss-Legendre rules; weights sum to the reference
/// measure (1 in 1D, 1/2 on the triangle).
class ErrorQuadrature {
public:
  static ErrorQuadrature interval(int degree = 10);
  static ErrorQuadrature triangle(int degree = 10);

  const std::vector<QuadPoint>& points() const { return points_; }
  int degree() const { return degree_; }
  int dim() const { return dim_; }

private:
  std::vector<QuadPoint> points_;
  int degree_ = 0;
  int dim_ = 1;
};

/// n-point Gauss-Legendre nodes and weights on [0,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace gdml
