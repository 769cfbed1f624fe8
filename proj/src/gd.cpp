#include "gdml/gd.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>

namespace gdml {

// ---------------------------------------------------------------- variants

GDVariant GDVariant::parse(const std::string& name) {
  GDVariant v;
  v.name = name;
  auto fail = [&name]() -> GDVariant {
    throw ConfigError("unknown GD variant '" + name +
                      "' (expected fe-k1, fe-k2, fe-k3-{equi6,equi8,gl}, fe-k1-quarter, "
                      "dg-k1, dg-k2, dg-k3-{equi6,equi8,gl})");
  };
  if (name.size() < 5 || name[2] != '-' || name[3] != 'k') return fail();
  const std::string kind = name.substr(0, 2);
  if (kind == "fe")
    v.kind = GDKind::FE;
  else if (kind == "dg")
    v.kind = GDKind::DG;
  else
    return fail();
  const char kc = name[4];
  if (kc < '1' || kc > '3') return fail();
  v.degree = kc - '0';
  const std::string rest = name.size() > 5 ? name.substr(5) : "";
  if (v.degree == 3) {
    if (rest == "-equi6")
      v.rule = "equi6";
    else if (rest == "-equi8")
      v.rule = "equi8";
    else if (rest == "-gl")
      v.rule = "gauss-lobatto";
    else
      return fail();
  } else if (rest == "-quarter" && v.degree == 1 && v.kind == GDKind::FE) {
    v.quarter = true;
  } else if (!rest.empty()) {
    return fail();
  }
  return v;
}

LumpingRule GDVariant::lumping_rule(int dim) const {
  if (!rule.empty()) {
    auto r = lumping_rule_from_name(rule);
    if (r.dim != dim) throw Unsupported("variant " + name + " is not available in " +
                                        std::to_string(dim) + "D");
    return r;
  }
  if (dim == 1) return lumping_rule_1d(degree == 1 ? Lumping1D::Trapezoidal : Lumping1D::Simpson);
  if (kind == GDKind::DG) throw Unsupported("DG is only implemented in 1D");
  return lumping_rule_2d(degree == 1 ? Lumping2D::Vertex : Lumping2D::VertexEdgeMidpoint);
}

// ---------------------------------------------------------------- build

namespace {

void check_rule_1d(int k, const LumpingRule& rule) {
  if (rule.dim != 1) throw IncompatibleRule("rule '" + rule.name + "' is not a 1D rule");
  if (k < 1 || k > 3) throw IncompatibleRule("1D degree must be 1, 2 or 3");
  if (rule.num_nodes() != k + 1)
    throw IncompatibleRule("rule '" + rule.name + "' has " + std::to_string(rule.num_nodes()) +
                           " nodes, P" + std::to_string(k) + " needs " + std::to_string(k + 1));
  if (rule.ref_nodes.front().x() != 0.0 || rule.ref_nodes.back().x() != 1.0)
    throw IncompatibleRule("rule '" + rule.name + "' must contain both cell endpoints");
  for (Index i = 0; i + 1 < rule.num_nodes(); ++i)
    if (!(rule.ref_nodes[i + 1].x() > rule.ref_nodes[i].x()))
      throw IncompatibleRule("rule nodes must be increasing");
}

void check_rule_2d(int k, const LumpingRule& rule) {
  if (rule.dim != 2) throw IncompatibleRule("rule '" + rule.name + "' is not a 2D rule");
  if (k < 1 || k > 2) throw IncompatibleRule("2D degree must be 1 or 2");
  if (rule.num_nodes() != (k + 1) * (k + 2) / 2)
    throw IncompatibleRule("rule '" + rule.name + "' does not match P" + std::to_string(k));
  const Point corners[3] = {Point(0, 0), Point(1, 0), Point(0, 1)};
  for (int i = 0; i < 3; ++i)
    if (rule.ref_nodes[i] != corners[i])
      throw IncompatibleRule("rule '" + rule.name + "' must list the three corners first");
  if (k == 2)
    for (int i = 0; i < 3; ++i) {
      const Point m = 0.5 * (corners[(i + 1) % 3] + corners[(i + 2) % 3]);
      if ((rule.ref_nodes[3 + i] - m).norm() > 1e-15)
        throw IncompatibleRule("rule '" + rule.name + "' must list edge midpoints after corners");
    }
}

CellGeometry interval_geometry(double a, double b) {
  CellGeometry g;
  g.origin = point1d(a);
  g.J << b - a, 0.0, 0.0, 1.0;
  g.Jinv << 1.0 / (b - a), 0.0, 0.0, 1.0;
  g.measure = b - a;
  g.centroid = point1d(0.5 * (a + b));
  return g;
}

CellGeometry triangle_geometry(const Point& p0, const Point& p1, const Point& p2) {
  CellGeometry g;
  g.origin = p0;
  g.J.col(0) = p1 - p0;
  g.J.col(1) = p2 - p0;
  g.Jinv = g.J.inverse();
  g.measure = 0.5 * g.J.determinant();
  g.centroid = (p0 + p1 + p2) / 3.0;
  return g;
}

} // namespace

void GradientDiscretisation::setup_basis() {
  exponents_.clear();
  if (dim_ == 1) {
    for (int m = 0; m <= degree_; ++m) exponents_.push_back({m, 0});
  } else {
    for (int d = 0; d <= degree_; ++d)
      for (int a = d; a >= 0; --a) exponents_.push_back({a, d - a});
  }
  const Index n = num_local();
  Eigen::MatrixXd V(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index m = 0; m < n; ++m)
      V(i, m) = std::pow(rule_.ref_nodes[i].x(), exponents_[m][0]) *
                std::pow(rule_.ref_nodes[i].y(), exponents_[m][1]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  if (lu.rank() < n) throw IncompatibleRule("rule nodes are not unisolvent");
  coeff_ = lu.inverse();

  cumulative_.assign(1, 0.0);
  for (double w : rule_.weight_fractions) cumulative_.push_back(cumulative_.back() + w);
  cumulative_.back() = 1.0;
}

void GradientDiscretisation::finalize() {
  node_weights_ = Vector::Zero(num_dofs());
  node_cell_.assign(static_cast<std::size_t>(num_dofs()), -1);
  for (Index c = 0; c < num_cells(); ++c) {
    const auto w = cell_weights(c);
    for (Index l = 0; l < num_local(); ++l) {
      const Index i = cell_dofs_[c][l];
      node_weights_[i] += w[l];
      if (node_cell_[i] < 0) node_cell_[i] = c;
    }
  }
  boundary_indices_.clear();
  for (Index i = 0; i < num_dofs(); ++i)
    if (boundary_[i]) boundary_indices_.push_back(i);
}

GradientDiscretisation GradientDiscretisation::build_fe(const Mesh1D& mesh, int k,
                                                        const LumpingRule& rule) {
  check_rule_1d(k, rule);
  GradientDiscretisation gd;
  gd.dim_ = 1;
  gd.kind_ = GDKind::FE;
  gd.degree_ = k;
  gd.rule_ = rule;
  gd.mesh1d_ = mesh;
  gd.h_ = mesh.h();
  gd.setup_basis();
  const Index n = mesh.num_cells();
  // Left-to-right numbering: vertex j is j*k, interior nodes of cell j follow it.
  gd.nodes_.resize(static_cast<std::size_t>(n * k + 1));
  gd.boundary_.assign(gd.nodes_.size(), false);
  for (Index j = 0; j < n; ++j) {
    gd.geometry_.push_back(interval_geometry(mesh.left(j), mesh.right(j)));
    std::vector<Index> dofs;
    for (Index l = 0; l <= k; ++l) {
      const Index i = j * k + l;
      dofs.push_back(i);
      gd.nodes_[i] = (l == k) ? point1d(mesh.right(j))
                              : point1d(mesh.left(j) + rule.ref_nodes[l].x() * mesh.length(j));
    }
    gd.cell_dofs_.push_back(std::move(dofs));
  }
  gd.boundary_.front() = gd.boundary_.back() = true;
  gd.finalize();
  return gd;
}

GradientDiscretisation GradientDiscretisation::build_fe(const Mesh2D& mesh, int k,
                                                        const LumpingRule& rule) {
  check_rule_2d(k, rule);
  GradientDiscretisation gd;
  gd.dim_ = 2;
  gd.kind_ = GDKind::FE;
  gd.degree_ = k;
  gd.rule_ = rule;
  gd.mesh2d_ = mesh;
  gd.h_ = mesh.h();
  gd.setup_basis();
  // Vertices keep their mesh ids; for k = 2 edge e carries node nv + e.
  gd.nodes_ = mesh.vertices();
  gd.boundary_.resize(gd.nodes_.size());
  for (Index v = 0; v < mesh.num_vertices(); ++v) gd.boundary_[v] = mesh.boundary_vertex(v);
  const Index nv = mesh.num_vertices();
  if (k == 2) {
    for (const auto& e : mesh.edges()) {
      gd.nodes_.push_back(0.5 * (mesh.vertices()[e.vertices[0]] + mesh.vertices()[e.vertices[1]]));
      gd.boundary_.push_back(e.boundary());
    }
  }
  for (Index t = 0; t < mesh.num_cells(); ++t) {
    const auto& tri = mesh.triangles()[t];
    gd.geometry_.push_back(triangle_geometry(mesh.vertices()[tri[0]], mesh.vertices()[tri[1]],
                                             mesh.vertices()[tri[2]]));
    std::vector<Index> dofs(tri.begin(), tri.end());
    if (k == 2)
      for (int e = 0; e < 3; ++e) dofs.push_back(nv + mesh.cell_edges(t)[e]);
    gd.cell_dofs_.push_back(std::move(dofs));
  }
  gd.finalize();
  return gd;
}

GradientDiscretisation GradientDiscretisation::build_dg(const Mesh1D& mesh, int k,
                                                        const LumpingRule& rule, double penalty) {
  check_rule_1d(k, rule);
  if (!(penalty > 0.0)) throw ConfigError("DG penalty must be positive");
  GradientDiscretisation gd;
  gd.dim_ = 1;
  gd.kind_ = GDKind::DG;
  gd.degree_ = k;
  gd.rule_ = rule;
  gd.penalty_ = penalty;
  gd.mesh1d_ = mesh;
  gd.h_ = mesh.h();
  gd.setup_basis();
  const Index n = mesh.num_cells();
  // Index 0 and the last index are the boundary-jump unknowns at x = 0 and 1.
  const Index card = (k + 1) * n + 2;
  gd.nodes_.resize(static_cast<std::size_t>(card));
  gd.boundary_.assign(gd.nodes_.size(), false);
  gd.nodes_.front() = point1d(mesh.vertices().front());
  gd.nodes_.back() = point1d(mesh.vertices().back());
  gd.boundary_.front() = gd.boundary_.back() = true;
  for (Index j = 0; j < n; ++j) {
    gd.geometry_.push_back(interval_geometry(mesh.left(j), mesh.right(j)));
    std::vector<Index> dofs;
    for (Index l = 0; l <= k; ++l) {
      const Index i = 1 + j * (k + 1) + l;
      dofs.push_back(i);
      gd.nodes_[i] = (l == k) ? point1d(mesh.right(j))
                              : point1d(mesh.left(j) + rule.ref_nodes[l].x() * mesh.length(j));
    }
    gd.cell_dofs_.push_back(std::move(dofs));
  }
  for (Index j = 0; j <= n; ++j) {
    DGFace f;
    f.x = mesh.vertices()[j];
    f.left_cell = j > 0 ? j - 1 : -1;
    f.right_cell = j < n ? j : -1;
    if (j == 0) {
      f.ghost = 0;
      f.h = mesh.length(0);
    } else if (j == n) {
      f.ghost = card - 1;
      f.h = mesh.length(n - 1);
    } else {
      f.h = 0.5 * (mesh.length(j - 1) + mesh.length(j));
    }
    gd.faces_.push_back(f);
  }
  gd.finalize();
  gd.node_cell_.front() = 0;
  gd.node_cell_.back() = n - 1;
  return gd;
}

// ---------------------------------------------------------------- queries

std::vector<double> GradientDiscretisation::cell_weights(Index cell) const {
  std::vector<double> w(rule_.weight_fractions);
  const double m = geometry_[cell].measure;
  for (auto& x : w) x *= m;
  return w;
}

double GradientDiscretisation::domain_measure() const {
  double s = 0.0;
  for (const auto& g : geometry_) s += g.measure;
  return s;
}

Index GradientDiscretisation::locate(const Point& x) const {
  if (dim_ == 1) return mesh1d_->locate(x.x());
  return mesh2d_->locate(x);
}

Point GradientDiscretisation::to_reference(Index cell, const Point& x) const {
  const auto& g = geometry_[cell];
  Point xi = g.Jinv * (x - g.origin);
  if (dim_ == 1) xi.y() = 0.0;
  return xi;
}

Point GradientDiscretisation::to_physical(Index cell, const Point& xi) const {
  const auto& g = geometry_[cell];
  Point x = g.origin + g.J * xi;
  if (dim_ == 1) x.y() = 0.0;
  return x;
}

Vector GradientDiscretisation::ref_basis(const Point& xi) const {
  const Index n = num_local();
  Vector mono(n);
  for (Index m = 0; m < n; ++m)
    mono[m] = std::pow(xi.x(), exponents_[m][0]) * std::pow(xi.y(), exponents_[m][1]);
  return coeff_.transpose() * mono;
}

Eigen::MatrixX2d GradientDiscretisation::ref_grad(const Point& xi) const {
  const Index n = num_local();
  Eigen::MatrixX2d dmono(n, 2);
  for (Index m = 0; m < n; ++m) {
    const int a = exponents_[m][0];
    const int b = exponents_[m][1];
    dmono(m, 0) = a == 0 ? 0.0 : a * std::pow(xi.x(), a - 1) * std::pow(xi.y(), b);
    dmono(m, 1) = b == 0 ? 0.0 : b * std::pow(xi.x(), a) * std::pow(xi.y(), b - 1);
  }
  return coeff_.transpose() * dmono;
}

Eigen::MatrixX2d GradientDiscretisation::phys_grad(Index cell, const Point& xi) const {
  return ref_grad(xi) * geometry_[cell].Jinv;
}

Index GradientDiscretisation::region(const Point& xi) const {
  if (dim_ == 1) {
    const double t = std::clamp(xi.x(), 0.0, 1.0);
    Index last = 0;
    for (Index i = 0; i < num_local(); ++i) {
      if (rule_.weight_fractions[i] <= 0.0) continue;
      last = i;
      if (t < cumulative_[i + 1]) return i;
    }
    return last;
  }
  const double lambda[3] = {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
  if (num_local() == 3)
    return std::max_element(lambda, lambda + 3) - lambda;
  // Region of midpoint i: the sub-triangle (centroid, corner i+1, corner i+2),
  // i.e. where lambda_i is smallest.
  return 3 + (std::min_element(lambda, lambda + 3) - lambda);
}

Vector GradientDiscretisation::local_values(const Vector& v, Index cell) const {
  const auto& dofs = cell_dofs_[cell];
  Vector loc(static_cast<Index>(dofs.size()));
  for (std::size_t l = 0; l < dofs.size(); ++l) loc[static_cast<Index>(l)] = v[dofs[l]];
  return loc;
}

double GradientDiscretisation::pi_lumped(const Vector& v, const Point& x, Index cell) const {
  if (cell < 0) cell = locate(x);
  return v[cell_dofs_[cell][region(to_reference(cell, x))]];
}

double GradientDiscretisation::pi_star(const Vector& v, const Point& x, Index cell) const {
  if (cell < 0) cell = locate(x);
  return ref_basis(to_reference(cell, x)).dot(local_values(v, cell));
}

Point GradientDiscretisation::grad_d(const Vector& v, const Point& x, Index cell) const {
  if (cell < 0) cell = locate(x);
  return phys_grad(cell, to_reference(cell, x)).transpose() * local_values(v, cell);
}

std::vector<std::vector<double>> GradientDiscretisation::q_d(const CellField& g) const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(num_cells()));
  for (Index c = 0; c < num_cells(); ++c) {
    const Point inside = geometry_[c].centroid;
    for (Index l = 0; l < num_local(); ++l)
      out[c].push_back(g(nodes_[cell_dofs_[c][l]], inside));
  }
  return out;
}

Vector GradientDiscretisation::interpolate_nodal(const CellField& phi) const {
  Vector v(num_dofs());
  for (Index i = 0; i < num_dofs(); ++i) v[i] = phi(nodes_[i], geometry_[node_cell_[i]].centroid);
  return v;
}

Vector apply_nonlinearity(const Nonlinearity& g, const Vector& v) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = g(v[i]);
  return out;
}

} // namespace gdml
