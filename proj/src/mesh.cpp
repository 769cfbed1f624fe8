#include "gdml/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <utility>

namespace gdml {

// ---------------------------------------------------------------- 1D

Mesh1D::Mesh1D(std::vector<double> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw InvalidMesh("a 1D mesh needs at least two vertices");
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    const double len = vertices_[i + 1] - vertices_[i];
    if (!(len > 0.0)) throw InvalidMesh("1D vertices must be strictly increasing");
    h_ = std::max(h_, len);
  }
}

Index Mesh1D::locate(double x) const {
  const double tol = 1e-14 * domain_length();
  if (x < vertices_.front() - tol || x > vertices_.back() + tol)
    throw OutOfDomain("point " + std::to_string(x) + " outside the 1D domain");
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), x);
  Index j = static_cast<Index>(it - vertices_.begin()) - 1;
  return std::clamp<Index>(j, 0, num_cells() - 1);
}

Mesh1D uniform_1d(Index n) {
  if (n < 1) throw InvalidMesh("uniform_1d needs N >= 1");
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  for (Index i = 0; i <= n; ++i) v[i] = static_cast<double>(i) / static_cast<double>(n);
  return Mesh1D(std::move(v));
}

Mesh1D random_1d(Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidMesh("random_1d needs N >= 1");
  SplitMix64 rng(seed);
  std::vector<double> H(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& h : H) {
    h = 3.0 + rng.uniform();
    total += h;
  }
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    acc += H[i];
    v[i + 1] = acc / total;
  }
  v.back() = 1.0;
  return Mesh1D(std::move(v));
}

// ---------------------------------------------------------------- 2D

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

} // namespace

Mesh2D::Mesh2D(std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (triangles_.empty()) throw InvalidMesh("mesh has no triangles");
  const Index nv = num_vertices();
  std::map<std::pair<Index, Index>, Index> edge_of;
  cell_edges_.resize(triangles_.size());
  for (Index t = 0; t < num_cells(); ++t) {
    const auto& tri = triangles_[t];
    for (Index v : tri)
      if (v < 0 || v >= nv) throw InvalidMesh("triangle references a missing vertex");
    if (!(area(t) > 0.0))
      throw InvalidMesh("triangle " + std::to_string(t) + " has non-positive area");
    for (int e = 0; e < 3; ++e) {
      Index a = tri[(e + 1) % 3];
      Index b = tri[(e + 2) % 3];
      auto key = std::minmax(a, b);
      auto [it, inserted] = edge_of.try_emplace({key.first, key.second}, num_edges());
      if (inserted) {
        Edge edge;
        edge.vertices = {key.first, key.second};
        edge.cells = {t, -1};
        edges_.push_back(edge);
      } else {
        Edge& edge = edges_[it->second];
        if (edge.cells[1] >= 0)
          throw InvalidMesh("non-conforming mesh: edge shared by more than two triangles");
        edge.cells[1] = t;
      }
      cell_edges_[t][e] = it->second;
    }
  }
  boundary_vertex_.assign(static_cast<std::size_t>(nv), false);
  for (const auto& e : edges_)
    if (e.boundary()) boundary_vertex_[e.vertices[0]] = boundary_vertex_[e.vertices[1]] = true;

  shape_regularity_ = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < num_cells(); ++t) {
    const double d = diameter(t);
    h_ = std::max(h_, d);
    shape_regularity_ = std::min(shape_regularity_, inradius(t) / d);
  }

  bbox_lo_ = bbox_hi_ = vertices_.front();
  for (const auto& p : vertices_) {
    bbox_lo_ = bbox_lo_.cwiseMin(p);
    bbox_hi_ = bbox_hi_.cwiseMax(p);
  }
  grid_n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(num_cells()) / 2.0)));
  buckets_.assign(static_cast<std::size_t>(grid_n_) * grid_n_, {});
  const Point span = (bbox_hi_ - bbox_lo_).cwiseMax(Point(1e-300, 1e-300));
  auto cell_of = [&](double v, double lo, double w) {
    return std::clamp(static_cast<int>((v - lo) / w * grid_n_), 0, grid_n_ - 1);
  };
  for (Index t = 0; t < num_cells(); ++t) {
    Point lo = vertices_[triangles_[t][0]], hi = lo;
    for (Index v : triangles_[t]) {
      lo = lo.cwiseMin(vertices_[v]);
      hi = hi.cwiseMax(vertices_[v]);
    }
    const int i0 = cell_of(lo.x(), bbox_lo_.x(), span.x());
    const int i1 = cell_of(hi.x(), bbox_lo_.x(), span.x());
    const int j0 = cell_of(lo.y(), bbox_lo_.y(), span.y());
    const int j1 = cell_of(hi.y(), bbox_lo_.y(), span.y());
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * grid_n_ + i].push_back(t);
  }
}

double Mesh2D::area(Index t) const {
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh2D::diameter(Index t) const {
  const auto& tri = triangles_[t];
  double d = 0.0;
  for (int e = 0; e < 3; ++e)
    d = std::max(d, (vertices_[tri[(e + 1) % 3]] - vertices_[tri[e]]).norm());
  return d;
}

double Mesh2D::inradius(Index t) const {
  const auto& tri = triangles_[t];
  double perimeter = 0.0;
  for (int e = 0; e < 3; ++e) perimeter += (vertices_[tri[(e + 1) % 3]] - vertices_[tri[e]]).norm();
  return 2.0 * area(t) / perimeter;
}

double Mesh2D::total_area() const {
  double a = 0.0;
  for (Index t = 0; t < num_cells(); ++t) a += area(t);
  return a;
}

Index Mesh2D::num_boundary_edges() const {
  return std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.boundary(); });
}

Index Mesh2D::locate(const Point& p) const {
  const Point span = (bbox_hi_ - bbox_lo_).cwiseMax(Point(1e-300, 1e-300));
  const double tol = 1e-12;
  const int i = static_cast<int>((p.x() - bbox_lo_.x()) / span.x() * grid_n_);
  const int j = static_cast<int>((p.y() - bbox_lo_.y()) / span.y() * grid_n_);
  if (i >= -1 && i <= grid_n_ && j >= -1 && j <= grid_n_) {
    const int ic = std::clamp(i, 0, grid_n_ - 1);
    const int jc = std::clamp(j, 0, grid_n_ - 1);
    for (Index t : buckets_[static_cast<std::size_t>(jc) * grid_n_ + ic]) {
      const auto& tri = triangles_[t];
      const double a = area(t);
      const double l0 = signed_area(p, vertices_[tri[1]], vertices_[tri[2]]) / a;
      const double l1 = signed_area(vertices_[tri[0]], p, vertices_[tri[2]]) / a;
      const double l2 = 1.0 - l0 - l1;
      if (l0 >= -tol && l1 >= -tol && l2 >= -tol) return t;
    }
  }
  throw OutOfDomain("point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                    ") is not in any triangle");
}

MeshFamily2D mesh_family_from_name(const std::string& name) {
  if (name == "equilateral") return MeshFamily2D::Equilateral;
  if (name == "split-squares" || name == "splitsquares") return MeshFamily2D::SplitSquares;
  if (name == "randomized" || name == "random") return MeshFamily2D::Randomized;
  throw ConfigError("unknown 2D mesh family '" + name +
                    "' (expected equilateral, split-squares or randomized)");
}

std::string to_string(MeshFamily2D family) {
  switch (family) {
    case MeshFamily2D::Equilateral: return "equilateral";
    case MeshFamily2D::SplitSquares: return "split-squares";
    case MeshFamily2D::Randomized: return "randomized";
  }
  return "?";
}

namespace {

std::vector<Point> grid_vertices(Index n) {
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i)
      v.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  return v;
}

std::vector<std::array<Index, 3>> split_square_triangles(Index n) {
  std::vector<std::array<Index, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * n * n));
  auto id = [n](Index i, Index j) { return j * (n + 1) + i; };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      // Diagonal from (i,j) to (i+1,j+1).
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return tris;
}

// Rows of nodes at heights y = j/M with M = round(2N/sqrt(3)), so row spacing
// is close to the height sqrt(3)/2 * (1/N) of an equilateral triangle of side
// 1/N. Even rows hold x = i/N; odd rows are shifted by half a step and closed
// with the boundary nodes x = 0 and x = 1. Consecutive rows are stitched by a
// zipper sweep from left to right, which yields the alternating up/down pattern
// with half-width triangles at the vertical sides.
Mesh2D equilateral(Index n) {
  const Index m = std::max<Index>(1, std::llround(2.0 * static_cast<double>(n) / std::sqrt(3.0)));
  std::vector<Point> verts;
  std::vector<std::vector<Index>> rows(static_cast<std::size_t>(m) + 1);
  for (Index j = 0; j <= m; ++j) {
    const double y = static_cast<double>(j) / m;
    auto add = [&](double x) {
      rows[j].push_back(static_cast<Index>(verts.size()));
      verts.emplace_back(x, y);
    };
    if (j % 2 == 0) {
      for (Index i = 0; i <= n; ++i) add(static_cast<double>(i) / n);
    } else {
      add(0.0);
      for (Index i = 0; i < n; ++i) add((static_cast<double>(i) + 0.5) / n);
      add(1.0);
    }
  }
  std::vector<std::array<Index, 3>> tris;
  for (Index j = 0; j < m; ++j) {
    const auto& B = rows[j];
    const auto& T = rows[j + 1];
    std::size_t a = 0, b = 0;
    while (a + 1 < B.size() || b + 1 < T.size()) {
      const bool advance_bottom =
          b + 1 == T.size() ||
          (a + 1 < B.size() && verts[B[a + 1]].x() < verts[T[b + 1]].x());
      if (advance_bottom) {
        tris.push_back({B[a], B[a + 1], T[b]});
        ++a;
      } else {
        tris.push_back({B[a], T[b + 1], T[b]});
        ++b;
      }
    }
  }
  return Mesh2D(std::move(verts), std::move(tris));
}

Mesh2D randomized(Index level, std::uint64_t seed) {
  const Index n = Index{1} << level;
  const auto base = grid_vertices(n);
  const auto tris = split_square_triangles(n);
  // Local min incident edge length per vertex.
  std::vector<double> min_edge(base.size(), std::numeric_limits<double>::infinity());
  for (const auto& t : tris)
    for (int e = 0; e < 3; ++e) {
      const Index a = t[e], b = t[(e + 1) % 3];
      const double len = (base[a] - base[b]).norm();
      min_edge[a] = std::min(min_edge[a], len);
      min_edge[b] = std::min(min_edge[b], len);
    }
  double scale = 0.25;
  for (int attempt = 0; attempt <= 5; ++attempt, scale *= 0.5) {
    SplitMix64 rng(seed);
    auto verts = base;
    for (Index j = 1; j < n; ++j)
      for (Index i = 1; i < n; ++i) {
        const Index v = j * (n + 1) + i;
        // Uniform in the disk of radius scale * min_edge.
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        const double r = scale * min_edge[v] * std::sqrt(rng.uniform());
        verts[v] += Point(r * std::cos(theta), r * std::sin(theta));
      }
    bool valid = true;
    for (const auto& t : tris)
      if (!(signed_area(verts[t[0]], verts[t[1]], verts[t[2]]) > 0.0)) {
        valid = false;
        break;
      }
    if (valid) return Mesh2D(std::move(verts), tris);
  }
  throw InvalidMesh("randomized mesh: no valid displacement after 5 retries");
}

} // namespace

Mesh2D triangulate_2d(MeshFamily2D family, Index n, std::uint64_t seed) {
  switch (family) {
    case MeshFamily2D::Equilateral:
      if (n < 2) throw InvalidMesh("equilateral mesh needs N >= 2");
      return equilateral(n);
    case MeshFamily2D::SplitSquares:
      if (n < 1) throw InvalidMesh("split-squares mesh needs N >= 1");
      return Mesh2D(grid_vertices(n), split_square_triangles(n));
    case MeshFamily2D::Randomized:
      if (n < 1 || n > 12) throw InvalidMesh("randomized mesh level must be in [1, 12]");
      return randomized(n, seed);
  }
  throw InvalidMesh("unknown mesh family");
}

Mesh2D refine_quarter(const Mesh2D& mesh) {
  std::vector<Point> verts = mesh.vertices();
  const Index nv = mesh.num_vertices();
  for (const auto& e : mesh.edges())
    verts.push_back(0.5 * (mesh.vertices()[e.vertices[0]] + mesh.vertices()[e.vertices[1]]));
  std::vector<std::array<Index, 3>> tris;
  tris.reserve(static_cast<std::size_t>(4 * mesh.num_cells()));
  for (Index t = 0; t < mesh.num_cells(); ++t) {
    const auto& v = mesh.triangles()[t];
    const auto& ce = mesh.cell_edges(t);
    // m[i] is the midpoint of the edge opposite local vertex i.
    const Index m0 = nv + ce[0], m1 = nv + ce[1], m2 = nv + ce[2];
    tris.push_back({v[0], m2, m1});
    tris.push_back({m2, v[1], m0});
    tris.push_back({m1, m0, v[2]});
    tris.push_back({m0, m1, m2});
  }
  return Mesh2D(std::move(verts), std::move(tris));
}

void write_mesh(std::ostream& os, const Mesh1D& mesh) {
  os.precision(17);
  os << "vertices " << mesh.num_vertices() << '\n';
  for (double x : mesh.vertices()) os << x << " 0\n";
  os << "cells " << mesh.num_cells() << '\n';
  for (Index j = 0; j < mesh.num_cells(); ++j) os << j << ' ' << j + 1 << '\n';
}

void write_mesh(std::ostream& os, const Mesh2D& mesh) {
  os.precision(17);
  os << "vertices " << mesh.num_vertices() << '\n';
  for (const auto& p : mesh.vertices()) os << p.x() << ' ' << p.y() << '\n';
  os << "cells " << mesh.num_cells() << '\n';
  for (const auto& t : mesh.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

} // namespace gdml
