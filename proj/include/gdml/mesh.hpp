#pragma once

#include "gdml/common.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gdml {

/// SplitMix64 (Steele, Lea & Flood). Bit-exact update:
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
/// uniform() maps the top 53 bits to the open interval (0,1) as
/// ((z >> 11) + 0.5) * 2^-53.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

class Mesh1D {
public:
  explicit Mesh1D(std::vector<double> vertices);

  const std::vector<double>& vertices() const { return vertices_; }
  Index num_cells() const { return static_cast<Index>(vertices_.size()) - 1; }
  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  double left(Index cell) const { return vertices_[cell]; }
  double right(Index cell) const { return vertices_[cell + 1]; }
  double length(Index cell) const { return vertices_[cell + 1] - vertices_[cell]; }
  double h() const { return h_; }
  double domain_length() const { return vertices_.back() - vertices_.front(); }

  /// Index of the cell containing x (closed intervals, leftmost wins); throws OutOfDomain.
  Index locate(double x) const;

private:
  std::vector<double> vertices_;
  double h_ = 0.0;
};

struct Edge {
  std::array<Index, 2> vertices;
  /// Adjacent triangles; cells[1] == -1 on the boundary.
  std::array<Index, 2> cells{-1, -1};
  bool boundary() const { return cells[1] < 0; }
};

class Mesh2D {
public:
  /// Builds topology and validates; throws InvalidMesh on degenerate or
  /// non-conforming input. Triangles must be counter-clockwise.
  Mesh2D(std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Local edge e of triangle t is opposite its local vertex e.
  const std::array<Index, 3>& cell_edges(Index t) const { return cell_edges_[t]; }
  bool boundary_vertex(Index v) const { return boundary_vertex_[v]; }

  Index num_cells() const { return static_cast<Index>(triangles_.size()); }
  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }

  double area(Index t) const;
  double diameter(Index t) const;
  double inradius(Index t) const;
  double total_area() const;
  double h() const { return h_; }
  /// min over cells of inradius / diameter.
  double shape_regularity() const { return shape_regularity_; }
  Index num_boundary_edges() const;

  /// Triangle containing p (closed, first match); throws OutOfDomain.
  Index locate(const Point& p) const;

private:
  std::vector<Point> vertices_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<Index, 3>> cell_edges_;
  std::vector<bool> boundary_vertex_;
  double h_ = 0.0;
  double shape_regularity_ = 0.0;
  // Bucket grid for point location.
  int grid_n_ = 1;
  Point bbox_lo_{0, 0}, bbox_hi_{1, 1};
  std::vector<std::vector<Index>> buckets_;
};

Mesh1D uniform_1d(Index n);
Mesh1D random_1d(Index n, std::uint64_t seed);

enum class MeshFamily2D { Equilateral, SplitSquares, Randomized };

MeshFamily2D mesh_family_from_name(const std::string& name);
std::string to_string(MeshFamily2D family);

/// Triangulations of the unit square. For Randomized, n is the level (3, 4, 5)
/// and the base grid has 2^level squares per side.
Mesh2D triangulate_2d(MeshFamily2D family, Index n, std::uint64_t seed = 0);

/// Splits every triangle in four by joining its edge midpoints.
Mesh2D refine_quarter(const Mesh2D& mesh);

/// Plain-text export: "vertices <n>" then one "x y" line each, then
/// "cells <m>" and one connectivity line each.
void write_mesh(std::ostream& os, const Mesh1D& mesh);
void write_mesh(std::ostream& os, const Mesh2D& mesh);

} // namespace gdml
