#pragma once

#include "gdml/common.hpp"
#include "gdml/gd.hpp"
#include "gdml/model.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace gdml {

/// Exact 1D data as functions of (x, sel): x is where the formula is
/// evaluated and sel only chooses the piece, so one-sided limits at a
/// breakpoint are obtained with sel slightly off x.
struct Profile1D {
  using Fn = std::function<double(double x, double sel)>;
  Fn u;
  Fn zeta_u;
  Fn dzeta_u;
  Fn f;
};

/// Piecewise constant flux F on [a, b].
struct FluxPiece {
  double a;
  double b;
  double value;
};

struct TestCase {
  std::string id;
  int dim = 1;
  NonlinearModel model;
  Profile1D profile;
  CellField u;
  CellField zeta_u;
  CellVectorField grad_zeta_u;
  CellField f;
  std::vector<FluxPiece> flux;
  /// Where u or its derivatives are not smooth. In 2D these are values of the
  /// diagonal coordinate s = (x+y)/sqrt(2), i.e. the lines x + y = sqrt(2) s.
  std::vector<double> singular_points;
  /// singular_points plus kinks or jumps of the data (f, F).
  std::vector<double> breakpoints;
  /// Optional exclusion windows, same coordinate as singular_points.
  std::vector<std::pair<double, double>> exclusion_windows;

  bool has_flux() const { return !flux.empty(); }
  /// Selector point for one-sided evaluation: x nudged toward `inside`.
  static Point selector(const Point& x, const Point& inside);
  /// Diagonal coordinate (x in 1D).
  double coordinate(const Point& x) const;
};

struct S1Constants {
  double gamma;
  double a;
  double b;
  int iterations;
  double residual;
};

/// Newton on 3(1/2-g)-1 + a e^g + b e^-g = 0, -3 + a e^g - b e^-g = 0,
/// -3 + a - b = 0; throws ConstantsNotConverged.
S1Constants solve_s1_constants();

TestCase case_r1();
TestCase case_p1();
TestCase case_p2();
TestCase case_s1();
TestCase case_s2();
TestCase case_s3();
/// u(x,y) = u1((x+y)/sqrt(2)); throws Unsupported when F != 0.
TestCase lift_to_2d(const TestCase& case_1d);

/// r1, p1, p2, s1, s2, s3, p1-2d, p2-2d, s1-2d, s2-2d
TestCase case_from_name(const std::string& id);
std::vector<std::string> case_names();

/// beta(u) - Laplacian(zeta(u)) - f at x with a central finite-difference
/// Laplacian of step `step` (F-free cases only).
double pde_residual(const TestCase& tc, const Point& x, double step = 1e-5);

} // namespace gdml
