#pragma once

#include "gdml/common.hpp"
#include "gdml/gd.hpp"
#include "gdml/solver.hpp"
#include "gdml/system.hpp"
#include "gdml/testcases.hpp"

#include <array>
#include <utility>
#include <vector>

namespace gdml {

struct ErrorReport {
  double e_beta_pi = 0.0;
  double e_zeta_pi = 0.0;
  double e_zeta_grad_interp = 0.0;
  double e_zeta_grad = 0.0;
  Index card_i = 0;
  double h = 0.0;
  bool excluded = false;
  Index cells_dropped = 0;
};

struct ErrorOptions {
  /// Drop every cell that meets one of the case's exclusion windows.
  bool exclude_singular = false;
  int quadrature_degree = 10;
};

/// The four L2 errors:
///   e_beta_pi          = |beta(Q_D u) - Pi_D beta(u_h)|
///   e_zeta_pi          = |Pi_D (I_D zeta(u) - zeta(u_h))|
///   e_zeta_grad_interp = |grad_D (I_D zeta(u) - zeta(u_h))|
///   e_zeta_grad        = |grad zeta(u) - grad_D zeta(u_h)|
ErrorReport compute_errors(const GradientDiscretisation& gd, const TestCase& tc,
                           const DiscreteSystem& sys, const SolveResult& result,
                           const ErrorOptions& options = {});

/// max over cells and positive-weight nodes of |(I_D zeta(u))_i - zeta(u|_K(x_i))|,
/// i.e. Pi_D I_D zeta(u) - zeta(Q_D u) sampled region by region.
double term_d_defect(const GradientDiscretisation& gd, const TestCase& tc);

/// Convex polygon pieces of triangle t cut along the lines x + y = sqrt(2) s.
std::vector<std::vector<Point>> split_triangle(const std::array<Point, 3>& tri,
                                               const std::vector<double>& s_values);

struct RegressionFit {
  double C = 0.0;
  double alpha = 0.0;
  double r2 = 0.0;
  int points = 0;
  int dropped = 0;
};

/// Least squares of log E against -(1/d) log Card(I); zero errors are dropped.
/// Throws InsufficientData with fewer than two usable points.
RegressionFit fit_rate(const std::vector<std::pair<double, double>>& card_and_error, int d);

/// Fit r = C (h/h0)^alpha, h0 the first (coarsest) size.
RegressionFit fit_ratio(const std::vector<double>& h, const std::vector<double>& ratio);

} // namespace gdml
