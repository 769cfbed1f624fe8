#pragma once

#include "gdml/quadrature.hpp"

#include <string>
#include <vector>

namespace gdml {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Every shipped rule passes verify_exactness at its DOE and fails at DOE+1.
std::vector<CheckResult> check_quadrature();
std::vector<CheckResult> check_quadrature(const std::vector<LumpingRule>& rules);
/// Area, conformity and shape of every 2D family and the quarter refinement.
std::vector<CheckResult> check_meshes();
/// Semismooth Jacobian against central differences at generic states (relative 1e-5).
std::vector<CheckResult> check_jacobians();
/// beta(u) - div(grad zeta(u)) - f of the exact data, away from singular points (1e-4).
std::vector<CheckResult> check_manufactured();
/// Pi_D I_D zeta(u) = zeta(Q_D u) region by region (1e-12).
std::vector<CheckResult> check_term_d();
/// Two initial guesses give the same Pi_D u and zeta(u) (1e-7).
std::vector<CheckResult> check_uniqueness();
/// Discrete energy identity residual <= 1e-8 (1 + |rhs|).
std::vector<CheckResult> check_energy();

std::vector<CheckResult> verify_all();

} // namespace gdml
