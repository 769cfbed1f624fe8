#pragma once

#include "gdml/common.hpp"
#include "gdml/mesh.hpp"
#include "gdml/metrics.hpp"
#include "gdml/model.hpp"
#include "gdml/solver.hpp"
#include "gdml/testcases.hpp"

#include <vector>

namespace gdml {

/// Conforming P1 Galerkin scheme on w = (beta+zeta)(u):
///   int rho(w_h) v + int Lambda grad mu(w_h) . grad v = int f v.
/// Since w_h is affine on each cell, int_K (mu(w_h))' phi_i' equals
/// (A_K mu(w))_i exactly; the reaction and load integrals use Gauss rules of
/// degree 10 on cells split where w_h crosses a kink of mu or rho.
struct ConformingResult {
  Vector w;
  /// mu(w_i) at the vertices.
  Vector mu_w;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
  /// int rho(w_h) w_h + int mu'(w_h)|w_h'|^2 - int f w_h (diagnostic only).
  double nu_energy = 0.0;
};

ConformingResult solve_conforming(const Mesh1D& mesh, const TestCase& tc,
                                  const SolverConfig& cfg = {});

/// Analogues of the four errors: |beta(u) - rho(w_h)|, |zeta(u) - mu(w_h)|,
/// |grad(I_h zeta(u) - I_h mu(w))| and |grad zeta(u) - grad mu(w_h)|.
ErrorReport conforming_errors(const Mesh1D& mesh, const TestCase& tc, const ConformingResult& r,
                              const ErrorOptions& options = {});

} // namespace gdml
