#pragma once

#include "gdml/common.hpp"
#include "gdml/model.hpp"
#include "gdml/system.hpp"

#include <optional>
#include <vector>

namespace gdml {

struct SolverConfig {
  double tol_abs = 1e-11;
  double tol_rel = 1e-9;
  int max_iters = 200;
  double backtrack = 0.5;
  double min_step = 0x1.0p-20;
  double armijo = 1e-4;
  /// Regularization schedule for zeta + eps Id when plain Newton stagnates.
  std::vector<double> continuation_eps{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  int stagnation_window = 10;
  double stagnation_decrease = 1e-3;

  void validate() const;
};

struct SolveResult {
  /// Mixed unknowns: u_i, or w_i = zeta(u)_i where hybrid[i].
  Vector u;
  std::vector<bool> hybrid;
  int iterations = 0;
  double final_residual = 0.0;
  double tolerance = 0.0;
  bool used_continuation = false;
  bool converged = false;
  std::vector<double> residual_history;
};

/// Damped semismooth Newton with Armijo backtracking; on stagnation, restarts
/// through zeta_eps continuation. The initial guess defaults to the solution
/// of the linear problem beta = zeta = Id. Throws NoConvergence.
SolveResult solve(const DiscreteSystem& sys, const NonlinearModel& model,
                  const SolverConfig& cfg = {}, const std::optional<Vector>& initial = {});

/// Sparse direct solve (LU); throws SingularMatrix.
Vector linear_solve(const SparseMatrix& matrix, const Vector& rhs);

/// zeta(u) and beta(u) of a solve result as full vectors. beta(u) is NaN at
/// hybrid indices, which carry no measure.
Vector zeta_of(const SolveResult& r, const DiscreteSystem& sys, const NonlinearModel& model);
Vector beta_of(const SolveResult& r, const NonlinearModel& model);

} // namespace gdml
