#include "gdml/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <sstream>

namespace gdml {

void SolverConfig::validate() const {
  if (!(tol_abs > 0.0) || !(tol_rel > 0.0)) throw ConfigError("solver tolerances must be > 0");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("damping factor must be in (0,1)");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(min_step > 0.0) || !(armijo > 0.0)) throw ConfigError("line-search constants must be > 0");
}

Vector linear_solve(const SparseMatrix& matrix, const Vector& rhs) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size())
    throw MismatchedSizes("linear_solve: matrix and right-hand side sizes differ");
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(matrix);
  if (lu.info() != Eigen::Success) throw SingularMatrix("sparse LU factorization failed");
  Vector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SingularMatrix("sparse LU solve failed");
  return x;
}

namespace {

enum class Status { Converged, Stagnated, MaxIterations };

// Newton runs on y: y_i = (beta+zeta)(u_i) at free indices with positive
// mass, y_i = u_i (or w_i at hybrid indices) elsewhere. In y the Jacobian is
// M diag(rho') + A diag(mu') with rho' + mu' = 1, which stays well scaled
// across the plateaus of zeta.
class Unknowns {
public:
  Unknowns(const DiscreteSystem& sys, const NonlinearModel& model) : sys_(sys), model_(model), tm_(model) {}

  bool transformed(Index i) const { return !sys_.constrained[i] && !sys_.hybrid[i]; }

  Vector to_u(const Vector& y) const {
    Vector x = y;
    for (Index i : sys_.free_dofs)
      if (transformed(i)) x[i] = tm_.inverse(y[i]);
    return x;
  }

  Vector to_y(const Vector& x) const {
    Vector y = x;
    for (Index i : sys_.free_dofs)
      if (transformed(i)) y[i] = tm_.forward(x[i]);
    return y;
  }

  /// dG/dy = dG/du diag(du/dy).
  SparseMatrix jacobian(const Vector& x) const {
    SparseMatrix J = sys_.jacobian(model_, x);
    for (Index k = 0; k < J.outerSize(); ++k) {
      const Index i = sys_.free_dofs[k];
      if (!transformed(i)) continue;
      const double d = model_.beta().gderiv(x[i]) + model_.zeta().gderiv(x[i]);
      const double scale = d > 0.0 ? 1.0 / d : 1.0;
      for (SparseMatrix::InnerIterator it(J, k); it; ++it) it.valueRef() *= scale;
    }
    return J;
  }

  /// Jacobian in y is diag(d) + A_ff diag(c).
  void coefficients(const Vector& x, Vector& c, Vector& d) const {
    for (Index k = 0; k < sys_.num_free(); ++k) {
      const Index i = sys_.free_dofs[k];
      if (sys_.hybrid[i]) {
        c[k] = 1.0;
        d[k] = 0.0;
        continue;
      }
      const double db = model_.beta().gderiv(x[i]);
      const double dz = model_.zeta().gderiv(x[i]);
      const double s = db + dz > 0.0 ? 1.0 / (db + dz) : 1.0;
      c[k] = dz * s;
      d[k] = sys_.M[i] * db * s;
    }
  }

  const NonlinearModel& model() const { return model_; }

private:
  const DiscreteSystem& sys_;
  const NonlinearModel& model_;
  TransformedModel tm_;
};

// Newton steps in y. With c = mu' and d = M rho' the Jacobian is
// diag(d) + A_ff diag(c). On columns with c > 0, z = c dy solves the symmetric
// system (diag(d/c) + A_RR) z = -G_R; the remaining unknowns (c = 0, plateaus
// of zeta) follow from their own rows. The pattern is that of A_ff for every
// active set, so the ordering is computed once.
class StepSolver {
public:
  StepSolver(const DiscreteSystem& sys) : sys_(sys), K_(sys.A_ff) {}

  Vector step(const Unknowns& var, const Vector& x, const Vector& G) {
    const Index n = sys_.num_free();
    Vector c(n), d(n);
    var.coefficients(x, c, d);
    std::vector<bool> live(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) live[k] = c[k] > kLive;
    for (Index k = 0; k < n; ++k) {
      SparseMatrix::InnerIterator src(sys_.A_ff, k);
      for (SparseMatrix::InnerIterator it(K_, k); it; ++it, ++src) {
        const Index r = it.row();
        if (live[k] && live[r])
          it.valueRef() = src.value() + (r == k ? d[k] / c[k] : 0.0);
        else
          it.valueRef() = r == k ? 1.0 : 0.0;
      }
    }
    if (!analyzed_) {
      ldlt_.analyzePattern(K_);
      analyzed_ = true;
    }
    ldlt_.factorize(K_);
    Vector rhs(n);
    for (Index k = 0; k < n; ++k) rhs[k] = live[k] ? -G[k] : 0.0;
    Vector z;
    if (ldlt_.info() == Eigen::Success) z = ldlt_.solve(rhs);
    if (ldlt_.info() != Eigen::Success || !z.allFinite()) return lu_step(var, x, G);
    Vector dy(n);
    Vector Az = sys_.A_ff * z;
    for (Index k = 0; k < n; ++k) {
      if (live[k]) {
        dy[k] = z[k] / c[k];
      } else {
        if (!(d[k] > 0.0)) return lu_step(var, x, G);
        dy[k] = (-G[k] - Az[k]) / d[k];
      }
    }
    if (!dy.allFinite()) return lu_step(var, x, G);
    return dy;
  }

private:
  // mu' below this counts as a plateau: the dropped coupling is A mu' dy.
  static constexpr double kLive = 1e-14;

  Vector lu_step(const Unknowns& var, const Vector& x, const Vector& G) {
    const SparseMatrix J = var.jacobian(x);
    if (!lu_analyzed_) {
      lu_.analyzePattern(J);
      lu_analyzed_ = true;
    }
    lu_.factorize(J);
    if (lu_.info() != Eigen::Success) throw SingularJacobian("Newton Jacobian is singular");
    Vector dy = lu_.solve(-G);
    if (!dy.allFinite()) throw SingularJacobian("Newton step is not finite");
    return dy;
  }

  const DiscreteSystem& sys_;
  SparseMatrix K_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool lu_analyzed_ = false;
};

struct NewtonState {
  Vector x;
  double r = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

// Full semismooth steps, no line search. On piecewise linear problems this is
// an active-set iteration that terminates, although ||G|| is not monotone on
// the way; it is abandoned if it blows up or stops improving its best value.
Status plain_newton(const DiscreteSystem& sys, const NonlinearModel& model,
                    const SolverConfig& cfg, double tol, NewtonState& st, StepSolver& js) {
  const Unknowns var(sys, model);
  Vector y = var.to_y(st.x);
  Vector x = var.to_u(y);
  Vector G = sys.residual(model, x);
  double r = G.norm();
  NewtonState best{x, r, st.iterations, st.history};
  int since_best = 0;
  for (int it = 0; it < cfg.max_iters && r > tol; ++it) {
    const Vector dy = js.step(var, x, G);
    for (Index k = 0; k < sys.num_free(); ++k) y[sys.free_dofs[k]] += dy[k];
    x = var.to_u(y);
    G = sys.residual(model, x);
    r = G.norm();
    ++st.iterations;
    st.history.push_back(r);
    if (!std::isfinite(r)) break;
    if (r < best.r) {
      best.x = x;
      best.r = r;
      since_best = 0;
    } else if (++since_best > 5 * cfg.stagnation_window) {
      break;
    }
  }
  if (r <= tol) {
    st.x = std::move(x);
    st.r = r;
    return Status::Converged;
  }
  st.x = std::move(best.x);
  st.r = best.r;
  return Status::Stagnated;
}

Status newton(const DiscreteSystem& sys, const NonlinearModel& model, const SolverConfig& cfg,
              double tol, NewtonState& st, StepSolver& js) {
  const Unknowns var(sys, model);
  Vector y = var.to_y(st.x);
  st.x = var.to_u(y);
  Vector G = sys.residual(model, st.x);
  st.r = G.norm();
  std::vector<double> local{st.r};
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (st.r <= tol) return Status::Converged;
    const Vector dy = js.step(var, st.x, G);
    double t = 1.0;
    Vector y_try, x_try, G_try;
    double r_try = 0.0;
    while (true) {
      y_try = y;
      for (Index k = 0; k < sys.num_free(); ++k) y_try[sys.free_dofs[k]] += t * dy[k];
      x_try = var.to_u(y_try);
      G_try = sys.residual(model, x_try);
      r_try = G_try.norm();
      if (std::isfinite(r_try) && r_try * r_try <= (1.0 - 2.0 * cfg.armijo * t) * st.r * st.r)
        break;
      t *= cfg.backtrack;
      if (t < cfg.min_step) return Status::Stagnated;
    }
    y = std::move(y_try);
    st.x = std::move(x_try);
    G = std::move(G_try);
    st.r = r_try;
    ++st.iterations;
    st.history.push_back(st.r);
    local.push_back(st.r);
    const auto w = static_cast<std::size_t>(cfg.stagnation_window);
    if (st.r > tol && local.size() > w &&
        st.r > (1.0 - cfg.stagnation_decrease) * local[local.size() - 1 - w])
      return Status::Stagnated;
  }
  return st.r <= tol ? Status::Converged : Status::MaxIterations;
}

Vector linear_initial_guess(const DiscreteSystem& sys) {
  // beta = zeta = Id: (diag(M) + A_ff) x_f = b_f - A_fc u_c.
  SparseMatrix K = sys.A_ff;
  for (Index k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it)
      if (it.row() == k) it.valueRef() += sys.M[sys.free_dofs[k]];
  Vector uc = Vector::Zero(sys.size());
  for (Index i = 0; i < sys.size(); ++i)
    if (sys.constrained[i]) uc[i] = sys.prescribed[i];
  const Vector Auc = sys.A * uc;
  Vector rhs(sys.num_free());
  for (Index k = 0; k < sys.num_free(); ++k) rhs[k] = sys.b[sys.free_dofs[k]] - Auc[sys.free_dofs[k]];
  return sys.expand(linear_solve(K, rhs));
}

} // namespace

SolveResult solve(const DiscreteSystem& sys, const NonlinearModel& model, const SolverConfig& cfg,
                  const std::optional<Vector>& initial) {
  cfg.validate();
  SolveResult res;
  res.hybrid = sys.hybrid;
  NewtonState st;
  if (initial) {
    if (initial->size() != sys.size()) throw MismatchedSizes("initial guess has the wrong size");
    st.x = *initial;
    for (Index i = 0; i < sys.size(); ++i)
      if (sys.constrained[i]) st.x[i] = sys.prescribed[i];
  } else {
    st.x = linear_initial_guess(sys);
  }
  double load = 0.0;
  for (Index i : sys.free_dofs) load += sys.b[i] * sys.b[i];
  const double tol = cfg.tol_abs + cfg.tol_rel * (1.0 + std::sqrt(load));
  res.tolerance = tol;
  StepSolver js(sys);

  auto stage = [&](const NonlinearModel& m, bool damped) {
    NewtonState start = st;
    if (plain_newton(sys, m, cfg, tol, st, js) == Status::Converged) return Status::Converged;
    if (st.r > start.r) {
      start.iterations = st.iterations;
      start.history = st.history;
      st = std::move(start);
    }
    if (!damped) return Status::Stagnated;
    return newton(sys, m, cfg, tol, st, js);
  };
  const NewtonState initial_state = st;
  Status status = stage(model, false);
  if (status != Status::Converged) {
    res.used_continuation = true;
    const int spent = st.iterations;
    auto history = st.history;
    st = initial_state;
    st.iterations = spent;
    st.history = std::move(history);
    for (double eps : cfg.continuation_eps) stage(model.with_smoothed_zeta(eps), true);
    status = stage(model, true);
  }
  if (status != Status::Converged) {
    std::ostringstream msg;
    msg << "Newton did not converge: residual " << st.r << " > tolerance " << tol << " after "
        << st.iterations << " iterations; trace:";
    const std::size_t from = st.history.size() > 12 ? st.history.size() - 12 : 0;
    for (std::size_t i = from; i < st.history.size(); ++i) msg << ' ' << st.history[i];
    throw NoConvergence(msg.str());
  }
  // Polish: extra full steps while the residual keeps halving (iterative
  // refinement against the extended-precision residual); not counted as
  // iterations.
  const Unknowns var(sys, model);
  for (int p = 0; p < 10 && st.r > 0.0; ++p) {
    const Vector G = sys.residual(model, st.x);
    const Vector dy = js.step(var, st.x, G);
    Vector y_try = var.to_y(st.x);
    for (Index k = 0; k < sys.num_free(); ++k) y_try[sys.free_dofs[k]] += dy[k];
    const Vector x_try = var.to_u(y_try);
    const double r_try = sys.residual(model, x_try).norm();
    if (!(r_try < st.r)) break;
    const bool halved = r_try <= 0.5 * st.r;
    st.x = std::move(x_try);
    st.r = r_try;
    if (!halved) break;
  }
  res.u = std::move(st.x);
  res.iterations = st.iterations;
  res.final_residual = st.r;
  res.converged = true;
  res.residual_history = std::move(st.history);
  return res;
}

Vector zeta_of(const SolveResult& r, const DiscreteSystem& sys, const NonlinearModel& model) {
  return sys.zeta_values(model, r.u);
}

Vector beta_of(const SolveResult& r, const NonlinearModel& model) {
  Vector b(r.u.size());
  for (Index i = 0; i < r.u.size(); ++i)
    b[i] = r.hybrid[i] ? std::numeric_limits<double>::quiet_NaN() : model.beta()(r.u[i]);
  return b;
}

} // namespace gdml
