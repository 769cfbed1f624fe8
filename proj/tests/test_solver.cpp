#include "gdml/experiment.hpp"
#include "gdml/solver.hpp"
#include "gdml/testcases.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <tuple>

using namespace gdml;

namespace {

GradientDiscretisation gd_of(const std::string& variant, const std::string& mesh, int n) {
  ExperimentConfig c;
  c.gd = variant;
  c.mesh = mesh;
  c.seed = 3;
  return build_discretisation(c, n);
}

double tolerance(const DiscreteSystem& sys, const SolverConfig& cfg = {}) {
  double load = 0;
  for (Index i : sys.free_dofs) load += sys.b[i] * sys.b[i];
  return cfg.tol_abs + cfg.tol_rel * (1 + std::sqrt(load));
}

// Two unknowns, M = I, A = [[1,-1],[-1,1]], b = (1,0).
DiscreteSystem two_dof() {
  DiscreteSystem s;
  s.M = Vector::Ones(2);
  s.A.resize(2, 2);
  s.A.insert(0, 0) = 1;
  s.A.insert(0, 1) = -1;
  s.A.insert(1, 0) = -1;
  s.A.insert(1, 1) = 1;
  s.b = Vector(2);
  s.b << 1, 0;
  s.constrained = {false, false};
  s.prescribed = Vector::Zero(2);
  s.hybrid = {false, false};
  s.free_dofs = {0, 1};
  s.free_pos = {0, 1};
  s.A_ff = s.A;
  return s;
}

double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (g(m) < 0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST(Solver, LinearCaseOneStep) {
  const auto tc = case_r1();
  const auto sys = assemble(gd_of("fe-k2", "uniform", 32), tc);
  const auto r = solve(sys, tc.model);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_FALSE(r.used_continuation);
}

TEST(Solver, ResidualWithinTolerance) {
  for (const auto& [id, v] : std::vector<std::pair<std::string, std::string>>{
           {"p1", "fe-k3-gl"}, {"s1", "fe-k2"}, {"s3", "dg-k1"}, {"s2", "fe-k3-equi8"}}) {
    const auto tc = case_from_name(id);
    const auto sys = assemble(gd_of(v, "uniform", 64), tc);
    const auto r = solve(sys, tc.model);
    EXPECT_TRUE(r.converged) << id;
    EXPECT_LE(sys.residual(tc.model, r.u).norm(), tolerance(sys)) << id << " " << v;
    EXPECT_LE(r.final_residual, r.tolerance);
  }
}

TEST(Solver, StefanS2NonNegative) {
  const auto tc = case_s2();
  const auto gd = gd_of("fe-k1", "uniform", 16);
  const auto sys = assemble(gd, tc);
  const auto r = solve(sys, tc.model);
  for (Index i = 0; i < r.u.size(); ++i) EXPECT_GE(r.u[i], -1e-8);
}

TEST(Solver, TwoDofAgainstBisection) {
  const auto sys = two_dof();
  const NonlinearModel model(Nonlinearity::identity(), Nonlinearity::stefan());
  const auto r = solve(sys, model);
  ASSERT_TRUE(r.converged);
  // Nested bisection: for each u1, solve row 2 for u2; then row 1 for u1.
  auto u2_of = [](double u1) {
    return bisect([u1](double u2) { return u2 - zeta_stefan(u1) + zeta_stefan(u2); }, -10, 10);
  };
  const double u1 = bisect([&](double u1) { return u1 + zeta_stefan(u1) - zeta_stefan(u2_of(u1)) - 1; },
                           -10, 10);
  EXPECT_NEAR(r.u[0], u1, 1e-9);
  EXPECT_NEAR(r.u[1], u2_of(u1), 1e-9);
}

TEST(Solver, OutputUniqueness) {
  for (const auto& [id, v, mesh, n] : std::vector<std::tuple<std::string, std::string, std::string, int>>{
           {"s1", "fe-k2", "uniform", 32}, {"s2", "fe-k3-gl", "random", 24},
           {"s3", "dg-k2", "uniform", 16}, {"p2-2d", "fe-k2", "split-squares", 6}}) {
    const auto tc = case_from_name(id);
    const auto gd = gd_of(v, mesh, n);
    const auto sys = assemble(gd, tc);
    const auto a = solve(sys, tc.model, {}, Vector::Zero(sys.size()));
    Vector guess = gd.interpolate_nodal(tc.u);
    for (Index i = 0; i < guess.size(); ++i) guess[i] += 0.3 * std::sin(7.0 * i);
    const auto b = solve(sys, tc.model, {}, guess);
    const Vector za = zeta_of(a, sys, tc.model), zb = zeta_of(b, sys, tc.model);
    EXPECT_LE((za - zb).cwiseAbs().maxCoeff(), 1e-7) << id;
    for (Index i = 0; i < sys.size(); ++i)
      if (!sys.hybrid[i]) EXPECT_NEAR(a.u[i], b.u[i], 1e-7) << id << " " << i;
  }
}

TEST(Solver, EnergyIdentity) {
  const auto tc = case_p1();
  const auto sys = assemble(gd_of("fe-k2", "random", 40), tc);
  const auto r = solve(sys, tc.model);
  const auto e = sys.energy_identity_check(tc.model, r.u);
  EXPECT_LE(e.defect, 1e-8 * (1 + std::abs(e.rhs)));
  const Vector z = zeta_of(r, sys, tc.model), be = beta_of(r, tc.model);
  for (Index i = 0; i < z.size(); ++i)
    if (!sys.hybrid[i]) EXPECT_GE(be[i] * z[i], 0.0);
}

TEST(Solver, HybridZetaStored) {
  const auto tc = case_from_name("p1-2d");
  const auto sys = assemble(gd_of("fe-k2", "split-squares", 6), tc);
  const auto r = solve(sys, tc.model);
  const Vector z = zeta_of(r, sys, tc.model);
  const Vector be = beta_of(r, tc.model);
  for (Index i = 0; i < sys.size(); ++i)
    if (sys.hybrid[i]) {
      EXPECT_EQ(z[i], r.u[i]);
      EXPECT_TRUE(std::isnan(be[i]));
    }
}

TEST(LinearSolve, Basics) {
  SparseMatrix I(3, 3);
  I.setIdentity();
  const Vector rhs = Vector::LinSpaced(3, 1, 3);
  EXPECT_EQ(linear_solve(I, rhs), rhs);

  // P1 Poisson with f = 1 is nodally exact on uniform meshes: u = x(1-x)/2.
  const double h = 0.25;
  SparseMatrix T(3, 3);
  for (int i = 0; i < 3; ++i) {
    T.insert(i, i) = 2 / h;
    if (i > 0) T.insert(i, i - 1) = -1 / h;
    if (i < 2) T.insert(i, i + 1) = -1 / h;
  }
  const Vector load = Vector::Constant(3, h);
  const Vector u = linear_solve(T, load);
  for (int i = 0; i < 3; ++i) {
    const double x = (i + 1) * h;
    EXPECT_NEAR(u[i], x * (1 - x) / 2, 1e-12);
  }
  const Vector again = linear_solve(T, load);
  EXPECT_EQ(std::memcmp(u.data(), again.data(), 3 * sizeof(double)), 0);

  SparseMatrix Z(2, 2);
  Z.insert(0, 0) = 1;
  EXPECT_THROW(linear_solve(Z, Vector::Ones(2)), SingularMatrix);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), Error);
  SolverConfig d;
  d.tol_abs = -1;
  EXPECT_THROW(d.validate(), Error);
}
