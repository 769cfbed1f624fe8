#include "gdml/system.hpp"
#include "gdml/testcases.hpp"

#include <Eigen/SparseCholesky>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gdml;

namespace {

const NonlinearModel kLinear(Nonlinearity::identity(), Nonlinearity::identity());

SourceData constant_f(double c) {
  SourceData s;
  s.f = [c](const Point&, const Point&) { return c; };
  return s;
}

const CellField kZero = [](const Point&, const Point&) { return 0.0; };

} // namespace

TEST(System, LumpedP1Rows) {
  const auto gd = GradientDiscretisation::build_fe(uniform_1d(4), 1, lumping_rule_1d(Lumping1D::Trapezoidal));
  const auto sys = assemble(gd, kLinear, constant_f(1.0), kZero);
  const double h = 0.25;
  for (Index i = 1; i < 4; ++i) {
    EXPECT_NEAR(sys.A.coeff(i, i - 1), -1 / h, 1e-12);
    EXPECT_NEAR(sys.A.coeff(i, i), 2 / h, 1e-12);
    EXPECT_NEAR(sys.A.coeff(i, i + 1), -1 / h, 1e-12);
    EXPECT_NEAR(sys.M[i], h, 1e-15);
  }
  for (Index i = 0; i < sys.size(); ++i) EXPECT_NEAR(sys.b[i], sys.M[i], 1e-15);
}

TEST(System, StiffnessPositiveSemidefinite) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n;
  std::vector<GradientDiscretisation> gds;
  gds.push_back(GradientDiscretisation::build_dg(random_1d(9, 2), 3, lumping_rule_1d(Lumping1D::GaussLobatto)));
  gds.push_back(GradientDiscretisation::build_fe(random_1d(9, 2), 2, lumping_rule_1d(Lumping1D::Simpson)));
  gds.push_back(GradientDiscretisation::build_fe(triangulate_2d(MeshFamily2D::Randomized, 2, 1), 2,
                                                 lumping_rule_2d(Lumping2D::VertexEdgeMidpoint)));
  for (const auto& gd : gds) {
    const auto sys = assemble(gd, kLinear, constant_f(0.0), kZero);
    for (int r = 0; r < 50; ++r) {
      Vector v(sys.size());
      for (Index i = 0; i < v.size(); ++i) v[i] = n(gen);
      EXPECT_GE(v.dot(sys.A * v) / v.squaredNorm(), -1e-12);
    }
  }
}

TEST(System, LinearResidual) {
  const auto gd = GradientDiscretisation::build_fe(random_1d(6, 4), 2, lumping_rule_1d(Lumping1D::Simpson));
  const auto sys = assemble(gd, kLinear, constant_f(2.0), kZero);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Vector x = sys.prescribed;
  for (Index i : sys.free_dofs) x[i] = u(gen);
  const Vector full = sys.M.asDiagonal() * x + sys.A * x - sys.b;
  const Vector g = sys.residual(kLinear, x);
  for (Index k = 0; k < sys.num_free(); ++k) EXPECT_NEAR(g[k], full[sys.free_dofs[k]], 1e-12);
  const Vector gf = sys.residual_full(kLinear, x);
  for (Index i : gd.boundary_indices()) EXPECT_EQ(gf[i], 0.0);
}

TEST(System, ResidualAtZero) {
  const auto gd = GradientDiscretisation::build_fe(uniform_1d(8), 1, lumping_rule_1d(Lumping1D::Trapezoidal));
  const NonlinearModel stefan(Nonlinearity::identity(), Nonlinearity::stefan());
  const auto sys = assemble(gd, stefan, constant_f(1.5), kZero);
  const Vector g = sys.residual(stefan, Vector::Zero(sys.size()));
  for (Index k = 0; k < sys.num_free(); ++k) EXPECT_NEAR(g[k], -sys.b[sys.free_dofs[k]], 1e-15);
}

TEST(System, JacobianMatchesFiniteDifferences) {
  const auto tc = case_p1();
  const auto gd = GradientDiscretisation::build_fe(random_1d(10, 3), 2, lumping_rule_1d(Lumping1D::Simpson));
  const auto sys = assemble(gd, tc);
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vector x = sys.prescribed;
  for (Index i : sys.free_dofs) x[i] = (u(gen) < 0.5 ? -1 : 1) * u(gen);
  Vector v = Vector::Zero(sys.size()), vf(sys.num_free());
  for (Index k = 0; k < sys.num_free(); ++k) v[sys.free_dofs[k]] = vf[k] = u(gen) - 0.5;
  const double step = 1e-7;
  const Vector fd = (sys.residual(tc.model, x + step * v) - sys.residual(tc.model, x - step * v)) / (2 * step);
  const Vector jv = sys.jacobian(tc.model, x) * vf;
  EXPECT_LE((jv - fd).norm(), 1e-5 * jv.norm());
}

TEST(System, FluxLoadTwoPaths) {
  const auto tc = case_s3();
  for (const auto& gd :
       {GradientDiscretisation::build_fe(uniform_1d(16), 1, lumping_rule_1d(Lumping1D::Trapezoidal)),
        GradientDiscretisation::build_fe(random_1d(13, 2), 3, lumping_rule_1d(Lumping1D::GaussLobatto)),
        GradientDiscretisation::build_dg(random_1d(11, 4), 2, lumping_rule_1d(Lumping1D::Simpson))}) {
    const Vector a = flux_load_exact(gd, tc.flux);
    const Vector b = flux_load_quadrature(gd, tc.flux);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(System, FluxLoadPointFormula) {
  // F = c on (0,1/4), 0 on (1/4,3/4), -c on (3/4,1), c = 4 tanh(1/4):
  // -int F phi' = -c (phi(1/4) + phi(3/4)) + c (phi(0) + phi(1)).
  const auto tc = case_s3();
  const auto gd = GradientDiscretisation::build_fe(uniform_1d(10), 1, lumping_rule_1d(Lumping1D::Trapezoidal));
  const Vector b = flux_load_exact(gd, tc.flux);
  const double c = 4 * std::tanh(0.25);
  for (Index i = 0; i < gd.num_dofs(); ++i) {
    Vector e = Vector::Zero(gd.num_dofs());
    e[i] = 1;
    auto phi = [&](double x) { return gd.pi_star(e, point1d(x)); };
    const double want = -c * (phi(0.25) + phi(0.75)) + c * (phi(0.0) + phi(1.0));
    EXPECT_NEAR(b[i], want, 1e-12) << i;
  }
}

TEST(System, EnergyIdentityLinearZero) {
  const auto gd = GradientDiscretisation::build_fe(uniform_1d(8), 1, lumping_rule_1d(Lumping1D::Trapezoidal));
  const auto sys = assemble(gd, kLinear, constant_f(1.0), kZero);
  // Solve (M + A) u = b on the free block directly.
  SparseMatrix K = sys.A_ff;
  for (Index k = 0; k < sys.num_free(); ++k) K.coeffRef(k, k) += sys.M[sys.free_dofs[k]];
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
  const Vector xf = ldlt.solve(sys.restrict_free(sys.b));
  const auto e = sys.energy_identity_check(kLinear, sys.expand(xf));
  EXPECT_LE(e.defect, 1e-14);
}

TEST(System, HybridIndicesForVertexEdgeMidpoint) {
  const auto gd = GradientDiscretisation::build_fe(triangulate_2d(MeshFamily2D::SplitSquares, 3), 2,
                                                   lumping_rule_2d(Lumping2D::VertexEdgeMidpoint));
  const auto sys = assemble(gd, kLinear, constant_f(1.0), kZero);
  int hybrid = 0;
  for (Index i = 0; i < sys.size(); ++i) {
    if (sys.hybrid[i]) {
      ++hybrid;
      EXPECT_EQ(sys.M[i], 0.0);
      EXPECT_FALSE(sys.constrained[i]);
    }
  }
  EXPECT_EQ(hybrid, 2 * 2);  // interior vertices of a 3x3 grid
}
