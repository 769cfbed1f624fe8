#include "gdml/quadrature.hpp"
#include "gdml/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gdml;

TEST(LumpingRule, TableValues) {
  const auto s = lumping_rule_1d(Lumping1D::Simpson);
  ASSERT_EQ(s.num_nodes(), 3);
  EXPECT_DOUBLE_EQ(s.ref_nodes[1].x(), 0.5);
  EXPECT_NEAR(s.weight_fractions[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(s.weight_fractions[1], 2.0 / 3, 1e-15);
  EXPECT_EQ(s.doe, 3);

  const auto gl = lumping_rule_1d(Lumping1D::GaussLobatto);
  ASSERT_EQ(gl.num_nodes(), 4);
  EXPECT_NEAR(gl.ref_nodes[1].x(), (5 - std::sqrt(5.0)) / 10, 1e-15);
  EXPECT_NEAR(gl.ref_nodes[2].x(), (5 + std::sqrt(5.0)) / 10, 1e-15);
  EXPECT_NEAR(gl.weight_fractions[0], 1.0 / 12, 1e-15);
  EXPECT_NEAR(gl.weight_fractions[1], 5.0 / 12, 1e-15);
  EXPECT_EQ(gl.doe, 5);

  const auto e8 = lumping_rule_1d(Lumping1D::Equi8);
  EXPECT_NEAR(e8.weight_fractions[0], 1.0 / 8, 1e-15);
  EXPECT_NEAR(e8.weight_fractions[1], 3.0 / 8, 1e-15);
  EXPECT_EQ(e8.doe, 3);
  EXPECT_EQ(lumping_rule_1d(Lumping1D::Equi6).doe, 1);
  EXPECT_FALSE(lumping_rule_1d(Lumping1D::Equi6).satisfies_kl());

  const auto v = lumping_rule_2d(Lumping2D::Vertex);
  double sum = 0;
  for (double w : v.weight_fractions) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_EQ(v.doe, 1);
  const auto vm = lumping_rule_2d(Lumping2D::VertexEdgeMidpoint);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(vm.weight_fractions[i], 0.0);
}

TEST(LumpingRule, Exactness) {
  const auto s = lumping_rule_1d(Lumping1D::Simpson);
  EXPECT_TRUE(verify_exactness(s, 3));
  EXPECT_FALSE(verify_exactness(s, 4));
  // Hand value of the Simpson sum for x^4: 1/6 * (1/2)^4 * 4 + 1/6 = 5/24 vs 1/5.
  double q = 0;
  for (Index i = 0; i < s.num_nodes(); ++i) q += s.weight_fractions[i] * std::pow(s.ref_nodes[i].x(), 4);
  EXPECT_NEAR(q, 5.0 / 24, 1e-15);
  EXPECT_FALSE(verify_exactness(lumping_rule_1d(Lumping1D::Equi6), 2));
}

TEST(LumpingRule, EveryShippedRuleAtDoe) {
  for (const auto& c : check_quadrature()) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(LumpingRule, CorruptedSimpsonIsReported) {
  auto bad = lumping_rule_1d(Lumping1D::Simpson);
  bad.weight_fractions = {0.2, 0.6, 0.2};
  const auto r = check_quadrature({bad});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(r[0].passed);
}

TEST(LumpingRule, ConstantOnTriangle) {
  const auto v = lumping_rule_2d(Lumping2D::Vertex);
  double q = 0;
  for (double w : v.weight_fractions) q += w * 0.5;
  EXPECT_NEAR(q, 0.5, 1e-15);
}

TEST(LumpingRule, FromName) {
  EXPECT_EQ(lumping_rule_from_name("gauss-lobatto").doe, 5);
  EXPECT_EQ(lumping_rule_from_name("vertex-edge-midpoint").degree(), 2);
  EXPECT_THROW(lumping_rule_from_name("nope"), Error);
}

TEST(ErrorQuadrature, IntervalExactToTen) {
  const auto q = ErrorQuadrature::interval();
  for (int a = 0; a <= 10; ++a) {
    double s = 0;
    for (const auto& p : q.points()) s += p.weight * std::pow(p.ref.x(), a);
    EXPECT_NEAR(s, 1.0 / (a + 1), 1e-12) << a;
    EXPECT_NEAR(s, reference_monomial_integral(a), 1e-15);
  }
}

// Oracle: int_T x^a y^b = a! b! / (a+b+2)!
static double triangle_moment(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

TEST(ErrorQuadrature, TriangleExactToTen) {
  const auto q = ErrorQuadrature::triangle();
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; a + b <= 10; ++b) {
      double s = 0;
      for (const auto& p : q.points()) s += p.weight * std::pow(p.ref.x(), a) * std::pow(p.ref.y(), b);
      EXPECT_NEAR(s, triangle_moment(a, b), 1e-12) << a << "," << b;
      EXPECT_NEAR(reference_monomial_integral(a, b), triangle_moment(a, b), 1e-14);
    }
}

TEST(GaussLegendre, TwoPoint) {
  std::vector<double> x, w;
  gauss_legendre(2, x, w);
  ASSERT_EQ(x.size(), 2u);
  EXPECT_NEAR(x[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(w[0], 0.5, 1e-15);
}
