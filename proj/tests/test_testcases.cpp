#include "gdml/testcases.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gdml;

namespace {

double at(const Profile1D::Fn& fn, double x) { return fn(x, x); }

} // namespace

TEST(Cases, R1) {
  const auto tc = case_r1();
  EXPECT_NEAR(at(tc.profile.u, 0.5), std::exp(0.5) / 4, 1e-15);
  EXPECT_NEAR(at(tc.profile.u, 0.5), 0.412180, 1e-6);
  EXPECT_EQ(at(tc.profile.u, 0.0), 0.0);
  EXPECT_EQ(at(tc.profile.u, 1.0), 0.0);
  // u'' = (-3x - x^2) e^x by hand, so u - u'' = 4x e^x at x = 1/2.
  const double x = 0.5;
  const double upp = (-3 * x - x * x) * std::exp(x);
  EXPECT_NEAR(at(tc.profile.u, x) - upp, at(tc.profile.f, x), 1e-14);
}

TEST(Cases, P1) {
  const auto tc = case_p1();
  EXPECT_NEAR(at(tc.profile.u, 0.5), 0.027, 1e-15);
  EXPECT_EQ(at(tc.profile.u, 0.1), 0.0);
  EXPECT_LE(std::abs(pde_residual(tc, point1d(0.5))), 1e-6);
}

TEST(Cases, P2) {
  const auto tc = case_p2();
  EXPECT_EQ(at(tc.profile.u, 0.2), 0.0);
  EXPECT_EQ(at(tc.profile.u, 0.1), 0.0);
  EXPECT_NEAR(at(tc.profile.u, 1.0), 0.64 / 12, 1e-15);
  for (double x : {0.3, 0.55, 0.9}) {
    EXPECT_NEAR(at(tc.profile.zeta_u, x), std::pow(x - 0.2, 4) / 144, 1e-15);
    // (x-0.2)^4/144 differentiated twice is (x-0.2)^2/12 = u.
    EXPECT_NEAR(12 * (x - 0.2) * (x - 0.2) / 144, at(tc.profile.u, x), 1e-15);
  }
}

TEST(Cases, S1Constants) {
  const auto c = solve_s1_constants();
  EXPECT_NEAR(c.gamma, 0.33036, 5e-5);
  EXPECT_NEAR(c.a, 1.2545, 5e-5);
  EXPECT_NEAR(c.b, -1.7455, 5e-5);
  EXPECT_LE(c.residual, 1e-12);
}

TEST(Cases, S1Matching) {
  const auto c = solve_s1_constants();
  const auto tc = case_s1();
  for (double s : {0.5 - c.gamma, 0.5 + c.gamma}) {
    const double inner = s < 0.5 ? s + 1e-12 : s - 1e-12;
    EXPECT_NEAR(tc.profile.zeta_u(s, inner), 0.0, 1e-10);
    EXPECT_NEAR(tc.profile.dzeta_u(s, inner), 0.0, 1e-10);
  }
  // Outer region: u = f.
  for (int i = 0; i < 50; ++i) {
    const double x = (0.5 - c.gamma) * (i + 0.5) / 50.0;
    EXPECT_EQ(at(tc.profile.u, x), at(tc.profile.f, x));
    EXPECT_EQ(at(tc.profile.u, 1 - x), at(tc.profile.f, 1 - x));
  }
}

TEST(Cases, S2) {
  const auto tc = case_s2();
  EXPECT_NEAR(at(tc.profile.u, 1.0), std::cosh(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(at(tc.profile.u, 1.0), 1.230575, 1e-6);
  EXPECT_EQ(at(tc.profile.u, 0.25), 0.0);
  // Where u >= 1, beta(u) - zeta(u)'' = cosh - cosh = 0.
  for (double x : {0.4, 0.7, 0.95}) EXPECT_LE(std::abs(pde_residual(tc, point1d(x))), 1e-4);
}

TEST(Cases, S3) {
  const auto tc = case_s3();
  EXPECT_NEAR(at(tc.profile.u, 0.5), 5 - 4 / std::cosh(0.25), 1e-15);
  EXPECT_NEAR(at(tc.profile.u, 0.5), 1.1218255, 1e-7);
  EXPECT_EQ(at(tc.profile.u, 0.1), 0.0);
  ASSERT_TRUE(tc.has_flux());
  EXPECT_NEAR(tc.flux.front().value, 4 * std::tanh(0.25), 1e-15);
  EXPECT_NEAR(tc.flux.front().value, 0.9796746, 1e-7);
  EXPECT_NEAR(tc.profile.u(0.25, 0.26), 1.0, 1e-15);
  EXPECT_THROW(lift_to_2d(tc), Unsupported);
}

TEST(Cases, Lift) {
  const auto tc = case_from_name("p1-2d");
  EXPECT_EQ(tc.dim, 2);
  const Point p(0.3, 0.3);
  EXPECT_NEAR(tc.u(p, p), at(case_p1().profile.u, 0.6 / std::sqrt(2.0)), 1e-15);
  const Point o(0, 0);
  EXPECT_EQ(tc.u(o, Point(0.1, 0.1)), 0.0);
  int checked = 0;
  for (int i = 1; i < 20 && checked < 100; ++i)
    for (int j = 1; j < 20 && checked < 100; ++j) {
      const Point x(i / 20.0 + 0.013, j / 20.0 - 0.007);
      bool near = false;
      for (double s : tc.singular_points) near = near || std::abs(tc.coordinate(x) - s) < 0.02;
      if (near) continue;
      EXPECT_LE(std::abs(pde_residual(tc, x)), 1e-4);
      ++checked;
    }
  EXPECT_EQ(checked, 100);
}

TEST(Cases, ResidualAwayFromSingularPoints) {
  for (const auto& id : case_names()) {
    const auto tc = case_from_name(id);
    if (tc.has_flux() || tc.dim != 1) continue;
    for (int i = 1; i < 400; ++i) {
      const double x = i / 400.0;
      bool near = false;
      for (double b : tc.breakpoints) near = near || std::abs(x - b) < 0.01;
      if (!near) EXPECT_LE(std::abs(pde_residual(tc, point1d(x))), 1e-4) << id << " x=" << x;
    }
  }
}

TEST(Cases, ZetaContinuousAtSingularPoints) {
  for (const auto& id : {"p1", "p2", "s1", "s2", "s3"}) {
    const auto tc = case_from_name(id);
    for (double s : tc.singular_points) {
      const double l = tc.profile.zeta_u(s, s - 1e-9);
      const double r = tc.profile.zeta_u(s, s + 1e-9);
      EXPECT_NEAR(l, r, 1e-10) << id << " at " << s;
    }
  }
}

TEST(Cases, StefanJumpsOnPlateau) {
  for (const auto& id : {"s1", "s2", "s3"}) {
    const auto tc = case_from_name(id);
    for (double s : tc.singular_points) {
      const double l = tc.profile.u(s, s - 1e-9);
      const double r = tc.profile.u(s, s + 1e-9);
      if (std::abs(l - r) < 1e-12) continue;
      EXPECT_GE(l, -1e-12) << id;
      EXPECT_LE(l, 1 + 1e-12) << id;
      EXPECT_GE(r, -1e-12) << id;
      EXPECT_LE(r, 1 + 1e-12) << id;
    }
  }
}

TEST(Cases, UnknownName) { EXPECT_THROW(case_from_name("q9"), ConfigError); }
