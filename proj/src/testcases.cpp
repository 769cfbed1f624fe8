#include "gdml/testcases.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace gdml {

namespace {

const double kSqrt2 = std::sqrt(2.0);

Point nudge(const Point& x, const Point& inside) { return x + 1e-9 * (inside - x); }

// Builds the point-evaluable fields of a 1D case from its profile.
void attach_fields_1d(TestCase& tc) {
  const auto p = tc.profile;
  tc.u = [p](const Point& x, const Point& in) { return p.u(x.x(), nudge(x, in).x()); };
  tc.zeta_u = [p](const Point& x, const Point& in) { return p.zeta_u(x.x(), nudge(x, in).x()); };
  tc.f = [p](const Point& x, const Point& in) { return p.f(x.x(), nudge(x, in).x()); };
  tc.grad_zeta_u = [p](const Point& x, const Point& in) {
    return point1d(p.dzeta_u(x.x(), nudge(x, in).x()));
  };
}

TestCase make_case(std::string id, Nonlinearity zeta, Profile1D profile,
                   std::vector<double> singular, std::vector<double> extra_breaks = {}) {
  TestCase tc{std::move(id), 1, NonlinearModel(Nonlinearity::identity(), std::move(zeta)),
              std::move(profile), {}, {}, {}, {}, {}, {}, {}, {}};
  tc.singular_points = singular;
  tc.breakpoints = singular;
  tc.breakpoints.insert(tc.breakpoints.end(), extra_breaks.begin(), extra_breaks.end());
  std::sort(tc.breakpoints.begin(), tc.breakpoints.end());
  attach_fields_1d(tc);
  return tc;
}

} // namespace

Point TestCase::selector(const Point& x, const Point& inside) { return nudge(x, inside); }

double TestCase::coordinate(const Point& x) const {
  return dim == 1 ? x.x() : (x.x() + x.y()) / kSqrt2;
}

S1Constants solve_s1_constants() {
  Eigen::Vector3d v(0.33, 1.25, -1.75);  // (gamma, a, b)
  auto F = [](const Eigen::Vector3d& q) {
    const double g = q[0], a = q[1], b = q[2];
    const double ep = std::exp(g), em = std::exp(-g);
    return Eigen::Vector3d(3.0 * (0.5 - g) - 1.0 + a * ep + b * em, -3.0 + a * ep - b * em,
                           -3.0 + a - b);
  };
  for (int it = 1; it <= 50; ++it) {
    const double g = v[0], a = v[1], b = v[2];
    const double ep = std::exp(g), em = std::exp(-g);
    Eigen::Matrix3d J;
    J << -3.0 + a * ep - b * em, ep, em,
         a * ep + b * em, ep, -em,
         0.0, 1.0, -1.0;
    v -= J.fullPivLu().solve(F(v));
    const double r = F(v).cwiseAbs().maxCoeff();
    if (r <= 1e-13) return {v[0], v[1], v[2], it, r};
  }
  throw ConstantsNotConverged("S1 matching system did not converge");
}

TestCase case_r1() {
  Profile1D p;
  p.u = [](double x, double) { return x * (1.0 - x) * std::exp(x); };
  p.zeta_u = p.u;
  p.dzeta_u = [](double x, double) { return (1.0 - x - x * x) * std::exp(x); };
  p.f = [](double x, double) { return 4.0 * x * std::exp(x); };
  return make_case("r1", Nonlinearity::identity(), p, {});
}

TestCase case_p1() {
  auto yz = [](double x, double sel, double& y, double& z) {
    y = sel > 0.2 ? x - 0.2 : 0.0;
    z = sel < 0.8 ? 0.8 - x : 0.0;
  };
  Profile1D p;
  p.u = [yz](double x, double sel) {
    double y, z;
    yz(x, sel, y, z);
    return std::pow(y * z, 1.5);
  };
  p.zeta_u = [yz](double x, double sel) {
    double y, z;
    yz(x, sel, y, z);
    return std::pow(y * z, 3);
  };
  p.dzeta_u = [yz](double x, double sel) {
    double y, z;
    yz(x, sel, y, z);
    const double q = y * z;
    return 3.0 * q * q * (z - y);
  };
  p.f = [yz](double x, double sel) {
    double y, z;
    yz(x, sel, y, z);
    return std::pow(y * z, 1.5) - 6.0 * y * z * (z * z - 3.0 * y * z + y * y);
  };
  return make_case("p1", Nonlinearity::porous_medium(), p, {0.2, 0.8});
}

TestCase case_p2() {
  Profile1D p;
  p.u = [](double x, double sel) { return sel > 0.2 ? (x - 0.2) * (x - 0.2) / 12.0 : 0.0; };
  p.zeta_u = [](double x, double sel) { return sel > 0.2 ? std::pow(x - 0.2, 4) / 144.0 : 0.0; };
  p.dzeta_u = [](double x, double sel) { return sel > 0.2 ? std::pow(x - 0.2, 3) / 36.0 : 0.0; };
  p.f = [](double, double) { return 0.0; };
  return make_case("p2", Nonlinearity::porous_medium(), p, {0.2});
}

TestCase case_s1() {
  const auto c = solve_s1_constants();
  const double gamma = c.gamma, a = c.a, b = c.b;
  Profile1D p;
  // g = |1/2 - x|; inner region g < gamma has u >= 1, outer region u = f in [0,1].
  p.u = [=](double x, double sel) {
    const double g = std::abs(0.5 - x);
    if (std::abs(0.5 - sel) < gamma) return a * std::exp(g) + b * std::exp(-g) + 3.0 * (0.5 - g);
    return 3.0 * (0.5 - g);
  };
  p.zeta_u = [=](double x, double sel) {
    const double g = std::abs(0.5 - x);
    if (std::abs(0.5 - sel) < gamma)
      return a * std::exp(g) + b * std::exp(-g) + 3.0 * (0.5 - g) - 1.0;
    // Zero on [0,1]; the negative branch is only reached by the 2D lift (s > 1).
    return std::min(3.0 * (0.5 - g), 0.0);
  };
  p.dzeta_u = [=](double x, double sel) {
    const double g = std::abs(0.5 - x);
    const double dg = sel > 0.5 ? 1.0 : -1.0;
    if (!(std::abs(0.5 - sel) < gamma)) return std::abs(0.5 - sel) > 0.5 ? -3.0 * dg : 0.0;
    return (a * std::exp(g) - b * std::exp(-g) - 3.0) * dg;
  };
  p.f = [](double x, double) { return 3.0 * (0.5 - std::abs(0.5 - x)); };
  auto tc = make_case("s1", Nonlinearity::stefan(), p, {0.5 - gamma, 0.5 + gamma}, {0.5});
  tc.exclusion_windows = {{0.5 - gamma - 0.1, 0.5 - gamma + 0.1},
                          {0.5 + gamma - 0.1, 0.5 + gamma + 0.1}};
  return tc;
}

TestCase case_s2() {
  const double gamma = 1.0 / 3.0;
  Profile1D p;
  p.u = [=](double x, double sel) { return sel > gamma ? std::cosh(x - gamma) : 0.0; };
  p.zeta_u = [=](double x, double sel) { return sel > gamma ? std::cosh(x - gamma) - 1.0 : 0.0; };
  p.dzeta_u = [=](double x, double sel) { return sel > gamma ? std::sinh(x - gamma) : 0.0; };
  p.f = [](double, double) { return 0.0; };
  return make_case("s2", Nonlinearity::stefan(), p, {gamma});
}

TestCase case_s3() {
  const double ch = std::cosh(0.25);
  const double c = 4.0 * std::tanh(0.25);
  auto middle = [](double sel) { return sel > 0.25 && sel < 0.75; };
  Profile1D p;
  p.u = [=](double x, double sel) { return middle(sel) ? 5.0 - 4.0 * std::cosh(x - 0.5) / ch : 0.0; };
  p.zeta_u = [=](double x, double sel) {
    return middle(sel) ? 4.0 - 4.0 * std::cosh(x - 0.5) / ch : 0.0;
  };
  p.dzeta_u = [=](double x, double sel) {
    return middle(sel) ? -4.0 * std::sinh(x - 0.5) / ch : 0.0;
  };
  p.f = [=](double, double sel) { return middle(sel) ? 5.0 : 0.0; };
  auto tc = make_case("s3", Nonlinearity::stefan(), p, {0.25, 0.75});
  tc.flux = {{0.0, 0.25, c}, {0.25, 0.75, 0.0}, {0.75, 1.0, -c}};
  return tc;
}

TestCase lift_to_2d(const TestCase& c1) {
  if (c1.has_flux()) throw Unsupported("case " + c1.id + " has F != 0 and cannot be lifted");
  if (c1.dim != 1) throw Unsupported("case " + c1.id + " is already 2D");
  TestCase tc = c1;
  tc.id = c1.id + "-2d";
  tc.dim = 2;
  const auto p = c1.profile;
  auto s_of = [](const Point& q) { return (q.x() + q.y()) / kSqrt2; };
  tc.u = [=](const Point& x, const Point& in) { return p.u(s_of(x), s_of(nudge(x, in))); };
  tc.zeta_u = [=](const Point& x, const Point& in) {
    return p.zeta_u(s_of(x), s_of(nudge(x, in)));
  };
  tc.f = [=](const Point& x, const Point& in) { return p.f(s_of(x), s_of(nudge(x, in))); };
  tc.grad_zeta_u = [=](const Point& x, const Point& in) {
    const double d = p.dzeta_u(s_of(x), s_of(nudge(x, in))) / kSqrt2;
    return Point(d, d);
  };
  return tc;
}

std::vector<std::string> case_names() {
  return {"r1", "p1", "p2", "s1", "s2", "s3", "p1-2d", "p2-2d", "s1-2d", "s2-2d"};
}

TestCase case_from_name(const std::string& id) {
  if (id == "r1") return case_r1();
  if (id == "p1") return case_p1();
  if (id == "p2") return case_p2();
  if (id == "s1") return case_s1();
  if (id == "s2") return case_s2();
  if (id == "s3") return case_s3();
  if (id == "p1-2d") return lift_to_2d(case_p1());
  if (id == "p2-2d") return lift_to_2d(case_p2());
  if (id == "s1-2d") return lift_to_2d(case_s1());
  if (id == "s2-2d") return lift_to_2d(case_s2());
  throw ConfigError("unknown test case '" + id + "'");
}

double pde_residual(const TestCase& tc, const Point& x, double step) {
  if (tc.has_flux()) throw Unsupported("pde_residual needs F = 0");
  auto z = [&tc](const Point& q) { return tc.zeta_u(q, q); };
  double lap = 0.0;
  for (int d = 0; d < tc.dim; ++d) {
    Point e = Point::Zero();
    e[d] = step;
    lap += (z(x + e) - 2.0 * z(x) + z(x - e)) / (step * step);
  }
  return tc.model.beta()(tc.u(x, x)) - lap - tc.f(x, x);
}

} // namespace gdml
