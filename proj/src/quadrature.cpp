#include "gdml/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace gdml {

int LumpingRule::degree() const {
  const auto n = ref_nodes.size();
  if (dim == 1) return static_cast<int>(n) - 1;
  // dim P^k in 2D is (k+1)(k+2)/2.
  for (int k = 0; k < 8; ++k)
    if (static_cast<std::size_t>((k + 1) * (k + 2) / 2) == n) return k;
  return -1;
}

LumpingRule lumping_rule_1d(Lumping1D name) {
  LumpingRule r;
  r.dim = 1;
  auto nodes = [&r](std::initializer_list<double> xs) {
    for (double x : xs) r.ref_nodes.push_back(point1d(x));
  };
  switch (name) {
    case Lumping1D::Trapezoidal:
      r.name = "trapezoidal";
      nodes({0.0, 1.0});
      r.weight_fractions = {0.5, 0.5};
      r.doe = 1;
      break;
    case Lumping1D::Simpson:
      r.name = "simpson";
      nodes({0.0, 0.5, 1.0});
      r.weight_fractions = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
      r.doe = 3;
      break;
    case Lumping1D::Equi6:
      r.name = "equi6";
      nodes({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
      r.weight_fractions = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
      r.doe = 1;
      break;
    case Lumping1D::Equi8:
      r.name = "equi8";
      nodes({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
      r.weight_fractions = {1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0};
      r.doe = 3;
      break;
    case Lumping1D::GaussLobatto: {
      r.name = "gauss-lobatto";
      const double s5 = std::sqrt(5.0);
      nodes({0.0, (5.0 - s5) / 10.0, (5.0 + s5) / 10.0, 1.0});
      r.weight_fractions = {1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0};
      r.doe = 5;
      break;
    }
  }
  return r;
}

LumpingRule lumping_rule_2d(Lumping2D name) {
  LumpingRule r;
  r.dim = 2;
  r.ref_nodes = {Point(0, 0), Point(1, 0), Point(0, 1)};
  switch (name) {
    case Lumping2D::Vertex:
      r.name = "vertex";
      r.weight_fractions = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      r.doe = 1;
      break;
    case Lumping2D::VertexEdgeMidpoint:
      r.name = "vertex-edge-midpoint";
      // Midpoint i sits on the edge opposite corner i.
      r.ref_nodes.emplace_back(0.5, 0.5);
      r.ref_nodes.emplace_back(0.0, 0.5);
      r.ref_nodes.emplace_back(0.5, 0.0);
      r.weight_fractions = {0.0, 0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      r.doe = 2;
      break;
  }
  return r;
}

LumpingRule lumping_rule_from_name(const std::string& name) {
  if (name == "trapezoidal") return lumping_rule_1d(Lumping1D::Trapezoidal);
  if (name == "simpson") return lumping_rule_1d(Lumping1D::Simpson);
  if (name == "equi6") return lumping_rule_1d(Lumping1D::Equi6);
  if (name == "equi8") return lumping_rule_1d(Lumping1D::Equi8);
  if (name == "gauss-lobatto" || name == "gl") return lumping_rule_1d(Lumping1D::GaussLobatto);
  if (name == "vertex") return lumping_rule_2d(Lumping2D::Vertex);
  if (name == "vertex-edge-midpoint" || name == "vem")
    return lumping_rule_2d(Lumping2D::VertexEdgeMidpoint);
  throw ConfigError("unknown lumping rule '" + name + "'");
}

double reference_monomial_integral(int a) { return 1.0 / (a + 1); }

double reference_monomial_integral(int a, int b) {
  // a! b! / (a+b+2)!
  double v = 1.0;
  for (int i = 1; i <= a; ++i) v *= i;
  for (int i = 1; i <= b; ++i) v *= i;
  for (int i = 1; i <= a + b + 2; ++i) v /= i;
  return v;
}

bool verify_exactness(const LumpingRule& rule, int k_plus_l) {
  const double tol = 1e-12;
  if (rule.dim == 1) {
    for (int a = 0; a <= k_plus_l; ++a) {
      double q = 0.0;
      for (Index i = 0; i < rule.num_nodes(); ++i)
        q += rule.weight_fractions[i] * std::pow(rule.ref_nodes[i].x(), a);
      if (std::abs(q - reference_monomial_integral(a)) > tol) return false;
    }
    return true;
  }
  // |K| = 1/2 on the reference triangle.
  for (int d = 0; d <= k_plus_l; ++d)
    for (int a = 0; a <= d; ++a) {
      const int b = d - a;
      double q = 0.0;
      for (Index i = 0; i < rule.num_nodes(); ++i)
        q += 0.5 * rule.weight_fractions[i] * std::pow(rule.ref_nodes[i].x(), a) *
             std::pow(rule.ref_nodes[i].y(), b);
      if (std::abs(q - reference_monomial_integral(a, b)) > tol) return false;
    }
  return true;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  // Returns P_n(x) and stores P_n'(x).
  auto legendre = [n](double x, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, dp);
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

ErrorQuadrature ErrorQuadrature::interval(int degree) {
  ErrorQuadrature q;
  q.dim_ = 1;
  q.degree_ = degree;
  std::vector<double> x, w;
  gauss_legendre(degree / 2 + 1, x, w);
  for (std::size_t i = 0; i < x.size(); ++i) q.points_.push_back({point1d(x[i]), w[i]});
  return q;
}

ErrorQuadrature ErrorQuadrature::triangle(int degree) {
  ErrorQuadrature q;
  q.dim_ = 2;
  q.degree_ = degree;
  // xi = u, eta = v (1 - u), dxi deta = (1 - u) du dv; the extra factor raises
  // the degree in u by one.
  std::vector<double> x, w;
  gauss_legendre((degree + 1) / 2 + 1, x, w);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      q.points_.push_back({Point(x[i], x[j] * (1.0 - x[i])), w[i] * w[j] * (1.0 - x[i])});
  return q;
}

} // namespace gdml
