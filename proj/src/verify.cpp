#include "gdml/verify.hpp"

#include "gdml/experiment.hpp"
#include "gdml/mesh.hpp"
#include "gdml/metrics.hpp"
#include "gdml/solver.hpp"
#include "gdml/system.hpp"
#include "gdml/testcases.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace gdml {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

ExperimentConfig config(const std::string& case_id, const std::string& gd,
                        const std::string& mesh) {
  ExperimentConfig c;
  c.case_id = case_id;
  c.gd = gd;
  c.mesh = mesh;
  c.seed = 7;
  return c;
}

std::string label(const ExperimentConfig& c, int n) {
  return c.case_id + "/" + c.gd + "/" + c.mesh + ":" + std::to_string(n);
}

} // namespace

std::vector<CheckResult> check_quadrature(const std::vector<LumpingRule>& rules) {
  std::vector<CheckResult> out;
  for (const auto& r : rules) {
    const bool at = verify_exactness(r, r.doe);
    const bool above = verify_exactness(r, r.doe + 1);
    out.push_back({"quadrature " + r.name, at && !above,
                   "doe " + std::to_string(r.doe) + (at ? " exact" : " NOT exact") + ", doe+1 " +
                       (above ? "exact (unexpected)" : "not exact")});
  }
  return out;
}

std::vector<CheckResult> check_quadrature() {
  std::vector<LumpingRule> rules;
  for (auto n : {Lumping1D::Trapezoidal, Lumping1D::Simpson, Lumping1D::Equi6, Lumping1D::Equi8,
                 Lumping1D::GaussLobatto})
    rules.push_back(lumping_rule_1d(n));
  for (auto n : {Lumping2D::Vertex, Lumping2D::VertexEdgeMidpoint}) rules.push_back(lumping_rule_2d(n));
  return check_quadrature(rules);
}

namespace {

CheckResult check_mesh(const std::string& name, const Mesh2D& m) {
  std::ostringstream why;
  bool ok = std::abs(m.total_area() - 1.0) <= 1e-12;
  if (!ok) why << "area " << m.total_area() << "; ";
  // Euler characteristic of a disk.
  if (m.num_vertices() - m.num_edges() + m.num_cells() != 1) {
    ok = false;
    why << "V-E+F != 1; ";
  }
  for (const auto& e : m.edges()) {
    if (!e.boundary()) continue;
    const Point& a = m.vertices()[e.vertices[0]];
    const Point& b = m.vertices()[e.vertices[1]];
    const bool on_side = (a.x() == 0 && b.x() == 0) || (a.x() == 1 && b.x() == 1) ||
                         (a.y() == 0 && b.y() == 0) || (a.y() == 1 && b.y() == 1);
    if (!on_side) {
      ok = false;
      why << "boundary edge off the boundary; ";
      break;
    }
  }
  for (Index t = 0; t < m.num_cells(); ++t)
    if (!(m.area(t) > 0.0)) {
      ok = false;
      why << "degenerate cell; ";
      break;
    }
  if (!std::isfinite(m.shape_regularity())) ok = false;
  why << m.num_cells() << " cells, h " << sci(m.h()) << ", shape " << sci(m.shape_regularity());
  return {"mesh " + name, ok, why.str()};
}

} // namespace

std::vector<CheckResult> check_meshes() {
  std::vector<CheckResult> out;
  try {
    out.push_back(check_mesh("equilateral:8", triangulate_2d(MeshFamily2D::Equilateral, 8)));
    out.push_back(check_mesh("split-squares:8", triangulate_2d(MeshFamily2D::SplitSquares, 8)));
    for (int level = 1; level <= 4; ++level)
      out.push_back(check_mesh("randomized:" + std::to_string(level),
                               triangulate_2d(MeshFamily2D::Randomized, level, 7)));
    out.push_back(check_mesh("quarter(randomized:2)",
                             refine_quarter(triangulate_2d(MeshFamily2D::Randomized, 2, 7))));
    const auto m1 = random_1d(64, 7);
    const bool ok = std::abs(m1.domain_length() - 1.0) <= 1e-12 && m1.vertices().back() == 1.0;
    out.push_back({"mesh random-1d:64", ok, "h " + sci(m1.h())});
  } catch (const std::exception& e) {
    out.push_back({"mesh construction", false, e.what()});
  }
  return out;
}

std::vector<CheckResult> check_jacobians() {
  const std::vector<std::pair<ExperimentConfig, int>> runs{
      {config("p1", "fe-k1", "uniform"), 8},      {config("s2", "fe-k3-gl", "random"), 8},
      {config("s1", "fe-k2", "random"), 8},       {config("s3", "dg-k2", "uniform"), 6},
      {config("p2", "dg-k3-gl", "random"), 5},    {config("p1-2d", "fe-k2", "split-squares"), 4},
      {config("s2-2d", "fe-k1", "randomized"), 2}};
  std::vector<CheckResult> out;
  SplitMix64 rng(2024);
  for (const auto& [cfg, n] : runs) {
    try {
      const auto gd = build_discretisation(cfg, n);
      const auto tc = case_from_name(cfg.case_id);
      const auto sys = assemble(gd, tc);
      Vector x = sys.prescribed;
      for (Index i : sys.free_dofs) x[i] = -0.5 + 2.5 * rng.uniform();
      Vector v = Vector::Zero(sys.size());
      Vector vf(sys.num_free());
      for (Index k = 0; k < sys.num_free(); ++k) v[sys.free_dofs[k]] = vf[k] = rng.uniform() - 0.5;
      const double step = 1e-7;
      const Vector fd = (sys.residual(tc.model, x + step * v) - sys.residual(tc.model, x - step * v)) /
                        (2.0 * step);
      const Vector jv = sys.jacobian(tc.model, x) * vf;
      const double rel = (jv - fd).norm() / std::max(jv.norm(), 1e-300);
      out.push_back({"jacobian " + label(cfg, n), rel <= 1e-5, "relative " + sci(rel)});
    } catch (const std::exception& e) {
      out.push_back({"jacobian " + label(cfg, n), false, e.what()});
    }
  }
  return out;
}

std::vector<CheckResult> check_manufactured() {
  std::vector<CheckResult> out;
  for (const auto& id : case_names()) {
    const auto tc = case_from_name(id);
    if (tc.has_flux()) continue;
    double worst = 0.0;
    int samples = 0;
    auto far = [&](double s) {
      for (double b : tc.breakpoints)
        if (std::abs(s - b) < 0.02) return false;
      return true;
    };
    if (tc.dim == 1) {
      for (int i = 1; i < 200; ++i) {
        const double x = i / 200.0;
        if (!far(x)) continue;
        worst = std::max(worst, std::abs(pde_residual(tc, point1d(x))));
        ++samples;
      }
    } else {
      for (int i = 1; i < 40; ++i)
        for (int j = 1; j < 40; ++j) {
          const Point x(i / 40.0, j / 40.0);
          if (!far(tc.coordinate(x))) continue;
          worst = std::max(worst, std::abs(pde_residual(tc, x)));
          ++samples;
        }
    }
    out.push_back({"manufactured " + id, worst <= 1e-4,
                   "max residual " + sci(worst) + " over " + std::to_string(samples) + " points"});
  }
  return out;
}

std::vector<CheckResult> check_term_d() {
  std::vector<CheckResult> out;
  const std::vector<std::string> fe1{"fe-k1", "fe-k2", "fe-k3-equi6", "fe-k3-equi8", "fe-k3-gl",
                                     "dg-k1", "dg-k2", "dg-k3-equi6", "dg-k3-equi8", "dg-k3-gl"};
  for (const auto& id : {"r1", "p1", "s1", "s3"})
    for (const auto& v : fe1) {
      const auto cfg = config(id, v, "random");
      try {
        const double d = term_d_defect(build_discretisation(cfg, 17), case_from_name(id));
        out.push_back({"term_D " + label(cfg, 17), d <= 1e-12, "max defect " + sci(d)});
      } catch (const std::exception& e) {
        out.push_back({"term_D " + label(cfg, 17), false, e.what()});
      }
    }
  for (const auto& id : {"p1-2d", "s1-2d"})
    for (const auto& v : {"fe-k1", "fe-k2", "fe-k1-quarter"})
      for (const auto& [mesh, n] : std::vector<std::pair<std::string, int>>{{"split-squares", 6},
                                                                            {"randomized", 2}}) {
        const auto cfg = config(id, v, mesh);
        try {
          const double d = term_d_defect(build_discretisation(cfg, n), case_from_name(id));
          out.push_back({"term_D " + label(cfg, n), d <= 1e-12, "max defect " + sci(d)});
        } catch (const std::exception& e) {
          out.push_back({"term_D " + label(cfg, n), false, e.what()});
        }
      }
  return out;
}

std::vector<CheckResult> check_uniqueness() {
  const std::vector<std::pair<ExperimentConfig, int>> runs{
      {config("s2", "fe-k2", "uniform"), 32},
      {config("p1", "fe-k3-gl", "random"), 24},
      {config("s3", "dg-k3-gl", "uniform"), 16},
      {config("s1-2d", "fe-k2", "split-squares"), 8}};
  std::vector<CheckResult> out;
  for (const auto& [cfg, n] : runs) {
    try {
      const auto gd = build_discretisation(cfg, n);
      const auto tc = case_from_name(cfg.case_id);
      const auto sys = assemble(gd, tc);
      const auto a = solve(sys, tc.model);
      Vector guess(sys.size());
      SplitMix64 rng(99);
      for (Index i = 0; i < guess.size(); ++i) guess[i] = 3.0 * rng.uniform() - 1.0;
      const auto b = solve(sys, tc.model, {}, guess);
      const Vector za = zeta_of(a, sys, tc.model), zb = zeta_of(b, sys, tc.model);
      double du = 0.0;
      for (Index i = 0; i < sys.size(); ++i)
        if (!sys.hybrid[i]) du = std::max(du, std::abs(a.u[i] - b.u[i]));
      const double dz = (za - zb).cwiseAbs().maxCoeff();
      out.push_back({"uniqueness " + label(cfg, n), du <= 1e-7 && dz <= 1e-7,
                     "max |Pi u| diff " + sci(du) + ", max |zeta| diff " + sci(dz)});
    } catch (const std::exception& e) {
      out.push_back({"uniqueness " + label(cfg, n), false, e.what()});
    }
  }
  return out;
}

std::vector<CheckResult> check_energy() {
  const std::vector<std::pair<ExperimentConfig, int>> runs{
      {config("r1", "fe-k1", "uniform"), 64},   {config("p1", "fe-k2", "random"), 64},
      {config("s1", "fe-k3-gl", "uniform"), 64}, {config("s3", "dg-k3-equi8", "random"), 32},
      {config("p2-2d", "fe-k2", "equilateral"), 10}};
  std::vector<CheckResult> out;
  for (const auto& [cfg, n] : runs) {
    try {
      const auto gd = build_discretisation(cfg, n);
      const auto tc = case_from_name(cfg.case_id);
      const auto sys = assemble(gd, tc);
      const auto r = solve(sys, tc.model);
      const auto e = sys.energy_identity_check(tc.model, r.u);
      const double bound = 1e-8 * (1.0 + std::abs(e.rhs));
      out.push_back({"energy " + label(cfg, n), e.defect <= bound,
                     "defect " + sci(e.defect) + " (bound " + sci(bound) + ")"});
    } catch (const std::exception& ex) {
      out.push_back({"energy " + label(cfg, n), false, ex.what()});
    }
  }
  return out;
}

std::vector<CheckResult> verify_all() {
  std::vector<CheckResult> all;
  for (auto suite : {+[] { return check_quadrature(); }, &check_meshes, &check_jacobians,
                     &check_manufactured, &check_term_d, &check_uniqueness, &check_energy}) {
    auto part = suite();
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

} // namespace gdml
