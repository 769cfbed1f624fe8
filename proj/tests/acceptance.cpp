// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "gdml/experiment.hpp"
#include "gdml/testcases.hpp"
#include "gdml/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace gdml;

namespace {

// Error columns of a convergence table.
enum Col { BetaPi = 0, ZetaPi = 1, ZetaGradI = 2, ZetaGrad = 3 };

struct Criterion {
  bool ok = true;
  std::ostringstream detail;

  void check(bool pass, const std::string& what) {
    if (!pass) {
      ok = false;
      detail << " [" << what << "]";
    }
  }
};

ExperimentConfig config(const std::string& id, const std::string& gd, const std::string& mesh,
                        bool exclude = false) {
  ExperimentConfig c;
  c.case_id = id;
  c.gd = gd;
  apply_mesh_spec(c, mesh);
  c.exclude_singular = exclude;
  return c;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// alpha of one column, or NaN when the sweep throws.
double alpha(const ExperimentConfig& c, Col col, std::string& err) {
  try {
    return run_convergence(c).fits[col].alpha;
  } catch (const std::exception& e) {
    err = e.what();
    return std::nan("");
  }
}

struct RateCache {
  std::vector<std::pair<std::string, ConvergenceTable>> tables;

  const ConvergenceTable& get(const ExperimentConfig& c) {
    const std::string key = c.to_json().dump();
    for (const auto& [k, t] : tables)
      if (k == key) return t;
    tables.emplace_back(key, run_convergence(c));
    return tables.back().second;
  }
};

RateCache cache;

// Checks |alpha - want| <= tol.
void near(Criterion& cr, const ExperimentConfig& c, Col col, double want, double tol) {
  const std::string tag = c.case_id + "/" + c.gd + "/" + c.mesh + " " + kErrorNames[col];
  try {
    const double a = cache.get(c).fits[col].alpha;
    cr.check(std::abs(a - want) <= tol, tag + " alpha=" + fmt(a) + " want " + fmt(want) + "+-" + fmt(tol));
  } catch (const std::exception& e) {
    cr.check(false, tag + " threw: " + e.what());
  }
}

// Checks lo <= alpha <= hi.
void within(Criterion& cr, const ExperimentConfig& c, Col col, double lo, double hi) {
  const std::string tag = c.case_id + "/" + c.gd + "/" + c.mesh + " " + kErrorNames[col];
  try {
    const double a = cache.get(c).fits[col].alpha;
    cr.check(a >= lo && a <= hi, tag + " alpha=" + fmt(a) + " want [" + fmt(lo) + "," + fmt(hi) + "]");
  } catch (const std::exception& e) {
    cr.check(false, tag + " threw: " + e.what());
  }
}

const std::vector<std::string> kFeVariants{"fe-k1", "fe-k2", "fe-k3-equi6", "fe-k3-equi8", "fe-k3-gl"};

Criterion quadrature() {
  Criterion cr;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& r : check_quadrature()) cr.check(r.passed, r.name + ": " + r.detail);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  cr.check(secs < 1.0, "runtime " + fmt(secs) + " s");
  return cr;
}

Criterion r1_rates() {
  Criterion cr;
  near(cr, config("r1", "fe-k1", "uniform"), ZetaPi, 2.0, 0.15);
  near(cr, config("r1", "fe-k1", "uniform"), ZetaGrad, 1.0, 0.15);
  near(cr, config("r1", "fe-k2", "uniform"), ZetaGradI, 3.0, 0.15);
  near(cr, config("r1", "fe-k2", "uniform"), ZetaGrad, 2.0, 0.15);
  near(cr, config("r1", "fe-k3-equi6", "uniform"), ZetaGradI, 1.0, 0.15);
  near(cr, config("r1", "fe-k3-equi8", "uniform"), ZetaGradI, 2.0, 0.15);
  near(cr, config("r1", "fe-k3-gl", "uniform"), ZetaGrad, 3.0, 0.15);
  return cr;
}

Criterion p2_rates() {
  Criterion cr;
  near(cr, config("p2", "fe-k2", "uniform"), ZetaGradI, 3.0, 0.2);
  near(cr, config("p2", "fe-k3-equi6", "uniform"), ZetaGradI, 1.0, 0.2);
  near(cr, config("p2", "fe-k3-equi8", "uniform"), ZetaGradI, 2.0, 0.2);
  near(cr, config("p2", "fe-k3-gl", "uniform"), ZetaGradI, 3.0, 0.2);
  near(cr, config("p2", "fe-k1", "uniform"), ZetaGrad, 1.0, 0.2);
  near(cr, config("p2", "fe-k3-equi8", "uniform"), ZetaGrad, 2.0, 0.2);
  near(cr, config("p2", "fe-k3-gl", "uniform"), ZetaGrad, 3.0, 0.2);
  return cr;
}

Criterion s1_constants() {
  Criterion cr;
  const auto c = solve_s1_constants();
  cr.check(std::abs(c.gamma - 0.33036) <= 5e-5, "gamma=" + std::to_string(c.gamma));
  cr.check(std::abs(c.a - 1.2545) <= 5e-5, "a=" + std::to_string(c.a));
  cr.check(std::abs(c.b + 1.7455) <= 5e-5, "b=" + std::to_string(c.b));
  return cr;
}

Criterion stefan_degradation() {
  Criterion cr;
  for (const auto& v : kFeVariants) {
    const auto c = config("s1", v, "uniform");
    near(cr, c, ZetaPi, 2.0, 0.25);
    within(cr, c, BetaPi, -1e9, 1.0 - 1e-12);
  }
  near(cr, config("s1", "fe-k3-equi6", "uniform"), ZetaGradI, 1.0, 0.15);
  within(cr, config("s1", "fe-k3-equi8", "uniform"), ZetaGradI, 1.4, 1e9);
  within(cr, config("s1", "fe-k3-gl", "uniform"), ZetaGradI, 1.4, 1e9);
  return cr;
}

Criterion exclusion() {
  Criterion cr;
  near(cr, config("s1", "fe-k3-equi8", "uniform", true), ZetaGradI, 2.0, 0.25);
  near(cr, config("s1", "fe-k3-gl", "uniform", true), ZetaGradI, 2.0, 0.25);
  near(cr, config("s1", "fe-k3-equi6", "uniform", true), ZetaGradI, 1.0, 0.15);
  return cr;
}

Criterion s3_rates() {
  Criterion cr;
  for (const auto& v : kFeVariants) within(cr, config("s3", v, "uniform"), ZetaGrad, 0.35, 0.85);
  return cr;
}

Criterion dg_rates() {
  Criterion cr;
  near(cr, config("r1", "dg-k3-equi6", "uniform"), ZetaGradI, 1.01, 0.2);
  near(cr, config("r1", "dg-k3-equi8", "uniform"), ZetaGradI, 2.0, 0.2);
  within(cr, config("r1", "dg-k3-gl", "uniform"), ZetaGradI, 2.8, 1e9);
  within(cr, config("p2", "dg-k3-gl", "uniform"), ZetaGradI, 2.8, 1e9);
  return cr;
}

Criterion rates_2d() {
  Criterion cr;
  near(cr, config("p1-2d", "fe-k1", "split-squares"), ZetaGradI, 2.04, 0.25);
  near(cr, config("p1-2d", "fe-k2", "split-squares"), ZetaGradI, 3.02, 0.25);
  within(cr, config("s2-2d", "fe-k1", "split-squares"), ZetaGradI, 1.3, 1e9);
  within(cr, config("s2-2d", "fe-k2", "split-squares"), ZetaGradI, 1.3, 1e9);
  near(cr, config("p1-2d", "fe-k1", "randomized"), ZetaGradI, 2.04, 0.4);
  near(cr, config("p1-2d", "fe-k2", "randomized"), ZetaGradI, 3.02, 0.4);
  within(cr, config("s2-2d", "fe-k1", "randomized"), ZetaGradI, 1.3 - 0.4, 1e9);
  within(cr, config("s2-2d", "fe-k2", "randomized"), ZetaGradI, 1.3 - 0.4, 1e9);
  return cr;
}

Criterion properties() {
  Criterion cr;
  for (const auto& r : verify_all()) cr.check(r.passed, r.name + ": " + r.detail);
  return cr;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Criterion()>>> criteria{
      {"quadrature exactness", quadrature},
      {"R1 rates", r1_rates},
      {"P2 rates", p2_rates},
      {"S1 constants", s1_constants},
      {"Stefan degradation (S1)", stefan_degradation},
      {"exclusion windows (S1)", exclusion},
      {"S3 rates", s3_rates},
      {"DG rates", dg_rates},
      {"2D rates", rates_2d},
      {"property suites", properties}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion cr;
    try {
      cr = criteria[i].second();
    } catch (const std::exception& e) {
      cr.check(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s (%.1f s)%s\n", cr.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                cr.detail.str().c_str());
    std::fflush(stdout);
    failed += !cr.ok;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
