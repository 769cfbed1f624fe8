#include "gdml/experiment.hpp"

#include "gdml/conforming.hpp"
#include "gdml/gd.hpp"
#include "gdml/mesh.hpp"
#include "gdml/system.hpp"
#include "gdml/testcases.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace gdml {

using nlohmann::json;

const std::array<const char*, 4> kErrorNames{"e_beta_pi", "e_zeta_pi", "e_zeta_grad_interp",
                                             "e_zeta_grad"};

namespace {

bool is_1d_family(const std::string& f) { return f == "uniform" || f == "random"; }

bool is_conforming(const std::string& gd) { return gd == "conforming-k1"; }

Mesh1D mesh_1d(const ExperimentConfig& cfg, int n) {
  return cfg.mesh == "uniform" ? uniform_1d(n) : random_1d(n, cfg.seed);
}

} // namespace

GradientDiscretisation build_discretisation(const ExperimentConfig& cfg, int n) {
  const auto v = GDVariant::parse(cfg.gd);
  if (cfg.dim() == 1) {
    const Mesh1D mesh = mesh_1d(cfg, n);
    if (v.kind == GDKind::DG) return GradientDiscretisation::build_dg(mesh, v.degree, v.lumping_rule(1));
    if (v.quarter) throw Unsupported("fe-k1-quarter is a 2D variant");
    return GradientDiscretisation::build_fe(mesh, v.degree, v.lumping_rule(1));
  }
  if (v.kind == GDKind::DG) throw Unsupported("DG variants are 1D only");
  Mesh2D mesh = triangulate_2d(mesh_family_from_name(cfg.mesh), n, cfg.seed);
  if (v.quarter) mesh = refine_quarter(mesh);
  return GradientDiscretisation::build_fe(mesh, v.degree, v.lumping_rule(2));
}

namespace {

std::vector<SolutionSample> sample_solution(const GradientDiscretisation& gd, const Vector& u,
                                            const Vector& z) {
  std::vector<SolutionSample> out;
  for (Index c = 0; c < gd.num_cells(); ++c) {
    std::vector<Point> refs;
    if (gd.dim() == 1) {
      for (int s = 0; s < 8; ++s) refs.push_back(point1d((s + 0.5) / 8.0));
    } else {
      refs = {Point(1.0 / 3, 1.0 / 3), Point(2.0 / 3, 1.0 / 6), Point(1.0 / 6, 2.0 / 3),
              Point(1.0 / 6, 1.0 / 6)};
    }
    for (const auto& xi : refs) {
      const Point x = gd.to_physical(c, xi);
      out.push_back({x, gd.pi_lumped(u, x, c), gd.pi_star(z, x, c)});
    }
  }
  return out;
}

RunOutcome run_conforming(const ExperimentConfig& cfg, const TestCase& tc, int n, bool samples) {
  const Mesh1D mesh = mesh_1d(cfg, n);
  const auto res = solve_conforming(mesh, tc, cfg.solver);
  RunOutcome out;
  out.n = n;
  out.errors = conforming_errors(mesh, tc, res, {cfg.exclude_singular, 10});
  out.iterations = res.iterations;
  out.final_residual = res.final_residual;
  out.residual_history = res.residual_history;
  if (samples) {
    const TransformedModel tm(tc.model);
    for (Index j = 0; j < mesh.num_cells(); ++j)
      for (int s = 0; s < 8; ++s) {
        const double t = (s + 0.5) / 8.0;
        const double w = (1.0 - t) * res.w[j] + t * res.w[j + 1];
        out.samples.push_back(
            {point1d(mesh.left(j) + t * mesh.length(j)), tm.inverse(w), tm.mu(w)});
      }
  }
  return out;
}

} // namespace

std::vector<int> default_sizes(const std::string& family) {
  if (is_1d_family(family)) return {16, 32, 64, 512, 1024, 2048};
  if (family == "randomized" || family == "random-2d") return {3, 4, 5};
  return {25, 50, 100};
}

std::vector<int> parse_sizes(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    int v = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || v <= 0)
      throw ConfigError("bad mesh size '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void apply_mesh_spec(ExperimentConfig& cfg, const std::string& spec) {
  const auto colon = spec.find(':');
  cfg.mesh = spec.substr(0, colon);
  if (colon != std::string::npos) cfg.sizes = parse_sizes(spec.substr(colon + 1));
}

std::vector<int> ExperimentConfig::effective_sizes() const {
  return sizes.empty() ? default_sizes(mesh) : sizes;
}

int ExperimentConfig::dim() const { return is_1d_family(mesh) ? 1 : 2; }

void ExperimentConfig::validate() const {
  const auto tc = case_from_name(case_id);
  if (!is_1d_family(mesh)) mesh_family_from_name(mesh);
  if (tc.dim != dim())
    throw ConfigError("case '" + case_id + "' is " + std::to_string(tc.dim) + "D but mesh '" +
                      mesh + "' is " + std::to_string(dim()) + "D");
  if (is_conforming(gd)) {
    if (dim() != 1) throw ConfigError("conforming-k1 is 1D only");
    if (tc.has_flux()) throw ConfigError("conforming-k1 needs F = 0");
  } else {
    const auto v = GDVariant::parse(gd);
    if (v.quarter && dim() != 2) throw ConfigError("fe-k1-quarter is a 2D variant");
    if (v.kind == GDKind::DG && dim() != 1) throw ConfigError("DG variants are 1D only");
  }
  for (int n : sizes)
    if (n <= 0) throw ConfigError("mesh sizes must be positive");
  solver.validate();
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.case_id = j.value("case", c.case_id);
  c.gd = j.value("gd", c.gd);
  if (j.contains("mesh")) apply_mesh_spec(c, j.at("mesh").get<std::string>());
  if (j.contains("sizes")) c.sizes = j.at("sizes").get<std::vector<int>>();
  c.seed = j.value("seed", c.seed);
  c.exclude_singular = j.value("exclude_singular", c.exclude_singular);
  c.out = j.value("out", c.out);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    auto& d = c.solver;
    d.tol_abs = s.value("tol_abs", d.tol_abs);
    d.tol_rel = s.value("tol_rel", d.tol_rel);
    d.max_iters = s.value("max_iters", d.max_iters);
    d.backtrack = s.value("backtrack", d.backtrack);
    d.min_step = s.value("min_step", d.min_step);
    d.armijo = s.value("armijo", d.armijo);
    d.continuation_eps = s.value("continuation_eps", d.continuation_eps);
    d.stagnation_window = s.value("stagnation_window", d.stagnation_window);
    d.stagnation_decrease = s.value("stagnation_decrease", d.stagnation_decrease);
  }
  return c;
}

std::vector<PresetRun> preset_runs(const json& j) {
  json base = j;
  base.erase("runs");
  base.erase("table");
  const json runs = j.contains("runs") ? j.at("runs") : json::array({json::object()});
  std::vector<PresetRun> out;
  for (const auto& r : runs) {
    json merged = base;
    merged.merge_patch(r);
    PresetRun run{ExperimentConfig::from_json(merged), merged.value("gd_b", "")};
    run.config.validate();
    if (!run.gd_b.empty()) {
      ExperimentConfig b = run.config;
      b.gd = run.gd_b;
      b.validate();
    }
    out.push_back(std::move(run));
  }
  if (out.empty()) throw ConfigError("preset has an empty run list");
  return out;
}

std::string run_label(const ExperimentConfig& c) {
  std::string s = c.case_id + "_" + c.gd + "_" + c.mesh;
  if (c.exclude_singular) s += "_excl";
  return s;
}

json ExperimentConfig::to_json() const {
  return {{"case", case_id},
          {"gd", gd},
          {"mesh", mesh},
          {"sizes", effective_sizes()},
          {"seed", seed},
          {"exclude_singular", exclude_singular},
          {"solver",
           {{"tol_abs", solver.tol_abs},
            {"tol_rel", solver.tol_rel},
            {"max_iters", solver.max_iters},
            {"backtrack", solver.backtrack},
            {"min_step", solver.min_step},
            {"armijo", solver.armijo},
            {"continuation_eps", solver.continuation_eps},
            {"stagnation_window", solver.stagnation_window},
            {"stagnation_decrease", solver.stagnation_decrease}}}};
}

RunOutcome run_single(const ExperimentConfig& cfg, int n, bool want_samples) {
  cfg.validate();
  const TestCase tc = case_from_name(cfg.case_id);
  if (is_conforming(cfg.gd)) return run_conforming(cfg, tc, n, want_samples);

  const auto gd = build_discretisation(cfg, n);
  const auto sys = assemble(gd, tc);
  const auto res = solve(sys, tc.model, cfg.solver);
  RunOutcome out;
  out.n = n;
  out.errors = compute_errors(gd, tc, sys, res, {cfg.exclude_singular, 10});
  out.iterations = res.iterations;
  out.final_residual = res.final_residual;
  out.tolerance = res.tolerance;
  out.used_continuation = res.used_continuation;
  out.residual_history = res.residual_history;
  // fe-k1-quarter is indexed by the mesh it refines.
  if (GDVariant::parse(cfg.gd).quarter) out.errors.h *= 2.0;
  if (want_samples) out.samples = sample_solution(gd, res.u, zeta_of(res, sys, tc.model));
  return out;
}

json run_report(const ExperimentConfig& cfg, const RunOutcome& r) {
  const auto& e = r.errors;
  return {{"config", cfg.to_json()},
          {"n", r.n},
          {"solver",
           {{"iterations", r.iterations},
            {"final_residual", r.final_residual},
            {"tolerance", r.tolerance},
            {"used_continuation", r.used_continuation},
            {"residual_history", r.residual_history}}},
          {"errors",
           {{"card_i", e.card_i},
            {"h", e.h},
            {"e_beta_pi", e.e_beta_pi},
            {"e_zeta_pi", e.e_zeta_pi},
            {"e_zeta_grad_interp", e.e_zeta_grad_interp},
            {"e_zeta_grad", e.e_zeta_grad},
            {"excluded", e.excluded},
            {"cells_dropped", e.cells_dropped}}}};
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, p);
}

std::string samples_csv(const RunOutcome& r) {
  std::ostringstream os;
  os << "x,y,pi_u,pi_star_zeta_u\n";
  for (const auto& s : r.samples)
    os << format_double(s.x.x()) << ',' << format_double(s.x.y()) << ','
       << format_double(s.pi_u) << ',' << format_double(s.pi_star_zeta) << '\n';
  return os.str();
}

std::array<double, 4> error_columns(const ErrorReport& e) {
  return {e.e_beta_pi, e.e_zeta_pi, e.e_zeta_grad_interp, e.e_zeta_grad};
}

int thread_limit() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("GDML_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return std::min(v, hw);
  }
  return hw;
}

ConvergenceTable run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto sizes = cfg.effective_sizes();
  if (sizes.size() < 2) throw InsufficientData("a convergence sweep needs at least two sizes");
  ConvergenceTable t;
  t.config = cfg;
  t.rows.resize(sizes.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < sizes.size(); i = next++) {
      try {
        t.rows[i] = run_single(cfg, sizes[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::min<int>(thread_limit(), static_cast<int>(sizes.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  for (int col = 0; col < 4; ++col) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : t.rows)
      pts.emplace_back(static_cast<double>(r.errors.card_i), error_columns(r.errors)[col]);
    try {
      t.fits[col] = fit_rate(pts, cfg.dim());
    } catch (const InsufficientData&) {
      t.fits[col] = RegressionFit{std::nan(""), std::nan(""), std::nan(""), 0,
                                  static_cast<int>(pts.size())};
    }
  }
  return t;
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::ostringstream os;
  os << "N,card_i,h";
  for (const char* name : kErrorNames) os << ',' << name;
  os << '\n';
  for (const auto& r : t.rows) {
    os << r.n << ',' << r.errors.card_i << ',' << format_double(r.errors.h);
    for (double e : error_columns(r.errors)) os << ',' << format_double(e);
    os << '\n';
  }
  os << "C,,";
  for (const auto& f : t.fits) os << ',' << format_double(f.C);
  os << "\nalpha,,";
  for (const auto& f : t.fits) os << ',' << format_double(f.alpha);
  os << '\n';
  return os.str();
}

CompareTable compare_tables(const ConvergenceTable& a, const ConvergenceTable& b) {
  if (a.rows.size() != b.rows.size()) throw MismatchedSizes("compared sweeps differ in length");
  CompareTable t;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].n != b.rows[i].n) throw MismatchedSizes("compared sweeps use different sizes");
    t.h.push_back(a.rows[i].errors.h);
    const auto ea = error_columns(a.rows[i].errors);
    const auto eb = error_columns(b.rows[i].errors);
    std::array<double, 4> r{};
    for (int c = 0; c < 4; ++c) r[c] = eb[c] / ea[c];
    t.ratios.push_back(r);
  }
  for (int c = 0; c < 4; ++c) {
    std::vector<double> col;
    for (const auto& r : t.ratios) col.push_back(r[c]);
    try {
      t.fits[c] = fit_ratio(t.h, col);
    } catch (const InsufficientData&) {
      t.fits[c] = RegressionFit{std::nan(""), std::nan(""), std::nan(""), 0, 0};
    }
  }
  return t;
}

CompareTable run_compare(const ExperimentConfig& a, const ExperimentConfig& b) {
  if (a.effective_sizes() != b.effective_sizes())
    throw MismatchedSizes("compared configs must share mesh sizes");
  return compare_tables(run_convergence(a), run_convergence(b));
}

std::string compare_csv(const CompareTable& t) {
  std::ostringstream os;
  os << "h";
  for (const char* name : kErrorNames) os << ",r_" << name;
  os << '\n';
  for (std::size_t i = 0; i < t.h.size(); ++i) {
    os << format_double(t.h[i]);
    for (double r : t.ratios[i]) os << ',' << format_double(r);
    os << '\n';
  }
  os << "C";
  for (const auto& f : t.fits) os << ',' << format_double(f.C);
  os << "\nalpha";
  for (const auto& f : t.fits) os << ',' << format_double(f.alpha);
  os << '\n';
  return os.str();
}

} // namespace gdml
