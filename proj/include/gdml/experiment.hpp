#pragma once

#include "gdml/common.hpp"
#include "gdml/gd.hpp"
#include "gdml/metrics.hpp"
#include "gdml/solver.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace gdml {

/// Experiment description. Every field has a default so a preset may give
/// only what differs.
struct ExperimentConfig {
  std::string case_id = "r1";
  /// A GDVariant name or "conforming-k1".
  std::string gd = "fe-k1";
  /// uniform, random (1D); equilateral, split-squares, randomized (2D).
  std::string mesh = "uniform";
  /// N per mesh (cells in 1D, squares/rows in 2D, refinement level for randomized).
  std::vector<int> sizes;
  std::uint64_t seed = 1;
  bool exclude_singular = false;
  SolverConfig solver;
  std::string out;

  /// Sizes, or the family default when empty.
  std::vector<int> effective_sizes() const;
  int dim() const;
  void validate() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// One column of a table preset. A run with gd_b set is a comparison of
/// gd_b against config.gd.
struct PresetRun {
  ExperimentConfig config;
  std::string gd_b;
};

/// Each entry of "runs" overrides the top-level fields. A document without
/// "runs" is a single column.
std::vector<PresetRun> preset_runs(const nlohmann::json& j);
/// File stem for a run, e.g. s1_fe-k3-gl_uniform_excl.
std::string run_label(const ExperimentConfig& c);

/// "family" or "family:N1,N2,..." into cfg.mesh / cfg.sizes.
void apply_mesh_spec(ExperimentConfig& cfg, const std::string& spec);
std::vector<int> parse_sizes(const std::string& list);
std::vector<int> default_sizes(const std::string& family);

/// The GD of a (non-conforming) config at size n.
GradientDiscretisation build_discretisation(const ExperimentConfig& cfg, int n);

struct SolutionSample {
  Point x;
  double pi_u;
  double pi_star_zeta;
};

struct RunOutcome {
  int n = 0;
  ErrorReport errors;
  int iterations = 0;
  double final_residual = 0.0;
  double tolerance = 0.0;
  bool used_continuation = false;
  std::vector<double> residual_history;
  std::vector<SolutionSample> samples;
};

RunOutcome run_single(const ExperimentConfig& cfg, int n, bool want_samples = false);

nlohmann::json run_report(const ExperimentConfig& cfg, const RunOutcome& r);
std::string samples_csv(const RunOutcome& r);

struct ConvergenceTable {
  ExperimentConfig config;
  std::vector<RunOutcome> rows;
  /// One fit per error column, in ErrorReport order.
  std::array<RegressionFit, 4> fits;
};

/// Solves over the size list, GDML_THREADS workers at most. Rows come back in
/// size order whatever the completion order.
ConvergenceTable run_convergence(const ExperimentConfig& cfg);
std::string convergence_csv(const ConvergenceTable& t);

struct CompareTable {
  std::vector<double> h;
  std::vector<std::array<double, 4>> ratios;
  std::array<RegressionFit, 4> fits;
};

/// Ratios E_b / E_a per error and the fits r = C (h/h0)^alpha. Throws
/// MismatchedSizes unless the size lists agree.
CompareTable run_compare(const ExperimentConfig& a, const ExperimentConfig& b);
CompareTable compare_tables(const ConvergenceTable& a, const ConvergenceTable& b);
std::string compare_csv(const CompareTable& t);

std::array<double, 4> error_columns(const ErrorReport& e);
extern const std::array<const char*, 4> kErrorNames;

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

int thread_limit();

} // namespace gdml
