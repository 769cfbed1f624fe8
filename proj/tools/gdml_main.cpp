// gdml command-line driver: run, convergence, compare, verify, list.

#include "gdml/experiment.hpp"
#include "gdml/testcases.hpp"
#include "gdml/verify.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace gdml;

namespace {

struct Options {
  std::string config_path;
  std::string case_id;
  std::string gd;
  std::string mesh;
  std::string sizes;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool exclude = false;
  std::string out;
};

void add_experiment_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON config (fields override defaults)");
  cmd->add_option("--case", o.case_id, "test case id (see `list`)");
  cmd->add_option("--gd", o.gd, "discretisation variant, e.g. fe-k2, dg-k3-gl, conforming-k1");
  cmd->add_option("--mesh", o.mesh, "mesh family, optionally with sizes: uniform:16,32");
  cmd->add_option("--sizes", o.sizes, "comma separated mesh sizes");
  cmd->add_option("--seed", o.seed, "seed of the random mesh families")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_flag("--exclude-singular", o.exclude, "drop cells meeting the case exclusion windows");
  cmd->add_option("--out", o.out, "output path (stdout when empty)");
}

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return ExperimentConfig::from_json(nlohmann::json::parse(in));
}

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig c = load_config(o.config_path);
  if (!o.case_id.empty()) c.case_id = o.case_id;
  if (!o.gd.empty()) c.gd = o.gd;
  if (!o.mesh.empty()) apply_mesh_spec(c, o.mesh);
  if (!o.sizes.empty()) c.sizes = parse_sizes(o.sizes);
  if (o.seed_set) c.seed = o.seed;
  if (o.exclude) c.exclude_singular = true;
  if (!o.out.empty()) c.out = o.out;
  c.validate();
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path + "'");
  os << text;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mass-lumped gradient schemes for degenerate elliptic problems"};
  app.require_subcommand(1);

  Options run_o, conv_o, cmp_a;
  Options cmp_b;
  std::string samples_path;

  auto* run = app.add_subcommand("run", "single solve; JSON report");
  add_experiment_flags(run, run_o);
  run->add_option("--samples", samples_path, "write (x, Pi_D u, Pi_D* zeta(u)) samples as CSV");

  auto* conv = app.add_subcommand("convergence", "sweep over sizes; CSV with C/alpha footer");
  add_experiment_flags(conv, conv_o);

  auto* cmp = app.add_subcommand("compare", "ratios E_b/E_a and their fit C (h/h0)^alpha");
  add_experiment_flags(cmp, cmp_a);
  cmp->add_option("--gd-b", cmp_b.gd, "variant of the second scheme")->required();
  cmp->add_option("--config-b", cmp_b.config_path, "JSON config of the second scheme");

  std::string preset_path, table_dir;
  auto* table = app.add_subcommand("table", "every column of a table preset; one convergence CSV each");
  table->add_option("--config", preset_path, "table preset (see presets/)")->required();
  table->add_option("--out", table_dir, "directory for <case>_<gd>_<mesh>.csv (stdout when empty)");

  auto* verify = app.add_subcommand("verify", "run the built-in verification suites");
  auto* list = app.add_subcommand("list", "list cases, variants and mesh families");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = resolve(run_o);
      const auto sizes = cfg.effective_sizes();
      const auto r = run_single(cfg, sizes.front(), !samples_path.empty());
      emit(cfg.out, run_report(cfg, r).dump(2) + "\n");
      if (!samples_path.empty()) emit(samples_path, samples_csv(r));
    } else if (conv->parsed()) {
      const auto cfg = resolve(conv_o);
      emit(cfg.out, convergence_csv(run_convergence(cfg)));
    } else if (cmp->parsed()) {
      const auto a = resolve(cmp_a);
      ExperimentConfig b = cmp_b.config_path.empty() ? a : load_config(cmp_b.config_path);
      b.gd = cmp_b.gd;
      b.validate();
      emit(a.out, compare_csv(run_compare(a, b)));
    } else if (table->parsed()) {
      std::ifstream in(preset_path);
      if (!in) throw ConfigError("cannot open config '" + preset_path + "'");
      const auto runs = preset_runs(nlohmann::json::parse(in));
      if (!table_dir.empty()) std::filesystem::create_directories(table_dir);
      for (const auto& [cfg, gd_b] : runs) {
        std::string label = run_label(cfg), csv;
        if (gd_b.empty()) {
          csv = convergence_csv(run_convergence(cfg));
        } else {
          ExperimentConfig b = cfg;
          b.gd = gd_b;
          csv = compare_csv(run_compare(cfg, b));
          label += "_vs_" + gd_b;
        }
        if (table_dir.empty())
          std::cout << "# " << label << "\n" << csv << "\n";
        else
          emit(table_dir + "/" + label + ".csv", csv);
      }
    } else if (verify->parsed()) {
      int failed = 0;
      for (const auto& c : verify_all()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        failed += c.passed ? 0 : 1;
      }
      std::cout << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks passed\n");
      return failed ? 1 : 0;
    } else if (list->parsed()) {
      std::cout << "cases:";
      for (const auto& c : case_names()) std::cout << ' ' << c;
      std::cout << "\nvariants: fe-k1 fe-k2 fe-k3-equi6 fe-k3-equi8 fe-k3-gl fe-k1-quarter"
                   " dg-k1 dg-k2 dg-k3-equi6 dg-k3-equi8 dg-k3-gl conforming-k1\n"
                   "meshes: uniform random (1D); equilateral split-squares randomized (2D)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
