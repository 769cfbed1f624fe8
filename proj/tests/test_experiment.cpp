#include "gdml/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace gdml;

namespace {

ExperimentConfig cfg(const std::string& id, const std::string& gd, const std::string& mesh,
                     std::vector<int> sizes) {
  ExperimentConfig c;
  c.case_id = id;
  c.gd = gd;
  apply_mesh_spec(c, mesh);
  c.sizes = std::move(sizes);
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GDML_CLI) + " " + args + " >/dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

} // namespace

TEST(Config, MeshSpec) {
  ExperimentConfig c;
  apply_mesh_spec(c, "uniform:16,32");
  EXPECT_EQ(c.mesh, "uniform");
  EXPECT_EQ(c.sizes, (std::vector<int>{16, 32}));
  EXPECT_THROW(parse_sizes("16,x"), ConfigError);
  EXPECT_THROW(parse_sizes("0"), ConfigError);
  EXPECT_EQ(default_sizes("uniform"), (std::vector<int>{16, 32, 64, 512, 1024, 2048}));
  EXPECT_EQ(default_sizes("split-squares"), (std::vector<int>{25, 50, 100}));
}

TEST(Config, Validate) {
  EXPECT_NO_THROW(cfg("r1", "fe-k1", "uniform", {}).validate());
  EXPECT_THROW(cfg("r1", "fe-k5", "uniform", {}).validate(), Error);
  EXPECT_THROW(cfg("p1-2d", "fe-k1", "uniform", {}).validate(), ConfigError);
  EXPECT_THROW(cfg("p1-2d", "dg-k1", "split-squares", {}).validate(), ConfigError);
  EXPECT_THROW(cfg("s3", "conforming-k1", "uniform", {}).validate(), ConfigError);
  EXPECT_THROW(cfg("r1", "fe-k1-quarter", "uniform", {}).validate(), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  auto c = cfg("s1", "fe-k3-gl", "random", {16, 32});
  c.seed = 77;
  c.exclude_singular = true;
  c.solver.max_iters = 33;
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen) * std::pow(10.0, static_cast<int>(u(gen)));
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(Convergence, R1Rates) {
  const auto t = run_convergence(cfg("r1", "fe-k1", "uniform", {16, 32, 64, 512, 1024, 2048}));
  EXPECT_NEAR(t.fits[1].alpha, 2.0, 0.05);
  EXPECT_NEAR(t.fits[3].alpha, 1.0, 0.05);
  const auto e = run_convergence(cfg("r1", "fe-k3-equi6", "uniform", {16, 32, 64, 512, 1024, 2048}));
  EXPECT_NEAR(e.fits[2].alpha, 1.0, 0.05);
}

TEST(Convergence, CsvLayoutAndDeterminism) {
  const auto c = cfg("p1", "fe-k2", "random", {8, 16, 32});
  const std::string a = convergence_csv(run_convergence(c));
  const std::string b = convergence_csv(run_convergence(c));
  EXPECT_EQ(a, b);
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "N,card_i,h,e_beta_pi,e_zeta_pi,e_zeta_grad_interp,e_zeta_grad");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("C,", 0) == 0 || line.rfind("alpha,", 0) == 0) continue;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST(Convergence, ThreadCountDoesNotChangeOutput) {
  const auto c = cfg("s2", "fe-k1", "random", {16, 24, 40, 64});
  setenv("GDML_THREADS", "1", 1);
  const std::string one = convergence_csv(run_convergence(c));
  setenv("GDML_THREADS", "4", 1);
  const std::string four = convergence_csv(run_convergence(c));
  unsetenv("GDML_THREADS");
  EXPECT_EQ(one, four);
}

TEST(Compare, IdenticalConfigs) {
  const auto c = cfg("r1", "fe-k2", "uniform", {8, 16, 32});
  const auto t = run_compare(c, c);
  for (const auto& r : t.ratios)
    for (double v : r) EXPECT_DOUBLE_EQ(v, 1.0);
  for (const auto& f : t.fits) EXPECT_NEAR(f.alpha, 0.0, 1e-12);
}

TEST(Compare, MismatchedSizes) {
  EXPECT_THROW(run_compare(cfg("r1", "fe-k1", "uniform", {8, 16}), cfg("r1", "fe-k2", "uniform", {8, 32})),
               MismatchedSizes);
}

TEST(Compare, QuarterAgainstP2SameUnknowns) {
  const auto a = run_single(cfg("p2-2d", "fe-k1-quarter", "split-squares", {}), 6);
  const auto b = run_single(cfg("p2-2d", "fe-k2", "split-squares", {}), 6);
  EXPECT_EQ(a.errors.card_i, b.errors.card_i);
  EXPECT_DOUBLE_EQ(a.errors.h, b.errors.h);
}

TEST(Run, Report) {
  const auto c = cfg("r1", "fe-k1", "uniform", {16});
  const auto r = run_single(c, 16, true);
  const auto j = run_report(c, r);
  EXPECT_GT(j["errors"]["e_zeta_grad"].get<double>(), 0.0);
  EXPECT_EQ(j["n"].get<int>(), 16);
  EXPECT_EQ(r.samples.size(), 16u * 8);
  EXPECT_EQ(samples_csv(r).substr(0, 24), "x,y,pi_u,pi_star_zeta_u\n");
}

TEST(Run, ConformingVariant) {
  const auto r = run_single(cfg("s2", "conforming-k1", "uniform", {}), 64);
  EXPECT_GT(r.errors.e_zeta_pi, 0.0);
  EXPECT_LT(r.errors.e_zeta_pi, 1e-2);
}

TEST(Run, StefanOscillatesNearJump) {
  const auto r = run_single(cfg("s1", "fe-k3-gl", "uniform", {}), 16, true);
  // zeta(u) >= 0 exactly, but the reconstructed zeta dips below near the jumps.
  double lo = 1e9, lo_u = 1e9;
  for (const auto& s : r.samples) {
    lo = std::min(lo, s.pi_star_zeta);
    lo_u = std::min(lo_u, s.pi_u);
  }
  EXPECT_LT(lo, -1e-6);
  EXPECT_GE(lo_u, 0.0);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("list"), 0);
  EXPECT_EQ(run_cli("run --case r1 --gd fe-k1 --mesh uniform:16"), 0);
  EXPECT_NE(run_cli("run --case r1 --gd fe-k9 --mesh uniform:16"), 0);
  EXPECT_NE(run_cli("run --case nope"), 0);
  EXPECT_NE(run_cli("bogus"), 0);
}

TEST(Cli, ConvergenceIsByteIdentical) {
  const std::string a = testing::TempDir() + "conv_a.csv", b = testing::TempDir() + "conv_b.csv";
  const std::string args = "convergence --case s1 --gd fe-k2 --mesh random:8,16,32 --seed 4 --out ";
  ASSERT_EQ(run_cli(args + a), 0);
  ASSERT_EQ(run_cli(args + b), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST(Cli, ConfigFile) {
  const std::string path = testing::TempDir() + "preset.json";
  std::ofstream(path) << R"({"case": "p2", "gd": "fe-k3-gl", "mesh": "uniform", "sizes": [8, 16]})";
  const std::string out = testing::TempDir() + "preset.csv";
  ASSERT_EQ(run_cli("convergence --config " + path + " --out " + out), 0);
  const std::string csv = slurp(out);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  std::remove(path.c_str());
  std::remove(out.c_str());
}

TEST(Preset, AllBundledPresetsValidate) {
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(GDML_PRESETS)) {
    std::ifstream in(entry.path());
    const auto runs = preset_runs(nlohmann::json::parse(in));
    EXPECT_FALSE(runs.empty()) << entry.path();
    ++files;
  }
  EXPECT_GE(files, 10);
}

TEST(Preset, RunsOverrideTopLevel) {
  const auto j = nlohmann::json::parse(R"({"case": "p2", "mesh": "uniform:8,16", "seed": 3,
    "runs": [{"gd": "fe-k2"}, {"gd": "fe-k1", "mesh": "random"}, {"gd": "fe-k1", "gd_b": "fe-k2"}]})");
  const auto runs = preset_runs(j);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[0].config.gd, "fe-k2");
  EXPECT_EQ(runs[0].config.sizes, (std::vector<int>{8, 16}));
  EXPECT_EQ(runs[1].config.mesh, "random");
  EXPECT_EQ(runs[1].config.seed, 3u);
  EXPECT_EQ(runs[2].gd_b, "fe-k2");
  EXPECT_EQ(run_label(runs[1].config), "p2_fe-k1_random");
  EXPECT_THROW(preset_runs(nlohmann::json::parse(R"({"runs": [{"gd": "fe-k7"}]})")), Error);
}

TEST(Cli, TableWritesOneCsvPerRun) {
  const std::string path = testing::TempDir() + "table.json";
  const std::string dir = testing::TempDir() + "table_out";
  std::ofstream(path) << R"({"case": "r1", "mesh": "uniform:8,16",
    "runs": [{"gd": "fe-k1"}, {"gd": "fe-k2"}, {"gd": "fe-k1", "gd_b": "fe-k2"}]})";
  ASSERT_EQ(run_cli("table --config " + path + " --out " + dir), 0);
  EXPECT_EQ(slurp(dir + "/r1_fe-k2_uniform.csv"),
            convergence_csv(run_convergence(cfg("r1", "fe-k2", "uniform", {8, 16}))));
  EXPECT_EQ(slurp(dir + "/r1_fe-k1_uniform_vs_fe-k2.csv").substr(0, 2), "h,");
  std::filesystem::remove_all(dir);
  std::remove(path.c_str());
}
