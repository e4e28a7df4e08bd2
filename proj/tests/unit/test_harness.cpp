#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "isingflip/error.hpp"
#include "isingflip/harness.hpp"
#include "isingflip/model_io.hpp"

using namespace isingflip;
using namespace isingflip::harness;
namespace fs = std::filesystem;

namespace {

const char* kMatchingConfig = R"(
name = "matching"
seeds = [1, 2]

[model]
family = "matching"
n = 4
coupling = 0.5

[simulation]
horizon = 6000

[structure]
match_source = "reuse"

[params]
spacing = 1.0
)";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("isingflip_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SeedResult sample_seed(std::uint64_t seed) {
  SeedResult r;
  r.seed = seed;
  r.n = 6;
  r.true_edges = 3;
  r.learned_edges = 2;
  r.precision = 1.0;
  r.recall = 2.0 / 3.0;
  r.exact_recovery = false;
  r.passed = false;
  r.coupling_max_error = 0.1 + 0.2;
  r.field_max_error = 1.0 / 3.0;
  r.indeterminate_pairs = 1;
  r.time_simulate = 0.25;
  return r;
}

}  // namespace

TEST(Config, ParsesSections) {
  const auto cfg = parse_config(kMatchingConfig);
  EXPECT_EQ(cfg.name, "matching");
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2}));
  ASSERT_TRUE(cfg.generator.has_value());
  EXPECT_EQ(cfg.generator->family, GraphFamily::kMatching);
  EXPECT_DOUBLE_EQ(cfg.generator->coupling_min, 0.5);
  EXPECT_DOUBLE_EQ(cfg.sim.horizon, 6000.0);
  EXPECT_EQ(cfg.structure.match_source, MatchSource::kReuse);
  EXPECT_DOUBLE_EQ(cfg.params.spacing, 1.0);
  EXPECT_TRUE(cfg.kernel.is_glauber());
  EXPECT_NO_THROW(cfg.validate());

  const auto counted = parse_config(R"(
seed_count = 3
seed_base = 10
[model]
n = 5
[kernel]
type = "metropolis"
r_plus = 0.5
)");
  EXPECT_EQ(counted.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
  EXPECT_FALSE(counted.kernel.is_glauber());
  EXPECT_DOUBLE_EQ(counted.kernel.r_plus(), 0.5);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("[model]\nn = 4\nbogus = 1\n"), Error);
  EXPECT_THROW(parse_config("name = 3\n[model]\nn = 4\n"), Error);
  EXPECT_THROW(parse_config("[kernel]\ntype = \"glauber\"\n"), Error);
  EXPECT_THROW(parse_config("[model]\nn = 4\n[kernel]\ntype = \"heat\"\n"), Error);
  EXPECT_THROW(parse_config("[model]\nfile = \"m.json\"\nn = 3\n"), Error);
  try {
    parse_config("name = \"x\"\n[model\nn = 4\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  // tail mode without a bulk horizon
  auto cfg = parse_config("[model]\nn = 4\n[simulation]\nhorizon = 100\n");
  EXPECT_THROW(cfg.validate(), Error);
  cfg.structure.t_bulk = 80;
  cfg.structure.t_match = 40;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.structure.t_match = 20;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ModelFileResolvesRelativeToConfig) {
  const auto dir = scratch("file");
  save_model(IsingModel::create(2, {{0, 1, 0.5}}, {0.0, 0.0}), dir / "m.json");
  {
    std::ofstream out(dir / "exp.toml");
    out << "[model]\nfile = \"m.json\"\n[structure]\nmatch_source = \"reuse\"\n";
  }
  const auto cfg = load_config(dir / "exp.toml");
  ASSERT_TRUE(cfg.model_file.has_value());
  EXPECT_EQ(*cfg.model_file, dir / "m.json");
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_THROW(load_config(dir / "missing.toml"), Error);
  fs::remove_all(dir);
}

TEST(OutputDir, Precedence) {
  EXPECT_EQ(default_output_dir(fs::path("x")), fs::path("x"));
  ::setenv(kOutDirEnv, "/tmp/from-env", 1);
  EXPECT_EQ(default_output_dir(std::nullopt), fs::path("/tmp/from-env"));
  ::unsetenv(kOutDirEnv);
  EXPECT_EQ(default_output_dir(std::nullopt), fs::path("isingflip-out"));
}

TEST(Scoring, GraphAndErrors) {
  const auto truth = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {2, 3}});
  const auto s = score_graph(truth, Graph::from_edges(4, std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_FALSE(s.exact);
  EXPECT_TRUE(score_graph(truth, truth).exact);
  const auto empty = score_graph(Graph(3), Graph(3));
  EXPECT_TRUE(empty.exact);
  EXPECT_DOUBLE_EQ(empty.precision, 1.0);

  const auto m = IsingModel::create(3, {{0, 1, 0.5}}, {0.1, 0.0, -0.2});
  const std::vector<Coupling> learned{{0, 1, 0.45}, {1, 2, 0.08}};
  EXPECT_NEAR(coupling_max_error(m, learned), 0.08, 1e-15);
  EXPECT_NEAR(coupling_max_error(m, std::vector<Coupling>{}), 0.5, 1e-15);
  EXPECT_NEAR(field_max_error(m, std::vector<double>{0.1, 0.03, -0.1}), 0.1, 1e-15);
  EXPECT_THROW(field_max_error(m, std::vector<double>{0.0}), Error);
}

TEST(Report, JsonAndCsvRoundTrip) {
  EvalReport r;
  r.name = "round, \"trip\"";
  r.tau_bulk = 1e-6;
  r.seeds = {sample_seed(3), sample_seed(4)};
  r.seeds[1].ok = false;
  r.seeds[1].error = "calibration failed: x, \"y\"";
  r.seeds[1].coupling_max_error.reset();
  const auto j = report_from_json(report_to_json(r));
  EXPECT_TRUE(equivalent(j, r));
  EXPECT_EQ(j.seeds[0].coupling_max_error, r.seeds[0].coupling_max_error);
  EXPECT_EQ(j.seeds[0].time_simulate, 0.25);
  const auto c = report_from_csv(report_to_csv(r));
  EXPECT_TRUE(equivalent(c, r));
  EXPECT_EQ(c.name, r.name);
  EXPECT_FALSE(c.tau_match.has_value());
  EXPECT_EQ(r.failures(), 2u);
  EXPECT_DOUBLE_EQ(r.exact_recovery_rate(), 0.0);

  const auto plot = report_plot_csv(r);
  EXPECT_EQ(plot.rfind("seed,metric,value\n", 0), 0u);
  EXPECT_NE(plot.find("3,coupling_max_error,"), std::string::npos);

  const auto dir = scratch("report");
  write_report(r, dir);
  EXPECT_TRUE(equivalent(load_report(dir / "report.json"), r));
  EXPECT_TRUE(equivalent(load_report(dir / "report.csv"), r));
  EXPECT_TRUE(fs::exists(dir / "plot.csv"));
  fs::remove_all(dir);

  EXPECT_THROW(report_from_json("{\"seeds\": 3}"), Error);
  EXPECT_THROW(report_from_csv("seed,ok\n1,true\n"), Error);
}

TEST(Report, EquivalenceIgnoresWallTime) {
  EvalReport a;
  a.seeds = {sample_seed(1)};
  auto b = a;
  b.seeds[0].time_params = 99.0;
  EXPECT_TRUE(equivalent(a, b));
  b.seeds[0].learned_edges = 3;
  EXPECT_FALSE(equivalent(a, b));
}

TEST(RunExperiment, MatchingRecoversAndIsDeterministic) {
  auto cfg = parse_config(kMatchingConfig);
  const auto dir = scratch("run");
  cfg.output_dir = dir;
  cfg.write_traces = true;
  const auto a = run_experiment(cfg);
  ASSERT_EQ(a.seeds.size(), 2u);
  for (const auto& s : a.seeds) {
    EXPECT_TRUE(s.ok) << s.error;
    EXPECT_TRUE(s.exact_recovery);
    EXPECT_EQ(s.true_edges, 2u);
  }
  EXPECT_TRUE(fs::exists(dir / "logs" / "seed-1.log"));
  EXPECT_TRUE(fs::exists(dir / "traces" / "seed-2.bin"));

  cfg.jobs = 2;
  cfg.output_dir.clear();
  EXPECT_TRUE(equivalent(run_experiment(cfg), a));
  fs::remove_all(dir);
}

TEST(RunExperiment, ParamsOnlyAndEmptyModel) {
  auto cfg = parse_config(R"(
[model]
family = "empty"
n = 3
[simulation]
horizon = 400000
[structure]
enabled = false
)");
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.seeds.size(), 1u);
  const auto& s = r.seeds[0];
  EXPECT_TRUE(s.ok) << s.error;
  EXPECT_EQ(s.true_edges, 0u);
  ASSERT_TRUE(s.field_max_error.has_value());
  EXPECT_LE(*s.field_max_error, 0.05);
  EXPECT_EQ(*s.coupling_max_error, 0.0);
  EXPECT_FALSE(r.tau_bulk.has_value());
}

TEST(RunExperiment, PerSeedFailureIsRecorded) {
  auto cfg = parse_config(R"(
seeds = [5]
[model]
family = "regular"
n = 5
max_degree = 3
[simulation]
horizon = 100
[structure]
match_source = "reuse"
)");
  const auto r = run_experiment(cfg);
  EXPECT_FALSE(r.seeds[0].ok);
  EXPECT_FALSE(r.seeds[0].error.empty());
  EXPECT_EQ(r.failures(), 1u);
}

TEST(Calibration, FailsOnShortPilots) {
  CalibrationConfig cal;
  GeneratorSpec p;
  p.family = GraphFamily::kPath;
  p.n = 4;
  cal.pilots = {p};
  cal.seeds = {1};
  cal.horizon = 50.0;
  cal.t_match = 0.0;
  const auto r = calibrate(cal, Kernel::glauber(), StructureConfig{});
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.reason.empty());
  EXPECT_NE(calibration_to_json(r).find("\"ok\": false"), std::string::npos);
}
