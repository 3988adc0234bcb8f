#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ficnav/runner.hpp"
#include "ficnav/scenario.hpp"

using namespace ficnav;
namespace fs = std::filesystem;

namespace {

Scenario bundled(const std::string& name) {
  std::ifstream in(fs::path(FICNAV_SCENARIO_DIR) / (name + ".scn"), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string csv_of(const Scenario& sc, const RunOptions& opt = {}) {
  std::ostringstream os;
  CsvSink sink(os);
  Simulation sim(sc, opt);
  drive(sim, {&sink});
  return os.str();
}

}  // namespace

TEST(Simulation, StepCountFromDuration) {
  Simulation sim(bundled("task_free"), RunOptions{.duration = 0.25});
  EXPECT_EQ(sim.total_steps(), 250);
  int n = 0;
  while (!sim.done()) {
    EXPECT_EQ(sim.step().step, n);
    ++n;
  }
  EXPECT_EQ(n, 250);
  EXPECT_NEAR(sim.world().time, 0.25, 1e-12);
}

TEST(Simulation, OverridesApply) {
  Simulation sim(bundled("maze_ada"), RunOptions{.feedback_hz = 10.0, .seed = 99});
  EXPECT_EQ(sim.runtime()[0].feedback.rate(), 10.0);
  EXPECT_EQ(sim.scenario().seed, 99u);
}

TEST(Simulation, RecordHoldsStartOfStepState) {
  Simulation sim(bundled("task_free"), RunOptions{.duration = 1.0});
  for (int i = 0; i < 500; ++i) {
    const DofVector before = sim.world().agents[0].pose;
    EXPECT_EQ(sim.step().agents[0].x, before);
  }
}

TEST(Determinism, SameSeedSameCsv) {
  const Scenario sc = bundled("swarm_11");
  const RunOptions opt{.duration = 2.0};
  EXPECT_EQ(csv_of(sc, opt), csv_of(sc, opt));
}

TEST(Determinism, ParallelMatchesSerial) {
  const Scenario sc = bundled("swarm_11");
  EXPECT_EQ(csv_of(sc, {.duration = 2.0}), csv_of(sc, {.duration = 2.0, .parallel = true}));
}

TEST(Determinism, SeedChangesRandomPlans) {
  const Scenario sc = bundled("swarm_11");
  EXPECT_NE(csv_of(sc, {.seed = 1, .duration = 0.5}), csv_of(sc, {.seed = 2, .duration = 0.5}));
}

TEST(Summary, TaskFreeCompletes) {
  const Scenario sc = bundled("task_free");
  const RunSummary s = simulate(sc);
  EXPECT_EQ(s.steps, 30000);
  ASSERT_EQ(s.agents.size(), 1u);
  const AgentSummary& a = s.agents[0];
  EXPECT_TRUE(a.completed());
  EXPECT_EQ(a.advances, 1u);
  EXPECT_EQ(a.penetrations, 0u);
  EXPECT_EQ(a.non_finite, 0u);
  EXPECT_LE(a.band_speed_ratio, 1.0);
  EXPECT_GT(a.q_max, 0.0);
  ASSERT_EQ(a.rmse.size(), 3u);
  const std::string text = format_summary(s, sc);
  EXPECT_NE(text.find("ada.completed = true"), std::string::npos);
  EXPECT_NE(text.find("ada.rmse.yaw = "), std::string::npos);
}

TEST(Summary, RunWritesBothFiles) {
  const fs::path dir = fs::temp_directory_path() / "ficnav_runner_test";
  fs::remove_all(dir);
  Scenario sc = bundled("task_free");
  sc.duration = 0.1;
  run(sc, dir);
  EXPECT_TRUE(fs::exists(dir / "task_free.csv"));
  EXPECT_TRUE(fs::exists(dir / "task_free.summary.txt"));
  std::ifstream in(dir / "task_free.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2 + 100);
  fs::remove_all(dir);
}

TEST(GatesInOrder, DirectionAndSequence) {
  std::vector<Obstacle> obs(3);
  obs[0].geometry = Gate{{0, 0, 0}, 0, 1, 1, 1, 0.1};
  obs[1].geometry = Box{{5, 5, 0}, {1, 1, 1}};
  obs[2].geometry = Gate{{4, 0, 0}, 0, -1, 1, 1, 0.1};
  EXPECT_TRUE(gates_in_order(obs, {{0, 1}, {2, -1}}));
  EXPECT_FALSE(gates_in_order(obs, {{2, -1}, {0, 1}}));
  EXPECT_FALSE(gates_in_order(obs, {{0, -1}, {2, -1}}));
  EXPECT_TRUE(gates_in_order(obs, {{0, -1}, {0, 1}, {2, 1}, {2, -1}}));
}

TEST(HeldFeedback, TenHertzStillConverges) {
  const RunSummary s = simulate(bundled("task_free"), RunOptions{.feedback_hz = 10.0});
  EXPECT_TRUE(s.agents[0].completed());
  EXPECT_EQ(s.agents[0].non_finite, 0u);
}

TEST(Bench, IdenticalInputsGiveUnitRatio) {
  Scenario sc = bundled("task_free");
  sc.duration = 2.0;
  const BenchReport r = bench(sc, sc, 3);
  EXPECT_EQ(r.steps, 2000);
  EXPECT_NEAR(r.ratio(), 1.0, 0.5);
  Scenario other = sc;
  other.duration = 1.0;
  EXPECT_THROW(bench(sc, other, 1), InvalidInput);
  EXPECT_THROW(bench(sc, sc, 0), InvalidInput);
}
