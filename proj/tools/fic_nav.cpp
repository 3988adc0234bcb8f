// fic_nav: run, benchmark and validate navigation scenarios.
//
//   fic_nav run <file> [--out DIR] [--feedback-hz N] [--seed N] [--parallel]
//   fic_nav bench <single> <swarm> --repeats N
//   fic_nav validate <file>
//   fic_nav list
//
// Exit codes: 0 ok, 1 diagnostics, 2 simulation halt.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ficnav/runner.hpp"
#include "ficnav/scenario.hpp"

#ifndef FICNAV_SCENARIO_DIR
#define FICNAV_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace ficnav;

namespace {

/// A path to an existing file, or the name of a bundled scenario.
fs::path locate(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  const fs::path bundled = fs::path(FICNAV_SCENARIO_DIR) / (arg + ".scn");
  if (fs::exists(bundled)) return bundled;
  throw InvalidInput("no such scenario file: " + arg);
}

Scenario load_file(const std::string& arg) {
  const fs::path p = locate(arg);
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_scenario(ss.str());
  } catch (const ScenarioError& e) {
    std::vector<Diagnostic> d = e.diagnostics();
    std::ostringstream msg;
    for (const auto& x : d) msg << p.string() << ":" << format_diagnostic(x) << "\n";
    throw InvalidInput(msg.str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive fractal-impedance navigation simulator"};
  app.require_subcommand(1);

  std::string file, out_dir = "out", single, swarm;
  double feedback_hz = 0.0;
  std::uint64_t seed = 0;
  bool parallel = false;
  std::size_t repeats = 20;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write <name>.csv and <name>.summary.txt");
  run_cmd->add_option("file", file, "Scenario file or bundled scenario name")->required();
  run_cmd->add_option("--out", out_dir, "Output directory");
  auto* hz_opt = run_cmd->add_option("--feedback-hz", feedback_hz, "Override every agent's feedback rate")
                     ->check(CLI::PositiveNumber);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_flag("--parallel", parallel, "Evaluate controllers concurrently");

  auto* bench_cmd = app.add_subcommand("bench", "Serial per-step timing of two scenarios");
  bench_cmd->add_option("single", single, "Single-agent scenario")->required();
  bench_cmd->add_option("swarm", swarm, "Multi-agent scenario")->required();
  bench_cmd->add_option("--repeats", repeats, "Runs per scenario")->check(CLI::PositiveNumber);

  auto* validate_cmd = app.add_subcommand("validate", "Parse and check a scenario file");
  validate_cmd->add_option("file", file, "Scenario file or bundled scenario name")->required();

  auto* list_cmd = app.add_subcommand("list", "List bundled scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const Scenario sc = load_file(file);
      RunOptions opt;
      if (*hz_opt) opt.feedback_hz = feedback_hz;
      if (*seed_opt) opt.seed = seed;
      opt.parallel = parallel;
      const RunSummary s = run(sc, out_dir, opt);
      std::cout << format_summary(s, sc);
    } else if (*bench_cmd) {
      const Scenario a = load_file(single), b = load_file(swarm);
      const BenchReport r = bench(a, b, repeats);
      std::cout << "repeats = " << r.repeats << "\n"
                << "steps = " << r.steps << "\n"
                << "single_ms_per_step = " << r.single.mean * 1e3 << " +- " << r.single.sd * 1e3 << "\n"
                << "swarm_ms_per_step = " << r.swarm.mean * 1e3 << " +- " << r.swarm.sd * 1e3 << "\n"
                << "ratio = " << r.ratio() << "\n";
    } else if (*validate_cmd) {
      const Scenario sc = load_file(file);
      std::cout << sc.name << ": ok (" << sc.agents.size() << (sc.agents.size() == 1 ? " agent, " : " agents, ") << sc.total_dof() << " DoF, "
                << sc.obstacles.size() << " obstacles)\n";
    } else if (*list_cmd) {
      std::vector<std::string> names;
      if (fs::is_directory(FICNAV_SCENARIO_DIR))
        for (const auto& e : fs::directory_iterator(FICNAV_SCENARIO_DIR))
          if (e.path().extension() == ".scn") names.push_back(e.path().stem().string());
      std::sort(names.begin(), names.end());
      for (const auto& n : names) std::cout << n << "\n";
    }
  } catch (const SimulationHalt& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what();
    if (std::string_view(e.what()).empty() || std::string_view(e.what()).back() != '\n') std::cerr << "\n";
    return 1;
  }
  return 0;
}
