#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrmp/planners.hpp"
#include "mrmp/scenario.hpp"
#include "mrmp/tensor.hpp"

namespace mrmp {

// One CSV row: a history sample of one (scenario, planner, seed) run.
// normalized_cost divides by the sum of single-robot optimal roadmap costs
// (each robot planned alone), a relaxation lower bound on any composite cost.
struct BenchRecord {
  std::string scenario;
  std::string planner;
  uint64_t seed = 0;
  int robot_count = 0;
  int n = 0;
  long iteration = 0;
  double elapsed_ms = 0.0;
  double best_cost = kInf;
  bool success = false;
  double normalized_cost = kInf;
};

// Per-robot roadmaps for one scenario seed: robot i uses the derived stream
// mix_seed(seed, i), or the pinned roadmap files when the scenario names them.
std::vector<Roadmap> build_scenario_roadmaps(const Scenario& s, uint64_t seed);
TensorRoadmap scenario_tensor(const Scenario& s, uint64_t seed);

// Runs one planner config (planner seed already set) against a prebuilt
// tensor roadmap, dispatching on the planner mode.
PlanResult run_planner(const TensorRoadmap& t, const Scenario& s, const PlannerConfig& cfg);

// Every (seed, planner config) pair: roadmaps are rebuilt per seed and shared
// across the seed's planners; each run's history becomes one record per
// sample. Failures become success=false rows; the batch never aborts.
std::vector<BenchRecord> run_benchmark(const Scenario& s);

// Header + records sorted by (scenario, planner, seed, iteration); infinite
// costs render as empty cells; the file appears only on success.
void emit_csv(std::vector<BenchRecord> records, const std::string& path);
std::string csv_string(std::vector<BenchRecord> records);

struct VerifyBudget {
  long iterations = 0;
  int runs = 0;
  int attained = 0;
  double fraction = 0.0;
};

struct VerifyReport {
  double explicit_cost = kInf;  // explicit tensor-graph Dijkstra
  double astar_cost = kInf;
  std::vector<VerifyBudget> budgets;  // one per drrt_star config, ascending budget
  double threshold = 0.95;
  bool astar_matches = false;   // |explicit - astar| <= 1e-9 (or both infinite)
  bool fractions_pass = false;  // top-budget fraction >= threshold and >= the others
  bool pass = false;
};

// Explicit-graph verification: roadmaps from the scenario's first seed, exact
// A* cross-check, then the scenario's drrt_star configs as attainment budgets
// over all scenario seeds. Throws std::length_error when the composite vertex
// count exceeds max_vertices.
VerifyReport verify_small_instance(const Scenario& s, uint64_t max_vertices);

// Full command-line surface (subcommands build, plan, bench, verify). The
// vector form takes arguments without the program name.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace mrmp
