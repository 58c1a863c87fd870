#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrmp/geometry.hpp"
#include "mrmp/planners.hpp"

namespace mrmp {

struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ScenarioInvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A benchmark unit: workspace, robots, roadmap parameters, the seeds that
// drive roadmap construction and planner randomness, and the planner configs
// to run. roadmap_kind selects PRM* construction ("prm_star") or the jittered
// 3x3 lattice ("grid9"); roadmap_files, when set (one path per robot, resolved
// against the scenario file's directory), pins prebuilt roadmaps shared by
// every seed.
struct Scenario {
  std::string name;
  Workspace workspace;
  std::vector<DiskRobot> robots;
  int n = 0;
  double eta = 0.0;
  std::vector<uint64_t> seeds;
  std::vector<PlannerConfig> planners;
  std::string roadmap_kind = "prm_star";
  double grid_jitter = 0.0;
  std::vector<std::string> roadmap_files;

  // Throws ScenarioInvariantError with a field path on the first violation:
  // invalid workspace, R < 2, endpoint in collision, pairwise colliding
  // starts or goals, bad roadmap parameters, invalid planner config.
  void validate() const;
};

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

}  // namespace mrmp
