#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrmp/geometry.hpp"
#include "mrmp/shortest_path.hpp"

namespace mrmp {

// Rejection sampling hit its retry cap (degenerate free space).
struct SamplingCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Robot start or goal is not collision-free.
struct InfeasibleEndpoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-robot graph of free configurations. Vertex 0 is the robot's start,
// vertex 1 its goal. Adjacency lists are kept in ascending neighbor order.
struct Roadmap {
  std::vector<Point2> vertices;
  std::vector<std::vector<Edge>> edges;
  double radius_used = 0.0;
  int robot_index = 0;
  int n = 0;
  double eta = 0.0;
  uint64_t seed = 0;

  bool operator==(const Roadmap& o) const = default;
};

// Shortest roadmap-path length from each vertex to the goal vertex (index 1).
struct GoalDistanceTable {
  std::vector<double> dist;
};

// Closed form (1+eta) * 2 * (1/d)^(1/d) * (log n / n)^(1/d), natural log on
// the unit d-cube. Throws std::invalid_argument for n < 2, d < 2 or eta < 0.
double connection_radius(int n, int d, double eta);

// PRM* over the robot's free space: vertex 0 = start, vertex 1 = goal, n - 2
// uniform rejection samples; every vertex pair within the unit-cube connection
// radius scaled by the longest workspace side is connected when the straight
// segment is free. Deterministic per seed. Throws InfeasibleEndpoint when the
// start or goal is in collision and SamplingCapExceeded after 1000 * n draws.
Roadmap build_prm_star(const Workspace& w, const DiskRobot& robot, int n, double eta,
                       uint64_t seed, double collision_step = kDefaultCollisionStep,
                       int robot_index = 0);

// 3x3 lattice spanning the start-goal bounding box (start and goal must be
// diagonal corners); the 7 interior/non-terminal nodes get a uniform jitter in
// [-jitter, jitter]^2, and lattice 4-neighbors are connected when free.
Roadmap build_grid_roadmap(const Workspace& w, const DiskRobot& robot, double jitter,
                           uint64_t seed, double collision_step = kDefaultCollisionStep,
                           int robot_index = 0);

GoalDistanceTable goal_distance_table(const Roadmap& g);

// Adjacency list of v, ascending by neighbor id. Throws std::out_of_range.
const std::vector<Edge>& roadmap_neighbors(const Roadmap& g, int v);

// Plain-text serialization; exact round trip (shortest decimal doubles).
void save_roadmap(const Roadmap& g, std::ostream& out);
Roadmap load_roadmap(std::istream& in);
void save_roadmap_file(const Roadmap& g, const std::string& path);
Roadmap load_roadmap_file(const std::string& path);

}  // namespace mrmp
