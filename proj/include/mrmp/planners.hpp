#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mrmp/rng.hpp"
#include "mrmp/tensor.hpp"

namespace mrmp {

enum class PlannerMode { kDrrtStar, kDrrt, kImplicitAstar, kCompositeRrtStar };

const char* planner_name(PlannerMode mode);
PlannerMode planner_mode_from_name(const std::string& name);  // throws on unknown

struct PlannerConfig {
  PlannerMode mode = PlannerMode::kDrrtStar;
  long iteration_limit = 0;     // 0 = unlimited
  double time_limit_ms = 0.0;   // 0 = unlimited
  uint64_t seed = 0;
  bool branch_and_bound = true;
  double collision_step = kDefaultCollisionStep;
  double rrt_star_steer = 1.0;      // composite RRT* only
  double goal_bias = 0.1;           // dRRT exploration bias / RRT* goal bias
  uint64_t astar_max_states = 2000000;  // implicit A* memory guard

  // Throws std::invalid_argument unless at least one limit is set and the
  // numeric fields are in range.
  void validate() const;
};

struct HistoryPoint {
  long iteration = 0;
  double elapsed_ms = 0.0;
  double best_cost = kInf;
};

struct PlanResult {
  std::vector<CompositeVertex> path;         // tensor-roadmap planners
  std::vector<CompositeConfig> config_path;  // filled by every planner
  double cost = kInf;
  long iterations_used = 0;
  double time_used_ms = 0.0;
  std::optional<long> first_solution_iteration;
  std::vector<HistoryPoint> history;  // 1-2-5 iteration grid + first solution + final
  long states_explored = 0;           // implicit A* expansions
  bool timed_out = false;             // budget/memory guard exhausted (implicit A*)
  double tree_audit_error = 0.0;      // max |stored cost - parent-chain sum| at return

  bool solved() const { return cost < kInf; }
};

struct CompositeVertexHash {
  size_t operator()(const CompositeVertex& v) const {
    uint64_t h = 0x9E3779B97F4A7C15ull;
    for (int id : v.ids) h = mix_seed(h, static_cast<uint64_t>(id) + 1);
    return static_cast<size_t>(h);
  }
};

// Tree over composite vertices with parent links, cost-to-come and children
// sets. Node indexes are stable; index 0 is the root.
class SearchTree {
 public:
  explicit SearchTree(int robot_count);

  int size() const { return static_cast<int>(verts_.size()); }
  int robot_count() const { return robot_count_; }

  int add_root(const CompositeVertex& v, const CompositeConfig& q);
  int add_child(int parent, const CompositeVertex& v, const CompositeConfig& q,
                double edge_cost);

  // Moves node under new_parent at the given total cost, shifting every
  // descendant by the same delta.
  void reparent(int node, int new_parent, double new_cost);

  int find(const CompositeVertex& v) const;  // -1 when absent

  const CompositeVertex& vertex(int node) const { return verts_[node]; }
  int parent(int node) const { return parent_[node]; }
  double cost(int node) const { return cost_[node]; }
  const std::vector<int>& children(int node) const { return children_[node]; }
  int component(int node, int robot) const {
    return comp_[static_cast<size_t>(node) * robot_count_ + robot];
  }

  // Node with minimum composite Euclidean distance to q (ties: lowest index).
  int nearest(const CompositeConfig& q) const;

  // Max |stored cost - recomputed parent-chain sum| over all nodes.
  double audit_max_error(
      const std::function<double(const CompositeVertex&, const CompositeVertex&)>& edge_cost)
      const;

 private:
  int append(const CompositeVertex& v, const CompositeConfig& q, int parent, double cost);

  int robot_count_;
  int dims_;
  std::vector<CompositeVertex> verts_;
  std::vector<int> parent_;
  std::vector<double> cost_;
  std::vector<std::vector<int>> children_;
  std::vector<int> comp_;  // node-major flat component ids
  std::unordered_map<CompositeVertex, int, CompositeVertexHash> index_;
  Eigen::MatrixXd points_;  // dims_ x capacity, one column per node
};

// Memoizes composite_edge_free per unordered vertex-code pair. Freezes (stops
// inserting, keeps answering) once `capacity` entries are stored.
class EdgeCache {
 public:
  explicit EdgeCache(size_t capacity = size_t{1} << 21) : capacity_(capacity) {}

  bool edge_free(const TensorRoadmap& t, const CompositeVertex& a, const CompositeVertex& b,
                 double step);

 private:
  struct Key {
    uint64_t a = 0, b = 0;
    bool operator==(const Key& o) const { return a == o.a && b == o.b; }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return static_cast<size_t>(mix_seed(k.a, k.b));
    }
  };

  size_t capacity_;
  bool usable_checked_ = false;
  bool usable_ = false;
  std::unordered_map<Key, bool, KeyHash> map_;
};

struct ExpandOptions {
  double collision_step = kDefaultCollisionStep;
  bool rewire = true;               // disabled reduces to first-parent behavior
  EdgeCache* edge_cache = nullptr;  // optional; nullptr checks edges directly
  EdgeCache* fine_cache = nullptr;  // commit-time checks at collision_step / 10
};

// Sum of per-robot goal-table distances; admissible for the sum metric.
double heuristic(const TensorRoadmap& t, const CompositeVertex& v);

// One expansion iteration: exploration (sample, nearest, oracle) when v_last
// is empty, greedy towards T otherwise; then best-parent selection over the
// tree-resident tensor neighbors, insertion or rewiring of V_new, neighbor
// rewiring with subtree cost propagation, and the heuristic progress gate.
std::optional<CompositeVertex> expand_drrt_star(const TensorRoadmap& t, SearchTree& tree,
                                                const std::optional<CompositeVertex>& v_last,
                                                const CompositeVertex& goal, Rng& rng,
                                                const ExpandOptions& opts = {});

// Parent chain from S to T, or empty when T is not in the tree.
std::vector<CompositeVertex> trace_path(const SearchTree& tree, const CompositeVertex& S,
                                        const CompositeVertex& T);

PlanResult drrt_star(const TensorRoadmap& t, const CompositeVertex& S,
                     const CompositeVertex& T, const PlannerConfig& cfg);
PlanResult drrt(const TensorRoadmap& t, const CompositeVertex& S, const CompositeVertex& T,
                const PlannerConfig& cfg);
PlanResult implicit_astar(const TensorRoadmap& t, const CompositeVertex& S,
                          const CompositeVertex& T, const PlannerConfig& cfg);
PlanResult composite_rrt_star(const Workspace& w, const std::vector<DiskRobot>& robots,
                              const CompositeConfig& S, const CompositeConfig& T,
                              const PlannerConfig& cfg);

}  // namespace mrmp
