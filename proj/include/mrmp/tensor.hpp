#pragma once

#include <cstdint>
#include <vector>

#include "mrmp/geometry.hpp"
#include "mrmp/roadmap.hpp"

namespace mrmp {

// One node of the implicit tensor-product roadmap: a per-robot vertex id tuple.
struct CompositeVertex {
  std::vector<int> ids;

  bool operator==(const CompositeVertex& o) const = default;
};

// An R-tuple of robot positions (a point of the composite configuration space).
struct CompositeConfig {
  std::vector<Point2> points;

  bool operator==(const CompositeConfig& o) const = default;
};

enum class CostMetric { kSum, kMax };

// The implicit product of per-robot roadmaps, plus the goal-distance tables
// that realize the search heuristic. Immutable after make_tensor_roadmap.
struct TensorRoadmap {
  Workspace workspace;
  std::vector<DiskRobot> robots;
  std::vector<Roadmap> roadmaps;
  std::vector<GoalDistanceTable> goal_tables;

  int robot_count() const { return static_cast<int>(roadmaps.size()); }
  CompositeVertex start_vertex() const { return {std::vector<int>(roadmaps.size(), 0)}; }
  CompositeVertex goal_vertex() const { return {std::vector<int>(roadmaps.size(), 1)}; }
  CompositeConfig config_of(const CompositeVertex& v) const;

  bool roadmap_edge(int robot, int a, int b) const {
    return adj_matrix_[robot][static_cast<size_t>(a) * roadmaps[robot].vertices.size() + b] != 0;
  }

  // Mixed-radix vertex codes (robot 0 is the most significant digit). Valid
  // only when the vertex-count product fits in 64 bits; see codes_fit().
  bool codes_fit() const { return codes_fit_; }
  uint64_t vertex_count_product() const { return product_; }  // saturated at UINT64_MAX
  uint64_t encode(const CompositeVertex& v) const;
  CompositeVertex decode(uint64_t code) const;

  // Internal derived state, filled by make_tensor_roadmap.
  std::vector<std::vector<uint8_t>> adj_matrix_;
  std::vector<uint64_t> strides_;
  uint64_t product_ = 0;
  bool codes_fit_ = false;
};

// Validates shape (R >= 2, roadmap terminals match robot start/goal), builds
// goal tables, adjacency matrices and vertex codes.
TensorRoadmap make_tensor_roadmap(Workspace workspace, std::vector<DiskRobot> robots,
                                  std::vector<Roadmap> roadmaps);

// True iff a != b and per robot the components are equal or a roadmap edge.
bool structurally_adjacent(const TensorRoadmap& t, const CompositeVertex& a,
                           const CompositeVertex& b);

// Per-robot move options of v (stay + each neighbor): the implicit adjacency
// count is the product of option counts minus the all-stay tuple.
uint64_t adjacency_count(const TensorRoadmap& t, const CompositeVertex& v);  // saturated

// Enumerates every structurally adjacent tuple in a fixed deterministic order
// (odometer over per-robot options, stay first, neighbors ascending, last
// robot fastest) without materializing the list.
template <typename F>
void for_each_adjacent(const TensorRoadmap& t, const CompositeVertex& v, F&& f) {
  const int r = t.robot_count();
  std::vector<const std::vector<Edge>*> adj(r);
  std::vector<int> option(r, 0);  // 0 = stay, k > 0 = adj[k - 1]
  for (int i = 0; i < r; ++i) adj[i] = &t.roadmaps[i].edges[v.ids[i]];
  CompositeVertex out = v;
  while (true) {
    // Advance the odometer (last robot fastest); the initial all-stay state
    // is v itself and is skipped by advancing before emitting.
    int i = r - 1;
    for (; i >= 0; --i) {
      if (option[i] < static_cast<int>(adj[i]->size())) {
        ++option[i];
        out.ids[i] = (*adj[i])[option[i] - 1].to;
        break;
      }
      option[i] = 0;
      out.ids[i] = v.ids[i];
    }
    if (i < 0) return;  // wrapped: enumeration complete
    f(out);
  }
}

// Materialized for_each_adjacent (excludes v itself); structural only, no
// collision filtering.
std::vector<CompositeVertex> composite_adjacent(const TensorRoadmap& t,
                                                const CompositeVertex& v);

// Per robot independently: the neighbor minimizing the angle at v_near between
// the ray towards the target and the ray towards the neighbor. Robots with an
// empty neighborhood or a degenerate ray stay put; ties break to the lowest
// vertex id.
CompositeVertex oracle_direction(const TensorRoadmap& t, const CompositeVertex& v_near,
                                 const CompositeConfig& q_target);

// Synchronous linear interpolation of all robots over t in [0, 1], sampled so
// the largest per-robot displacement advances at most `step` per sample
// (endpoints included): every sample must be obstacle-free and pairwise
// disk-collision-free.
bool composite_motion_free(const Workspace& w, const std::vector<DiskRobot>& robots,
                           const CompositeConfig& a, const CompositeConfig& b, double step);
bool composite_edge_free(const TensorRoadmap& t, const CompositeVertex& a,
                         const CompositeVertex& b, double step);

double composite_cost(const CompositeConfig& a, const CompositeConfig& b,
                      CostMetric metric = CostMetric::kSum);
double composite_cost(const TensorRoadmap& t, const CompositeVertex& a,
                      const CompositeVertex& b, CostMetric metric = CostMetric::kSum);

// Materialized tensor roadmap for small-instance verification: all composite
// vertices in code order, with every structurally adjacent, collision-free
// edge weighted by the sum metric.
struct ExplicitTensorGraph {
  std::vector<CompositeVertex> vertices;  // vertices[code] == decode(code)
  std::vector<std::vector<Edge>> adj;
};

// Throws std::length_error (reporting the computed product) when the composite
// vertex count exceeds max_vertices.
ExplicitTensorGraph explicit_tensor_graph(const TensorRoadmap& t, uint64_t max_vertices,
                                          double step = kDefaultCollisionStep);

}  // namespace mrmp
