#include "mrmp/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mrmp {

CompositeConfig TensorRoadmap::config_of(const CompositeVertex& v) const {
  CompositeConfig q;
  q.points.reserve(v.ids.size());
  for (size_t i = 0; i < v.ids.size(); ++i) {
    q.points.push_back(roadmaps[i].vertices[v.ids[i]]);
  }
  return q;
}

uint64_t TensorRoadmap::encode(const CompositeVertex& v) const {
  if (!codes_fit_) throw std::overflow_error("composite vertex codes exceed 64 bits");
  uint64_t code = 0;
  for (size_t i = 0; i < strides_.size(); ++i) {
    code += strides_[i] * static_cast<uint64_t>(v.ids[i]);
  }
  return code;
}

CompositeVertex TensorRoadmap::decode(uint64_t code) const {
  if (!codes_fit_) throw std::overflow_error("composite vertex codes exceed 64 bits");
  CompositeVertex v;
  v.ids.resize(strides_.size());
  for (size_t i = 0; i < strides_.size(); ++i) {
    v.ids[i] = static_cast<int>(code / strides_[i]);
    code %= strides_[i];
  }
  return v;
}

TensorRoadmap make_tensor_roadmap(Workspace workspace, std::vector<DiskRobot> robots,
                                  std::vector<Roadmap> roadmaps) {
  if (robots.size() < 2) throw std::invalid_argument("tensor roadmap needs at least 2 robots");
  if (robots.size() != roadmaps.size()) {
    throw std::invalid_argument("tensor roadmap: one roadmap per robot required");
  }
  TensorRoadmap t;
  t.workspace = std::move(workspace);
  t.robots = std::move(robots);
  t.roadmaps = std::move(roadmaps);
  const int r = t.robot_count();
  for (int i = 0; i < r; ++i) {
    const Roadmap& g = t.roadmaps[i];
    if (g.vertices.size() < 2) {
      throw std::invalid_argument("roadmap " + std::to_string(i) + " has fewer than 2 vertices");
    }
    if (g.vertices[0] != t.robots[i].start || g.vertices[1] != t.robots[i].goal) {
      throw std::invalid_argument("roadmap " + std::to_string(i) +
                                  ": vertices 0/1 must be the robot start/goal");
    }
  }

  t.goal_tables.reserve(r);
  t.adj_matrix_.reserve(r);
  for (int i = 0; i < r; ++i) {
    const Roadmap& g = t.roadmaps[i];
    t.goal_tables.push_back(goal_distance_table(g));
    const size_t n = g.vertices.size();
    std::vector<uint8_t> mask(n * n, 0);
    for (size_t u = 0; u < n; ++u) {
      for (const Edge& e : g.edges[u]) mask[u * n + e.to] = 1;
    }
    t.adj_matrix_.push_back(std::move(mask));
  }

  t.strides_.assign(r, 1);
  unsigned __int128 product = 1;
  for (int i = r - 1; i >= 0; --i) {
    if (i + 1 < r) {
      t.strides_[i] = t.strides_[i + 1] * t.roadmaps[i + 1].vertices.size();
    }
    product *= t.roadmaps[i].vertices.size();
  }
  t.codes_fit_ = product <= UINT64_MAX;
  t.product_ = t.codes_fit_ ? static_cast<uint64_t>(product) : UINT64_MAX;
  return t;
}

bool structurally_adjacent(const TensorRoadmap& t, const CompositeVertex& a,
                           const CompositeVertex& b) {
  if (a == b) return false;
  for (int i = 0; i < t.robot_count(); ++i) {
    if (a.ids[i] == b.ids[i]) continue;
    if (!t.roadmap_edge(i, a.ids[i], b.ids[i])) return false;
  }
  return true;
}

uint64_t adjacency_count(const TensorRoadmap& t, const CompositeVertex& v) {
  unsigned __int128 count = 1;
  for (int i = 0; i < t.robot_count(); ++i) {
    count *= 1 + t.roadmaps[i].edges[v.ids[i]].size();
    if (count > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<uint64_t>(count) - 1;
}

std::vector<CompositeVertex> composite_adjacent(const TensorRoadmap& t,
                                                const CompositeVertex& v) {
  if (v.ids.size() != static_cast<size_t>(t.robot_count())) {
    throw std::invalid_argument("composite vertex has wrong robot count");
  }
  for (int i = 0; i < t.robot_count(); ++i) {
    if (v.ids[i] < 0 || v.ids[i] >= static_cast<int>(t.roadmaps[i].vertices.size())) {
      throw std::out_of_range("composite vertex id out of range for robot " +
                              std::to_string(i));
    }
  }
  std::vector<CompositeVertex> out;
  const uint64_t count = adjacency_count(t, v);
  if (count != UINT64_MAX) out.reserve(count);
  for_each_adjacent(t, v, [&](const CompositeVertex& nb) { out.push_back(nb); });
  return out;
}

CompositeVertex oracle_direction(const TensorRoadmap& t, const CompositeVertex& v_near,
                                 const CompositeConfig& q_target) {
  CompositeVertex out = v_near;
  for (int i = 0; i < t.robot_count(); ++i) {
    const Roadmap& g = t.roadmaps[i];
    const std::vector<Edge>& nbrs = g.edges[v_near.ids[i]];
    if (nbrs.empty()) continue;
    const Point2& at = g.vertices[v_near.ids[i]];
    const Point2 ray = q_target.points[i] - at;
    if (ray.squaredNorm() == 0.0) continue;
    double best_angle = 0.0;
    int best_id = -1;
    for (const Edge& e : nbrs) {
      const Point2 dir = g.vertices[e.to] - at;
      const double angle =
          std::atan2(std::abs(ray.x() * dir.y() - ray.y() * dir.x()), ray.dot(dir));
      if (best_id < 0 || angle < best_angle) {
        best_angle = angle;
        best_id = e.to;
      }
    }
    out.ids[i] = best_id;
  }
  return out;
}

bool composite_motion_free(const Workspace& w, const std::vector<DiskRobot>& robots,
                           const CompositeConfig& a, const CompositeConfig& b, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("composite motion: step must be positive");
  const int r = static_cast<int>(robots.size());
  double max_disp = 0.0;
  for (int i = 0; i < r; ++i) {
    max_disp = std::max(max_disp, (b.points[i] - a.points[i]).norm());
  }
  const long m = max_disp == 0.0 ? 0 : static_cast<long>(std::ceil(max_disp / step));
  std::vector<Point2> at(r);
  for (long k = 0; k <= m; ++k) {
    const double tt = m == 0 ? 0.0 : static_cast<double>(k) / m;
    for (int i = 0; i < r; ++i) {
      at[i] = a.points[i] + tt * (b.points[i] - a.points[i]);
      if (!point_free(at[i], robots[i].radius, w)) return false;
    }
    for (int i = 0; i < r; ++i) {
      for (int j = i + 1; j < r; ++j) {
        if (disks_collide(at[i], robots[i].radius, at[j], robots[j].radius)) return false;
      }
    }
  }
  return true;
}

bool composite_edge_free(const TensorRoadmap& t, const CompositeVertex& a,
                         const CompositeVertex& b, double step) {
  return composite_motion_free(t.workspace, t.robots, t.config_of(a), t.config_of(b), step);
}

double composite_cost(const CompositeConfig& a, const CompositeConfig& b, CostMetric metric) {
  if (a.points.size() != b.points.size()) {
    throw std::invalid_argument("composite cost: mismatched robot counts");
  }
  double acc = 0.0;
  for (size_t i = 0; i < a.points.size(); ++i) {
    const double len = (a.points[i] - b.points[i]).norm();
    acc = metric == CostMetric::kSum ? acc + len : std::max(acc, len);
  }
  return acc;
}

double composite_cost(const TensorRoadmap& t, const CompositeVertex& a,
                      const CompositeVertex& b, CostMetric metric) {
  if (a.ids.size() != b.ids.size()) {
    throw std::invalid_argument("composite cost: mismatched robot counts");
  }
  double acc = 0.0;
  for (size_t i = 0; i < a.ids.size(); ++i) {
    const double len =
        (t.roadmaps[i].vertices[a.ids[i]] - t.roadmaps[i].vertices[b.ids[i]]).norm();
    acc = metric == CostMetric::kSum ? acc + len : std::max(acc, len);
  }
  return acc;
}

ExplicitTensorGraph explicit_tensor_graph(const TensorRoadmap& t, uint64_t max_vertices,
                                          double step) {
  if (!t.codes_fit() || t.vertex_count_product() > max_vertices) {
    throw std::length_error(
        "explicit tensor graph would have " +
        (t.codes_fit() ? std::to_string(t.vertex_count_product()) : std::string("over 2^64")) +
        " vertices (guard: " + std::to_string(max_vertices) + ")");
  }
  const uint64_t total = t.vertex_count_product();
  ExplicitTensorGraph g;
  g.vertices.reserve(total);
  g.adj.resize(total);
  for (uint64_t code = 0; code < total; ++code) g.vertices.push_back(t.decode(code));
  for (uint64_t code = 0; code < total; ++code) {
    const CompositeVertex& v = g.vertices[code];
    for_each_adjacent(t, v, [&](const CompositeVertex& nb) {
      const uint64_t nb_code = t.encode(nb);
      if (nb_code <= code) return;  // undirected: handle each pair once
      if (!composite_edge_free(t, v, nb, step)) return;
      const double len = composite_cost(t, v, nb);
      g.adj[code].push_back({static_cast<int>(nb_code), len});
      g.adj[nb_code].push_back({static_cast<int>(code), len});
    });
  }
  return g;
}

}  // namespace mrmp
