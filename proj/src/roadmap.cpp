#include "mrmp/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "mrmp/number_io.hpp"
#include "mrmp/rng.hpp"

namespace mrmp {

namespace {

// Fills adjacency lists from undirected pairs; sorting keeps them ascending.
void fill_edges(Roadmap& g, std::vector<std::tuple<int, int, double>>& pairs) {
  std::sort(pairs.begin(), pairs.end());
  g.edges.assign(g.vertices.size(), {});
  for (const auto& [u, v, len] : pairs) {
    g.edges[u].push_back({v, len});
    g.edges[v].push_back({u, len});
  }
  for (auto& adj : g.edges) {
    std::sort(adj.begin(), adj.end(),
              [](const Edge& a, const Edge& b) { return a.to < b.to; });
  }
}

void connect_within_radius(Roadmap& g, const Workspace& w, double radius,
                           double robot_radius, double step) {
  const double r2 = radius * radius;
  std::vector<std::tuple<int, int, double>> pairs;
  const int n = static_cast<int>(g.vertices.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (g.vertices[i] - g.vertices[j]).squaredNorm();
      if (d2 > r2) continue;
      if (!segment_free(g.vertices[i], g.vertices[j], robot_radius, w, step)) continue;
      pairs.emplace_back(i, j, std::sqrt(d2));
    }
  }
  fill_edges(g, pairs);
}

void check_endpoints(const Workspace& w, const DiskRobot& robot) {
  if (!(robot.radius > 0.0)) throw std::invalid_argument("robot radius must be positive");
  if (!point_free(robot.start, robot.radius, w)) {
    throw InfeasibleEndpoint("robot start is not collision-free");
  }
  if (!point_free(robot.goal, robot.radius, w)) {
    throw InfeasibleEndpoint("robot goal is not collision-free");
  }
}

}  // namespace

double connection_radius(int n, int d, double eta) {
  if (n < 2) throw std::invalid_argument("connection_radius: n must be at least 2");
  if (d < 2) throw std::invalid_argument("connection_radius: d must be at least 2");
  if (eta < 0.0) throw std::invalid_argument("connection_radius: eta must be nonnegative");
  const double inv_d = 1.0 / d;
  return (1.0 + eta) * 2.0 * std::pow(inv_d, inv_d) *
         std::pow(std::log(static_cast<double>(n)) / n, inv_d);
}

Roadmap build_prm_star(const Workspace& w, const DiskRobot& robot, int n, double eta,
                       uint64_t seed, double collision_step, int robot_index) {
  w.validate();
  if (n < 2) throw std::invalid_argument("build_prm_star: n must be at least 2");
  check_endpoints(w, robot);

  Roadmap g;
  g.robot_index = robot_index;
  g.n = n;
  g.eta = eta;
  g.seed = seed;
  // The closed-form radius lives on the unit square; transfer it to this
  // workspace by its longest side.
  g.radius_used = connection_radius(n, 2, eta) * w.bounds.sizes().maxCoeff();

  g.vertices.reserve(n);
  g.vertices.push_back(robot.start);
  g.vertices.push_back(robot.goal);

  Rng rng(seed);
  const Point2 lo = w.bounds.min();
  const Point2 hi = w.bounds.max();
  const long cap = 1000L * n;
  long attempts = 0;
  while (static_cast<int>(g.vertices.size()) < n) {
    if (++attempts > cap) {
      throw SamplingCapExceeded("build_prm_star: rejection sampling exceeded " +
                                std::to_string(cap) + " draws");
    }
    Point2 q(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
    if (point_free(q, robot.radius, w)) g.vertices.push_back(q);
  }

  connect_within_radius(g, w, g.radius_used, robot.radius, collision_step);
  return g;
}

Roadmap build_grid_roadmap(const Workspace& w, const DiskRobot& robot, double jitter,
                           uint64_t seed, double collision_step, int robot_index) {
  w.validate();
  if (jitter < 0.0) throw std::invalid_argument("build_grid_roadmap: jitter must be >= 0");
  check_endpoints(w, robot);
  const double x0 = std::min(robot.start.x(), robot.goal.x());
  const double x1 = std::max(robot.start.x(), robot.goal.x());
  const double y0 = std::min(robot.start.y(), robot.goal.y());
  const double y1 = std::max(robot.start.y(), robot.goal.y());
  if (!(x1 > x0) || !(y1 > y0)) {
    throw std::invalid_argument(
        "build_grid_roadmap: start and goal must span a nondegenerate rectangle");
  }

  const double xs[3] = {x0, 0.5 * (x0 + x1), x1};
  const double ys[3] = {y0, 0.5 * (y0 + y1), y1};

  Roadmap g;
  g.robot_index = robot_index;
  g.n = 9;
  g.eta = 0.0;
  g.seed = seed;
  g.vertices.assign(9, Point2::Zero());
  g.vertices[0] = robot.start;
  g.vertices[1] = robot.goal;

  Rng rng(seed);
  int cell_to_vertex[3][3];
  int next_id = 2;
  for (int iy = 0; iy < 3; ++iy) {
    for (int ix = 0; ix < 3; ++ix) {
      const Point2 base(xs[ix], ys[iy]);
      if (base == robot.start) {
        cell_to_vertex[iy][ix] = 0;
        continue;
      }
      if (base == robot.goal) {
        cell_to_vertex[iy][ix] = 1;
        continue;
      }
      Point2 p = base;
      for (int attempt = 0; attempt < 100; ++attempt) {
        Point2 candidate = base + Point2(rng.uniform(-jitter, jitter),
                                         rng.uniform(-jitter, jitter));
        if (point_free(candidate, robot.radius, w)) {
          p = candidate;
          break;
        }
      }
      if (!point_free(p, robot.radius, w)) {
        throw SamplingCapExceeded("build_grid_roadmap: lattice node " +
                                  std::to_string(next_id) + " has no free placement");
      }
      cell_to_vertex[iy][ix] = next_id;
      g.vertices[next_id] = p;
      ++next_id;
    }
  }

  std::vector<std::tuple<int, int, double>> pairs;
  auto try_edge = [&](int a, int b) {
    const Point2& pa = g.vertices[a];
    const Point2& pb = g.vertices[b];
    if (!segment_free(pa, pb, robot.radius, w, collision_step)) return;
    pairs.emplace_back(std::min(a, b), std::max(a, b), (pa - pb).norm());
  };
  for (int iy = 0; iy < 3; ++iy) {
    for (int ix = 0; ix < 3; ++ix) {
      if (ix + 1 < 3) try_edge(cell_to_vertex[iy][ix], cell_to_vertex[iy][ix + 1]);
      if (iy + 1 < 3) try_edge(cell_to_vertex[iy][ix], cell_to_vertex[iy + 1][ix]);
    }
  }
  fill_edges(g, pairs);
  for (const auto& [u, v, len] : pairs) g.radius_used = std::max(g.radius_used, len);
  return g;
}

GoalDistanceTable goal_distance_table(const Roadmap& g) {
  return {shortest_path_distances(g.edges, 1)};
}

const std::vector<Edge>& roadmap_neighbors(const Roadmap& g, int v) {
  if (v < 0 || v >= static_cast<int>(g.edges.size())) {
    throw std::out_of_range("roadmap_neighbors: vertex id " + std::to_string(v) +
                            " out of range");
  }
  return g.edges[v];
}

void save_roadmap(const Roadmap& g, std::ostream& out) {
  out << "mrmp-roadmap 1\n";
  out << "robot_index " << g.robot_index << "\n";
  out << "n " << g.n << "\n";
  out << "eta " << format_double(g.eta) << "\n";
  out << "seed " << g.seed << "\n";
  out << "radius_used " << format_double(g.radius_used) << "\n";
  out << "vertices " << g.vertices.size() << "\n";
  for (const Point2& p : g.vertices) {
    out << format_double(p.x()) << " " << format_double(p.y()) << "\n";
  }
  size_t edge_count = 0;
  for (size_t u = 0; u < g.edges.size(); ++u) {
    for (const Edge& e : g.edges[u]) {
      if (e.to > static_cast<int>(u)) ++edge_count;
    }
  }
  out << "edges " << edge_count << "\n";
  for (size_t u = 0; u < g.edges.size(); ++u) {
    for (const Edge& e : g.edges[u]) {
      if (e.to > static_cast<int>(u)) {
        out << u << " " << e.to << " " << format_double(e.length) << "\n";
      }
    }
  }
}

namespace {

void expect_key(std::istream& in, const std::string& key, std::string& value) {
  std::string k;
  if (!(in >> k >> value) || k != key) {
    throw std::runtime_error("roadmap file: expected key '" + key + "'");
  }
}

}  // namespace

Roadmap load_roadmap(std::istream& in) {
  std::string token;
  expect_key(in, "mrmp-roadmap", token);
  if (token != "1") throw std::runtime_error("roadmap file: unsupported version " + token);
  Roadmap g;
  expect_key(in, "robot_index", token);
  g.robot_index = std::stoi(token);
  expect_key(in, "n", token);
  g.n = std::stoi(token);
  expect_key(in, "eta", token);
  g.eta = parse_double(token);
  expect_key(in, "seed", token);
  g.seed = std::stoull(token);
  expect_key(in, "radius_used", token);
  g.radius_used = parse_double(token);
  expect_key(in, "vertices", token);
  const long vcount = std::stol(token);
  if (vcount < 0 || vcount != g.n) {
    throw std::runtime_error("roadmap file: vertex count does not match n");
  }
  g.vertices.resize(vcount);
  for (long i = 0; i < vcount; ++i) {
    std::string sx, sy;
    if (!(in >> sx >> sy)) throw std::runtime_error("roadmap file: truncated vertex list");
    g.vertices[i] = Point2(parse_double(sx), parse_double(sy));
  }
  expect_key(in, "edges", token);
  const long ecount = std::stol(token);
  std::vector<std::tuple<int, int, double>> pairs;
  pairs.reserve(ecount);
  for (long i = 0; i < ecount; ++i) {
    long u, v;
    std::string len;
    if (!(in >> u >> v >> len)) throw std::runtime_error("roadmap file: truncated edge list");
    if (u < 0 || v < 0 || u >= vcount || v >= vcount || u == v) {
      throw std::runtime_error("roadmap file: edge endpoint out of range");
    }
    pairs.emplace_back(static_cast<int>(u), static_cast<int>(v), parse_double(len));
  }
  fill_edges(g, pairs);
  return g;
}

void save_roadmap_file(const Roadmap& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_roadmap(g, out);
  if (!out.good()) throw std::runtime_error("write to '" + path + "' failed");
}

Roadmap load_roadmap_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load_roadmap(in);
}

}  // namespace mrmp
