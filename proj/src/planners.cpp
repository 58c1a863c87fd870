#include "mrmp/planners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "mrmp/shortest_path.hpp"

namespace mrmp {

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// Records best-cost samples on the 1-2-5 iteration grid plus explicit events
// (first solution, final), deduplicated by iteration.
class HistoryRecorder {
 public:
  void tick(long iteration, double elapsed_ms, double best) {
    if (iteration != next_grid_) return;
    push(iteration, elapsed_ms, best);
    next_grid_ = phase_ == 1 ? next_grid_ * 5 / 2 : next_grid_ * 2;
    phase_ = (phase_ + 1) % 3;
  }

  void event(long iteration, double elapsed_ms, double best) {
    push(iteration, elapsed_ms, best);
  }

  std::vector<HistoryPoint> take() { return std::move(points_); }

 private:
  void push(long iteration, double elapsed_ms, double best) {
    if (!points_.empty() && points_.back().iteration == iteration) {
      points_.back().elapsed_ms = elapsed_ms;
      points_.back().best_cost = best;
      return;
    }
    points_.push_back({iteration, elapsed_ms, best});
  }

  std::vector<HistoryPoint> points_;
  long next_grid_ = 1;  // 1, 2, 5, 10, 20, 50, ...
  int phase_ = 0;
};

void validate_vertex(const TensorRoadmap& t, const CompositeVertex& v, const char* what) {
  if (v.ids.size() != static_cast<size_t>(t.robot_count())) {
    throw std::invalid_argument(std::string(what) + ": wrong robot count");
  }
  for (int i = 0; i < t.robot_count(); ++i) {
    if (v.ids[i] < 0 || v.ids[i] >= static_cast<int>(t.roadmaps[i].vertices.size())) {
      throw std::invalid_argument(std::string(what) + ": vertex id out of range for robot " +
                                  std::to_string(i));
    }
  }
}

CompositeConfig sample_uniform_config(const Workspace& w, int robot_count, Rng& rng) {
  const Point2 lo = w.bounds.min();
  const Point2 hi = w.bounds.max();
  CompositeConfig q;
  q.points.reserve(robot_count);
  for (int i = 0; i < robot_count; ++i) {
    const double x = rng.uniform(lo.x(), hi.x());
    const double y = rng.uniform(lo.y(), hi.y());
    q.points.emplace_back(x, y);
  }
  return q;
}

bool config_free(const TensorRoadmap& t, const CompositeVertex& v, double step) {
  const CompositeConfig q = t.config_of(v);
  return composite_motion_free(t.workspace, t.robots, q, q, step);
}

struct Candidate {
  int node = -1;
  double edge = 0.0;
  double total = 0.0;  // cost-to-come through this parent
};

// N = Adjacent(V_new, implicit graph) ∩ tree. Two equivalent strategies: probe
// the tree for each enumerated neighbor when the branching factor is small, or
// scan the tree against per-robot allowed-id masks when it is not.
void collect_tree_neighbors(const TensorRoadmap& t, const SearchTree& tree,
                            const CompositeVertex& v_new, std::vector<Candidate>& out) {
  out.clear();
  const int r = t.robot_count();
  const uint64_t branching = adjacency_count(t, v_new);
  const uint64_t scan_work = static_cast<uint64_t>(tree.size()) * r;
  if (branching != UINT64_MAX && branching * 3 <= scan_work) {
    for_each_adjacent(t, v_new, [&](const CompositeVertex& nb) {
      const int idx = tree.find(nb);
      if (idx >= 0) out.push_back({idx, composite_cost(t, nb, v_new), 0.0});
    });
    return;
  }
  std::vector<std::vector<uint8_t>> allowed(r);
  for (int i = 0; i < r; ++i) {
    const Roadmap& g = t.roadmaps[i];
    allowed[i].assign(g.vertices.size(), 0);
    allowed[i][v_new.ids[i]] = 1;
    for (const Edge& e : g.edges[v_new.ids[i]]) allowed[i][e.to] = 1;
  }
  const int size = tree.size();
  for (int node = 0; node < size; ++node) {
    bool ok = true;
    bool all_equal = true;
    for (int i = 0; i < r; ++i) {
      const int c = tree.component(node, i);
      if (!allowed[i][c]) {
        ok = false;
        break;
      }
      all_equal = all_equal && c == v_new.ids[i];
    }
    if (!ok || all_equal) continue;
    out.push_back({node, composite_cost(t, tree.vertex(node), v_new), 0.0});
  }
}

bool edge_free_maybe_cached(EdgeCache* cache, const TensorRoadmap& t, const CompositeVertex& a,
                            const CompositeVertex& b, double step) {
  if (cache != nullptr) return cache->edge_free(t, a, b, step);
  return composite_edge_free(t, a, b, step);
}

// An edge may only be committed to the tree when it also holds at the audit
// resolution (step / 10): the coarse check stays the cheap rejection filter,
// and the one-time fine confirmation on surviving edges guarantees that every
// traced path passes the soundness audit by construction.
bool edge_committable(const ExpandOptions& opts, const TensorRoadmap& t, const CompositeVertex& a,
                      const CompositeVertex& b) {
  return edge_free_maybe_cached(opts.edge_cache, t, a, b, opts.collision_step) &&
         edge_free_maybe_cached(opts.fine_cache, t, a, b, opts.collision_step / 10.0);
}

}  // namespace

const char* planner_name(PlannerMode mode) {
  switch (mode) {
    case PlannerMode::kDrrtStar: return "drrt_star";
    case PlannerMode::kDrrt: return "drrt";
    case PlannerMode::kImplicitAstar: return "implicit_astar";
    case PlannerMode::kCompositeRrtStar: return "composite_rrt_star";
  }
  return "unknown";
}

PlannerMode planner_mode_from_name(const std::string& name) {
  if (name == "drrt_star") return PlannerMode::kDrrtStar;
  if (name == "drrt") return PlannerMode::kDrrt;
  if (name == "implicit_astar") return PlannerMode::kImplicitAstar;
  if (name == "composite_rrt_star") return PlannerMode::kCompositeRrtStar;
  throw std::invalid_argument("unknown planner '" + name + "'");
}

void PlannerConfig::validate() const {
  if (iteration_limit <= 0 && time_limit_ms <= 0.0) {
    throw std::invalid_argument("planner config: set an iteration or time limit");
  }
  if (iteration_limit < 0) throw std::invalid_argument("planner config: negative iterations");
  if (!(collision_step > 0.0)) {
    throw std::invalid_argument("planner config: collision_step must be positive");
  }
  if (!(rrt_star_steer > 0.0)) {
    throw std::invalid_argument("planner config: rrt_star_steer must be positive");
  }
  if (goal_bias < 0.0 || goal_bias > 1.0) {
    throw std::invalid_argument("planner config: goal_bias must be in [0, 1]");
  }
  if (astar_max_states == 0) {
    throw std::invalid_argument("planner config: astar_max_states must be positive");
  }
}

SearchTree::SearchTree(int robot_count)
    : robot_count_(robot_count), dims_(2 * robot_count), points_(dims_, 64) {}

int SearchTree::append(const CompositeVertex& v, const CompositeConfig& q, int parent,
                       double cost) {
  const int idx = size();
  if (idx >= points_.cols()) points_.conservativeResize(dims_, points_.cols() * 2);
  for (int i = 0; i < robot_count_; ++i) points_.col(idx).segment<2>(2 * i) = q.points[i];
  verts_.push_back(v);
  parent_.push_back(parent);
  cost_.push_back(cost);
  children_.emplace_back();
  for (int id : v.ids) comp_.push_back(id);
  index_.emplace(v, idx);
  if (parent >= 0) children_[parent].push_back(idx);
  return idx;
}

int SearchTree::add_root(const CompositeVertex& v, const CompositeConfig& q) {
  if (size() != 0) throw std::logic_error("search tree already has a root");
  return append(v, q, -1, 0.0);
}

int SearchTree::add_child(int parent, const CompositeVertex& v, const CompositeConfig& q,
                          double edge_cost) {
  if (parent < 0 || parent >= size()) throw std::out_of_range("add_child: bad parent");
  return append(v, q, parent, cost_[parent] + edge_cost);
}

void SearchTree::reparent(int node, int new_parent, double new_cost) {
  if (node <= 0 || node >= size()) throw std::out_of_range("reparent: bad node");
  if (new_parent < 0 || new_parent >= size()) throw std::out_of_range("reparent: bad parent");
  auto& sibs = children_[parent_[node]];
  sibs.erase(std::find(sibs.begin(), sibs.end(), node));
  parent_[node] = new_parent;
  children_[new_parent].push_back(node);
  const double delta = new_cost - cost_[node];
  std::vector<int> stack{node};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    cost_[u] += delta;
    stack.insert(stack.end(), children_[u].begin(), children_[u].end());
  }
}

int SearchTree::find(const CompositeVertex& v) const {
  auto it = index_.find(v);
  return it == index_.end() ? -1 : it->second;
}

int SearchTree::nearest(const CompositeConfig& q) const {
  Eigen::VectorXd qv(dims_);
  for (int i = 0; i < robot_count_; ++i) qv.segment<2>(2 * i) = q.points[i];
  const Eigen::RowVectorXd d2 =
      (points_.leftCols(size()).colwise() - qv).colwise().squaredNorm();
  int best = 0;
  for (int i = 1; i < size(); ++i) {
    if (d2[i] < d2[best]) best = i;
  }
  return best;
}

double SearchTree::audit_max_error(
    const std::function<double(const CompositeVertex&, const CompositeVertex&)>& edge_cost)
    const {
  if (size() == 0) return 0.0;
  std::vector<double> expected(size(), kInf);
  expected[0] = 0.0;
  double worst = std::abs(cost_[0]);
  int visited = 1;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int c : children_[u]) {
      expected[c] = expected[u] + edge_cost(verts_[u], verts_[c]);
      worst = std::max(worst, std::abs(expected[c] - cost_[c]));
      ++visited;
      stack.push_back(c);
    }
  }
  if (visited != size()) return kInf;  // disconnected or cyclic: corrupt
  return worst;
}

bool EdgeCache::edge_free(const TensorRoadmap& t, const CompositeVertex& a,
                          const CompositeVertex& b, double step) {
  if (!usable_checked_) {
    usable_ = t.codes_fit();
    usable_checked_ = true;
  }
  if (!usable_) return composite_edge_free(t, a, b, step);
  const uint64_t ca = t.encode(a);
  const uint64_t cb = t.encode(b);
  const Key key{std::min(ca, cb), std::max(ca, cb)};
  auto it = map_.find(key);
  if (it != map_.end()) return it->second;
  const bool free = composite_edge_free(t, a, b, step);
  if (map_.size() < capacity_) map_.emplace(key, free);
  return free;
}

double heuristic(const TensorRoadmap& t, const CompositeVertex& v) {
  double h = 0.0;
  for (int i = 0; i < t.robot_count(); ++i) {
    const double d = t.goal_tables[i].dist[v.ids[i]];
    if (d == kInf) return kInf;
    h += d;
  }
  return h;
}

std::optional<CompositeVertex> expand_drrt_star(const TensorRoadmap& t, SearchTree& tree,
                                                const std::optional<CompositeVertex>& v_last,
                                                const CompositeVertex& goal, Rng& rng,
                                                const ExpandOptions& opts) {
  if (tree.size() == 0) throw std::logic_error("expand_drrt_star: empty tree");
  CompositeVertex v_new;
  if (!v_last.has_value()) {
    const CompositeConfig q_rand = sample_uniform_config(t.workspace, t.robot_count(), rng);
    const int near = tree.nearest(q_rand);
    v_new = oracle_direction(t, tree.vertex(near), q_rand);
  } else {
    v_new = oracle_direction(t, *v_last, t.config_of(goal));
  }

  std::vector<Candidate> cand;
  collect_tree_neighbors(t, tree, v_new, cand);
  if (cand.empty()) return std::nullopt;
  for (Candidate& c : cand) c.total = tree.cost(c.node) + c.edge;
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    return a.total < b.total || (a.total == b.total && a.node < b.node);
  });

  const double h_new = heuristic(t, v_new);
  int best = -1;
  double best_total = kInf;
  double best_edge = 0.0;
  for (const Candidate& c : cand) {
    if (edge_committable(opts, t, tree.vertex(c.node), v_new)) {
      best = c.node;
      best_total = c.total;
      best_edge = c.edge;
      break;
    }
  }
  if (best < 0) return std::nullopt;

  int idx_new = tree.find(v_new);
  if (idx_new < 0) {
    idx_new = tree.add_child(best, v_new, t.config_of(v_new), best_edge);
  } else if (best_total < tree.cost(idx_new)) {
    tree.reparent(idx_new, best, best_total);
  }

  if (opts.rewire) {
    for (const Candidate& c : cand) {
      const double through_new = tree.cost(idx_new) + c.edge;
      if (through_new >= tree.cost(c.node)) continue;
      if (!edge_committable(opts, t, tree.vertex(c.node), v_new)) continue;
      tree.reparent(c.node, idx_new, through_new);
    }
  }

  return h_new < heuristic(t, tree.vertex(best)) ? std::optional<CompositeVertex>(v_new)
                                                 : std::nullopt;
}

std::vector<CompositeVertex> trace_path(const SearchTree& tree, const CompositeVertex& S,
                                        const CompositeVertex& T) {
  const int goal = tree.find(T);
  if (goal < 0) return {};
  std::vector<CompositeVertex> path;
  for (int u = goal; u >= 0; u = tree.parent(u)) path.push_back(tree.vertex(u));
  std::reverse(path.begin(), path.end());
  if (path.front() != S) return {};  // tree rooted elsewhere
  return path;
}

namespace {

PlanResult trivial_result(const TensorRoadmap& t, const CompositeVertex& S, double elapsed_ms) {
  PlanResult res;
  res.path = {S};
  res.config_path = {t.config_of(S)};
  res.cost = 0.0;
  res.first_solution_iteration = 0;
  res.history = {{0, elapsed_ms, 0.0}};
  res.time_used_ms = elapsed_ms;
  return res;
}

void finalize_tree_result(const TensorRoadmap& t, const SearchTree& tree,
                          const CompositeVertex& S, const CompositeVertex& T, long iterations,
                          const Stopwatch& clock, HistoryRecorder& rec, double best,
                          PlanResult& res) {
  res.iterations_used = iterations;
  res.path = trace_path(tree, S, T);
  if (!res.path.empty()) {
    res.cost = best;
    res.config_path.reserve(res.path.size());
    for (const CompositeVertex& v : res.path) res.config_path.push_back(t.config_of(v));
  }
  res.tree_audit_error = tree.audit_max_error(
      [&](const CompositeVertex& a, const CompositeVertex& b) { return composite_cost(t, a, b); });
  rec.event(iterations, clock.ms(), best);
  res.history = rec.take();
  res.time_used_ms = clock.ms();
}

}  // namespace

PlanResult drrt_star(const TensorRoadmap& t, const CompositeVertex& S,
                     const CompositeVertex& T, const PlannerConfig& cfg) {
  cfg.validate();
  validate_vertex(t, S, "start");
  validate_vertex(t, T, "goal");
  Stopwatch clock;
  if (!config_free(t, S, cfg.collision_step)) {
    throw InfeasibleEndpoint("start composite configuration is in collision");
  }
  if (S == T) return trivial_result(t, S, clock.ms());

  SearchTree tree(t.robot_count());
  tree.add_root(S, t.config_of(S));
  EdgeCache cache;
  EdgeCache fine_cache;
  Rng rng(cfg.seed);
  HistoryRecorder rec;
  PlanResult res;
  // Branch and bound gates greedy chains on the admissible through-cost bound
  // (per-robot start distance + goal distance): a chain is cut where no path
  // through the vertex can beat the incumbent. The bound must not use tree
  // costs: those converge from above, and the direction oracle reaches some
  // vertices only through chains, so gating on a still-inflated tree cost can
  // starve the tree of exactly the vertices that would repair it.
  std::vector<std::vector<double>> start_dist;
  if (cfg.branch_and_bound) {
    start_dist.reserve(t.robot_count());
    for (int i = 0; i < t.robot_count(); ++i) {
      start_dist.push_back(shortest_path_distances(t.roadmaps[i].edges, S.ids[i]));
    }
  }
  const auto through_bound = [&](const CompositeVertex& v) {
    double b = heuristic(t, v);
    for (int i = 0; i < t.robot_count() && b < kInf; ++i) {
      const double d = start_dist[i][v.ids[i]];
      b = d == kInf ? kInf : b + d;
    }
    return b;
  };
  // The greedy phase is deterministic given its starting vertex, so a chain
  // that revisits a vertex would repeat forever; a revisit therefore hands
  // control back to exploration.
  std::optional<CompositeVertex> v_last = S;
  std::unordered_set<CompositeVertex, CompositeVertexHash> chain{S};
  double best = kInf;
  int idx_goal = -1;
  long it = 0;
  while (true) {
    if (cfg.iteration_limit > 0 && it >= cfg.iteration_limit) break;
    if (cfg.time_limit_ms > 0.0 && clock.ms() >= cfg.time_limit_ms) break;
    ++it;
    ExpandOptions opts;
    opts.collision_step = cfg.collision_step;
    opts.rewire = true;
    opts.edge_cache = &cache;
    opts.fine_cache = &fine_cache;
    v_last = expand_drrt_star(t, tree, v_last, T, rng, opts);
    if (v_last.has_value()) {
      if (cfg.branch_and_bound && best < kInf && through_bound(*v_last) >= best) {
        v_last = std::nullopt;
      } else if (!chain.insert(*v_last).second) {
        v_last = std::nullopt;
      }
    }
    if (!v_last.has_value()) chain.clear();
    if (idx_goal < 0) idx_goal = tree.find(T);
    if (idx_goal >= 0 && tree.cost(idx_goal) < best) {
      best = tree.cost(idx_goal);
      if (!res.first_solution_iteration) {
        res.first_solution_iteration = it;
        rec.event(it, clock.ms(), best);
      }
    }
    rec.tick(it, clock.ms(), best);
  }
  finalize_tree_result(t, tree, S, T, it, clock, rec, best, res);
  return res;
}

PlanResult drrt(const TensorRoadmap& t, const CompositeVertex& S, const CompositeVertex& T,
                const PlannerConfig& cfg) {
  cfg.validate();
  validate_vertex(t, S, "start");
  validate_vertex(t, T, "goal");
  Stopwatch clock;
  if (!config_free(t, S, cfg.collision_step)) {
    throw InfeasibleEndpoint("start composite configuration is in collision");
  }
  if (S == T) return trivial_result(t, S, clock.ms());

  SearchTree tree(t.robot_count());
  tree.add_root(S, t.config_of(S));
  EdgeCache cache;
  EdgeCache fine_cache;
  Rng rng(cfg.seed);
  HistoryRecorder rec;
  PlanResult res;
  const CompositeConfig goal_config = t.config_of(T);
  double best = kInf;
  long it = 0;
  while (true) {
    if (cfg.iteration_limit > 0 && it >= cfg.iteration_limit) break;
    if (cfg.time_limit_ms > 0.0 && clock.ms() >= cfg.time_limit_ms) break;
    ++it;
    const bool biased = rng.canonical() < cfg.goal_bias;
    const CompositeConfig target =
        biased ? goal_config : sample_uniform_config(t.workspace, t.robot_count(), rng);
    const int near = tree.nearest(target);
    const CompositeVertex v_new = oracle_direction(t, tree.vertex(near), target);
    if (!(v_new == tree.vertex(near)) && tree.find(v_new) < 0 &&
        cache.edge_free(t, tree.vertex(near), v_new, cfg.collision_step) &&
        fine_cache.edge_free(t, tree.vertex(near), v_new, cfg.collision_step / 10.0)) {
      const int idx =
          tree.add_child(near, v_new, t.config_of(v_new), composite_cost(t, tree.vertex(near), v_new));
      if (v_new == T) {
        // The original method does not improve past its first solution.
        best = tree.cost(idx);
        res.first_solution_iteration = it;
        rec.event(it, clock.ms(), best);
        rec.tick(it, clock.ms(), best);
        break;
      }
    }
    rec.tick(it, clock.ms(), best);
  }
  finalize_tree_result(t, tree, S, T, it, clock, rec, best, res);
  return res;
}

PlanResult implicit_astar(const TensorRoadmap& t, const CompositeVertex& S,
                          const CompositeVertex& T, const PlannerConfig& cfg) {
  cfg.validate();
  validate_vertex(t, S, "start");
  validate_vertex(t, T, "goal");
  if (!t.codes_fit()) {
    throw std::invalid_argument("implicit_astar: composite vertex codes exceed 64 bits");
  }
  Stopwatch clock;
  if (!config_free(t, S, cfg.collision_step)) {
    throw InfeasibleEndpoint("start composite configuration is in collision");
  }
  if (S == T) return trivial_result(t, S, clock.ms());

  struct OpenItem {
    double f = 0.0;
    uint64_t seq = 0;
    uint64_t code = 0;
    double g = 0.0;
  };
  struct Worse {
    bool operator()(const OpenItem& a, const OpenItem& b) const {
      return a.f > b.f || (a.f == b.f && a.seq > b.seq);
    }
  };

  struct PairHash {
    size_t operator()(const std::pair<uint64_t, uint64_t>& p) const {
      return static_cast<size_t>(mix_seed(p.first, p.second));
    }
  };

  EdgeCache cache;
  HistoryRecorder rec;
  PlanResult res;
  const uint64_t code_start = t.encode(S);
  const uint64_t code_goal = t.encode(T);
  std::unordered_set<std::pair<uint64_t, uint64_t>, PairHash> blocked;
  std::unordered_map<uint64_t, double> g;
  std::unordered_map<uint64_t, uint64_t> came_from;
  std::vector<uint64_t> codes;
  uint64_t seq = 0;
  long expansions = 0;
  bool found = false;
  // Returned paths must hold at the audit resolution (collision_step / 10):
  // when a traced edge fails the fine recheck it is excluded and the search
  // repeats on the reduced graph. Budgets carry across repeats.
  while (true) {
    g.clear();
    came_from.clear();
    std::priority_queue<OpenItem, std::vector<OpenItem>, Worse> open;
    g[code_start] = 0.0;
    open.push({heuristic(t, S), seq++, code_start, 0.0});
    found = false;
    while (!open.empty()) {
      if (cfg.iteration_limit > 0 && expansions >= cfg.iteration_limit) {
        res.timed_out = true;
        break;
      }
      if (cfg.time_limit_ms > 0.0 && clock.ms() >= cfg.time_limit_ms) {
        res.timed_out = true;
        break;
      }
      const OpenItem item = open.top();
      open.pop();
      if (item.g > g.at(item.code)) continue;  // stale entry
      if (item.code == code_goal) {
        found = true;
        break;
      }
      ++expansions;
      const CompositeVertex v = t.decode(item.code);
      // Memory guard: refuse expansions that could push the touched-state count
      // past the cap (the branching factor is the worst case for new states).
      const uint64_t branching = adjacency_count(t, v);
      if (branching == UINT64_MAX || g.size() + branching > cfg.astar_max_states) {
        res.timed_out = true;
        break;
      }
      for_each_adjacent(t, v, [&](const CompositeVertex& nb) {
        const uint64_t nb_code = t.encode(nb);
        const double nd = item.g + composite_cost(t, v, nb);
        auto it = g.find(nb_code);
        if (it != g.end() && it->second <= nd) return;
        const double h = heuristic(t, nb);
        if (h == kInf) return;  // cannot reach the goal through this state
        if (blocked.count({std::min(item.code, nb_code), std::max(item.code, nb_code)}) > 0) {
          return;
        }
        if (!cache.edge_free(t, v, nb, cfg.collision_step)) return;
        g[nb_code] = nd;
        came_from[nb_code] = item.code;
        open.push({nd + h, seq++, nb_code, nd});
      });
      rec.tick(expansions, clock.ms(), kInf);
    }
    if (!found) break;
    codes.assign(1, code_goal);
    while (codes.back() != code_start) codes.push_back(came_from.at(codes.back()));
    std::reverse(codes.begin(), codes.end());
    bool clean = true;
    for (size_t i = 0; i + 1 < codes.size(); ++i) {
      if (composite_edge_free(t, t.decode(codes[i]), t.decode(codes[i + 1]),
                              cfg.collision_step / 10.0)) {
        continue;
      }
      blocked.insert({std::min(codes[i], codes[i + 1]), std::max(codes[i], codes[i + 1])});
      clean = false;
    }
    if (clean) break;
    found = false;  // the traced path is not returnable; search again without it
  }

  res.iterations_used = expansions;
  res.states_explored = expansions;
  if (found) {
    res.cost = g.at(code_goal);
    res.first_solution_iteration = expansions;
    res.path.reserve(codes.size());
    res.config_path.reserve(codes.size());
    for (uint64_t code : codes) {
      res.path.push_back(t.decode(code));
      res.config_path.push_back(t.config_of(res.path.back()));
    }
  }
  rec.event(expansions, clock.ms(), res.cost);
  res.history = rec.take();
  res.time_used_ms = clock.ms();
  return res;
}

PlanResult composite_rrt_star(const Workspace& w, const std::vector<DiskRobot>& robots,
                              const CompositeConfig& S, const CompositeConfig& T,
                              const PlannerConfig& cfg) {
  cfg.validate();
  const int r = static_cast<int>(robots.size());
  if (r < 2) throw std::invalid_argument("composite_rrt_star: at least 2 robots required");
  if (S.points.size() != static_cast<size_t>(r) || T.points.size() != static_cast<size_t>(r)) {
    throw std::invalid_argument("composite_rrt_star: start/goal robot count mismatch");
  }
  Stopwatch clock;
  if (!composite_motion_free(w, robots, S, S, cfg.collision_step)) {
    throw InfeasibleEndpoint("start composite configuration is in collision");
  }

  const int dims = 2 * r;
  auto to_vec = [&](const CompositeConfig& q) {
    Eigen::VectorXd v(dims);
    for (int i = 0; i < r; ++i) v.segment<2>(2 * i) = q.points[i];
    return v;
  };
  auto to_config = [&](const Eigen::VectorXd& v) {
    CompositeConfig q;
    q.points.reserve(r);
    for (int i = 0; i < r; ++i) q.points.emplace_back(v[2 * i], v[2 * i + 1]);
    return q;
  };
  auto sum_cost = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double acc = 0.0;
    for (int i = 0; i < r; ++i) acc += (a.segment<2>(2 * i) - b.segment<2>(2 * i)).norm();
    return acc;
  };

  const Eigen::VectorXd start_vec = to_vec(S);
  const Eigen::VectorXd goal_vec = to_vec(T);

  PlanResult res;
  if (start_vec == goal_vec) {
    res.path.clear();
    res.config_path = {S};
    res.cost = 0.0;
    res.first_solution_iteration = 0;
    res.history = {{0, clock.ms(), 0.0}};
    res.time_used_ms = clock.ms();
    return res;
  }

  // Shrinking RRT* connection radius: gamma * (log k / k)^(1/dims) with the
  // standard volume-based constant (free-space measure bounded by the full
  // sampling region) and a safety factor.
  const double mu = std::pow(w.bounds.sizes().prod(), r);
  const double zeta = std::pow(EIGEN_PI, dims / 2.0) / std::tgamma(dims / 2.0 + 1.0);
  const double gamma = 1.1 * std::pow(2.0 * (1.0 + 1.0 / dims), 1.0 / dims) *
                       std::pow(mu / zeta, 1.0 / dims);

  Eigen::MatrixXd pts(dims, 64);
  std::vector<int> parent{-1};
  std::vector<double> cost{0.0};
  std::vector<std::vector<int>> children(1);
  pts.col(0) = start_vec;

  auto add_node = [&](const Eigen::VectorXd& v, int par, double total) {
    const int idx = static_cast<int>(parent.size());
    if (idx >= pts.cols()) pts.conservativeResize(dims, pts.cols() * 2);
    pts.col(idx) = v;
    parent.push_back(par);
    cost.push_back(total);
    children.emplace_back();
    children[par].push_back(idx);
    return idx;
  };
  auto reparent = [&](int node, int new_parent, double new_cost) {
    auto& sibs = children[parent[node]];
    sibs.erase(std::find(sibs.begin(), sibs.end(), node));
    parent[node] = new_parent;
    children[new_parent].push_back(node);
    const double delta = new_cost - cost[node];
    std::vector<int> stack{node};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      cost[u] += delta;
      stack.insert(stack.end(), children[u].begin(), children[u].end());
    }
  };
  auto motion_free = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return composite_motion_free(w, robots, to_config(a), to_config(b), cfg.collision_step);
  };
  // Commit-time confirmation at the audit resolution, so returned paths are
  // guaranteed to pass the 10x-finer soundness audit.
  auto fine_motion_free = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return composite_motion_free(w, robots, to_config(a), to_config(b),
                                 cfg.collision_step / 10.0);
  };

  Rng rng(cfg.seed);
  HistoryRecorder rec;
  const Point2 lo = w.bounds.min();
  const Point2 hi = w.bounds.max();
  int goal_idx = -1;
  double best = kInf;
  long it = 0;
  while (true) {
    if (cfg.iteration_limit > 0 && it >= cfg.iteration_limit) break;
    if (cfg.time_limit_ms > 0.0 && clock.ms() >= cfg.time_limit_ms) break;
    ++it;
    Eigen::VectorXd target(dims);
    if (rng.canonical() < cfg.goal_bias) {
      target = goal_vec;
    } else {
      for (int i = 0; i < r; ++i) {
        target[2 * i] = rng.uniform(lo.x(), hi.x());
        target[2 * i + 1] = rng.uniform(lo.y(), hi.y());
      }
    }
    const int tree_size = static_cast<int>(parent.size());
    const Eigen::RowVectorXd d2 =
        (pts.leftCols(tree_size).colwise() - target).colwise().squaredNorm();
    int near = 0;
    for (int i = 1; i < tree_size; ++i) {
      if (d2[i] < d2[near]) near = i;
    }
    const Eigen::VectorXd near_pt = pts.col(near);
    const double dist = (target - near_pt).norm();
    if (dist == 0.0) {
      rec.tick(it, clock.ms(), best);
      continue;
    }
    const Eigen::VectorXd x_new =
        dist <= cfg.rrt_star_steer ? target
                                   : Eigen::VectorXd(near_pt + (cfg.rrt_star_steer / dist) *
                                                                   (target - near_pt));
    if (!motion_free(near_pt, x_new)) {
      rec.tick(it, clock.ms(), best);
      continue;
    }

    const double k = std::max(tree_size, 2);
    const double radius =
        std::min(cfg.rrt_star_steer, gamma * std::pow(std::log(k) / k, 1.0 / dims));
    const Eigen::RowVectorXd dn2 =
        (pts.leftCols(tree_size).colwise() - x_new).colwise().squaredNorm();
    std::vector<Candidate> cand;
    for (int i = 0; i < tree_size; ++i) {
      if (dn2[i] <= radius * radius) {
        cand.push_back({i, sum_cost(pts.col(i), x_new), 0.0});
      }
    }
    bool has_near = false;
    for (const Candidate& c : cand) has_near = has_near || c.node == near;
    if (!has_near) cand.push_back({near, sum_cost(near_pt, x_new), 0.0});
    for (Candidate& c : cand) c.total = cost[c.node] + c.edge;
    std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
      return a.total < b.total || (a.total == b.total && a.node < b.node);
    });

    int best_parent = -1;
    double best_total = kInf;
    for (const Candidate& c : cand) {
      if ((c.node == near || motion_free(pts.col(c.node), x_new)) &&
          fine_motion_free(pts.col(c.node), x_new)) {
        best_parent = c.node;
        best_total = c.total;
        break;
      }
    }
    if (best_parent < 0) {
      rec.tick(it, clock.ms(), best);
      continue;
    }
    const int idx_new = add_node(x_new, best_parent, best_total);
    for (const Candidate& c : cand) {
      const double through_new = cost[idx_new] + c.edge;
      if (through_new >= cost[c.node]) continue;
      if (!motion_free(x_new, pts.col(c.node))) continue;
      if (!fine_motion_free(x_new, pts.col(c.node))) continue;
      reparent(c.node, idx_new, through_new);
    }

    if (goal_idx < 0 && x_new == goal_vec) {
      goal_idx = idx_new;
    } else {
      const double goal_gap = (x_new - goal_vec).norm();
      if (goal_gap > 0.0 && goal_gap <= cfg.rrt_star_steer) {
        const double through = cost[idx_new] + sum_cost(x_new, goal_vec);
        const auto goal_edge_free = [&] {
          return motion_free(x_new, goal_vec) && fine_motion_free(x_new, goal_vec);
        };
        if (goal_idx < 0) {
          if (goal_edge_free()) goal_idx = add_node(goal_vec, idx_new, through);
        } else if (through < cost[goal_idx] && goal_edge_free()) {
          reparent(goal_idx, idx_new, through);
        }
      }
    }

    if (goal_idx >= 0 && cost[goal_idx] < best) {
      best = cost[goal_idx];
      if (!res.first_solution_iteration) {
        res.first_solution_iteration = it;
        rec.event(it, clock.ms(), best);
      }
    }
    rec.tick(it, clock.ms(), best);
  }

  res.iterations_used = it;
  if (goal_idx >= 0) {
    res.cost = cost[goal_idx];
    std::vector<int> chain;
    for (int u = goal_idx; u >= 0; u = parent[u]) chain.push_back(u);
    std::reverse(chain.begin(), chain.end());
    res.config_path.reserve(chain.size());
    for (int u : chain) res.config_path.push_back(to_config(pts.col(u)));
  }
  // Tree cost audit, local to this planner's tree shape.
  {
    double worst = std::abs(cost[0]);
    std::vector<int> stack{0};
    std::vector<double> expected(parent.size(), kInf);
    expected[0] = 0.0;
    size_t visited = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int c : children[u]) {
        expected[c] = expected[u] + sum_cost(pts.col(u), pts.col(c));
        worst = std::max(worst, std::abs(expected[c] - cost[c]));
        ++visited;
        stack.push_back(c);
      }
    }
    res.tree_audit_error = visited == parent.size() ? worst : kInf;
  }
  rec.event(it, clock.ms(), best);
  res.history = rec.take();
  res.time_used_ms = clock.ms();
  return res;
}

}  // namespace mrmp
