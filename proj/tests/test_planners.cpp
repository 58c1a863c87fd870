#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "mrmp/planners.hpp"
#include "mrmp/shortest_path.hpp"

using namespace mrmp;

namespace {

Workspace box_world(double lo, double hi) {
  Workspace w;
  w.bounds = Eigen::AlignedBox2d(Point2(lo, lo), Point2(hi, hi));
  return w;
}

// The 10.2-unit benchmark workspace with its three polygonal obstacles.
Workspace bench_world() {
  Workspace w;
  w.bounds = Eigen::AlignedBox2d(Point2(-0.6, -0.6), Point2(9.6, 9.6));
  Polygon diamond, left, right;
  diamond.vertices = {{4.5, 2.7}, {6.3, 4.5}, {4.5, 6.3}, {2.7, 4.5}};
  left.vertices = {{0.4, 3.8}, {1.5, 3.8}, {1.5, 5.2}, {0.4, 5.2}};
  right.vertices = {{7.5, 3.8}, {8.6, 3.8}, {8.6, 5.2}, {7.5, 5.2}};
  w.obstacles = {diamond, left, right};
  return w;
}

Roadmap make_roadmap(const std::vector<Point2>& pts,
                     const std::vector<std::pair<int, int>>& links) {
  Roadmap g;
  g.vertices = pts;
  g.n = static_cast<int>(pts.size());
  g.edges.resize(pts.size());
  for (const auto& [a, b] : links) {
    const double len = (pts[a] - pts[b]).norm();
    g.edges[a].push_back({b, len});
    g.edges[b].push_back({a, len});
  }
  for (auto& adj : g.edges) {
    std::sort(adj.begin(), adj.end(), [](const Edge& x, const Edge& y) { return x.to < y.to; });
  }
  return g;
}

// Two jittered 3x3 grids swapping diagonal corners of a 9x9 box.
TensorRoadmap grid_pair(uint64_t seed) {
  const Workspace w = box_world(0.0, 9.0);
  const DiskRobot r0{0.2, {0.5, 0.5}, {8.5, 8.5}};
  const DiskRobot r1{0.2, {8.5, 8.5}, {0.5, 0.5}};
  return make_tensor_roadmap(
      w, {r0, r1},
      {build_grid_roadmap(w, r0, 0.15, mix_seed(seed, 0)),
       build_grid_roadmap(w, r1, 0.15, mix_seed(seed, 1))});
}

double explicit_optimum(const TensorRoadmap& t) {
  const ExplicitTensorGraph g = explicit_tensor_graph(t, 100);
  const auto dist = shortest_path_distances(g.adj, static_cast<int>(t.encode(t.start_vertex())));
  return dist[t.encode(t.goal_vertex())];
}

// 1, 2, 5, 10, 20, 50, ... iteration sampling grid up to limit.
std::set<long> history_grid(long limit) {
  std::set<long> grid;
  long g = 1;
  int phase = 0;
  while (g <= limit) {
    grid.insert(g);
    g = phase == 1 ? g * 5 / 2 : g * 2;
    phase = (phase + 1) % 3;
  }
  return grid;
}

void check_history_contract(const PlanResult& res, long limit) {
  REQUIRE(!res.history.empty());
  const std::set<long> grid = history_grid(limit);
  double best = kInf;
  long prev_it = -1;
  for (const HistoryPoint& h : res.history) {
    CHECK(h.iteration > prev_it);
    prev_it = h.iteration;
    CHECK(h.best_cost <= best);  // monotone non-increasing
    best = h.best_cost;
    const bool on_grid = grid.count(h.iteration) > 0;
    const bool is_first = res.first_solution_iteration &&
                          h.iteration == *res.first_solution_iteration;
    const bool is_final = h.iteration == res.iterations_used;
    CHECK((on_grid || is_first || is_final));
  }
  CHECK(res.history.back().iteration == res.iterations_used);
  CHECK(res.history.back().best_cost == res.cost);
}

void check_path_contract(const TensorRoadmap& t, const PlanResult& res) {
  REQUIRE(res.solved());
  REQUIRE(res.path.size() >= 2);
  CHECK(res.path.front() == t.start_vertex());
  CHECK(res.path.back() == t.goal_vertex());
  REQUIRE(res.config_path.size() == res.path.size());
  double total = 0.0;
  for (size_t k = 0; k + 1 < res.path.size(); ++k) {
    // 10x finer audit than the planning resolution
    CHECK(composite_motion_free(t.workspace, t.robots, res.config_path[k],
                                res.config_path[k + 1], kDefaultCollisionStep / 10.0));
    total += composite_cost(t, res.path[k], res.path[k + 1]);
  }
  CHECK(res.cost == doctest::Approx(total).epsilon(1e-9));
}

PlannerConfig iter_config(PlannerMode mode, long iterations, uint64_t seed) {
  PlannerConfig cfg;
  cfg.mode = mode;
  cfg.iteration_limit = iterations;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("planner names round trip") {
  for (PlannerMode mode : {PlannerMode::kDrrtStar, PlannerMode::kDrrt,
                           PlannerMode::kImplicitAstar, PlannerMode::kCompositeRrtStar}) {
    CHECK(planner_mode_from_name(planner_name(mode)) == mode);
  }
  CHECK_THROWS_AS(planner_mode_from_name("simulated_annealing"), std::invalid_argument);
}

TEST_CASE("planner config validation") {
  PlannerConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // no limit set
  cfg.iteration_limit = 100;
  CHECK_NOTHROW(cfg.validate());
  cfg.collision_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.collision_step = 0.05;
  cfg.goal_bias = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.goal_bias = 0.1;
  cfg.rrt_star_steer = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.rrt_star_steer = 1.0;
  cfg.astar_max_states = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("search tree bookkeeping and reparenting") {
  const TensorRoadmap t = grid_pair(1);
  SearchTree tree(2);
  const CompositeVertex s = t.start_vertex();
  const CompositeVertex a{{2, 3}};
  const CompositeVertex b{{4, 5}};

  const int root = tree.add_root(s, t.config_of(s));
  const int na = tree.add_child(root, a, t.config_of(a), 2.0);
  const int nb = tree.add_child(na, b, t.config_of(b), 3.0);
  CHECK(tree.size() == 3);
  CHECK(tree.cost(nb) == doctest::Approx(5.0));
  CHECK(tree.find(b) == nb);
  CHECK(tree.find({{8, 8}}) == -1);
  CHECK(tree.parent(nb) == na);
  CHECK(tree.children(na) == std::vector<int>{nb});

  // moving b under the root shifts it (and any descendants) by the delta
  tree.reparent(nb, root, 1.5);
  CHECK(tree.parent(nb) == root);
  CHECK(tree.cost(nb) == doctest::Approx(1.5));
  CHECK(tree.children(na).empty());
  const std::vector<int>& rc = tree.children(root);
  CHECK(std::count(rc.begin(), rc.end(), nb) == 1);

  CHECK(tree.nearest(t.config_of(s)) == root);
  CHECK(tree.nearest(t.config_of(b)) == nb);

  const double audit = tree.audit_max_error(
      [](const CompositeVertex&, const CompositeVertex&) { return 1.5; });
  CHECK(audit == doctest::Approx(0.5));  // node a stored 2.0 vs recomputed 1.5
}

TEST_CASE("trace_path walks the parent chain") {
  const TensorRoadmap t = grid_pair(1);
  SearchTree tree(2);
  const CompositeVertex s = t.start_vertex();
  const CompositeVertex a{{2, 3}};
  const CompositeVertex goal = t.goal_vertex();

  tree.add_root(s, t.config_of(s));
  CHECK(trace_path(tree, s, goal).empty());  // goal not in the tree

  tree.add_child(0, a, t.config_of(a), 1.0);
  tree.add_child(1, goal, t.config_of(goal), 1.0);
  const std::vector<CompositeVertex> path = trace_path(tree, s, goal);
  REQUIRE(path.size() == 3);
  CHECK(path[0] == s);
  CHECK(path[1] == a);
  CHECK(path[2] == goal);
}

TEST_CASE("identical start and goal is a zero-cost plan at iteration 0") {
  const TensorRoadmap t = grid_pair(2);
  const CompositeVertex s = t.start_vertex();

  for (PlannerMode mode :
       {PlannerMode::kDrrtStar, PlannerMode::kDrrt, PlannerMode::kImplicitAstar}) {
    PlanResult res;
    const PlannerConfig cfg = iter_config(mode, 100, 7);
    if (mode == PlannerMode::kDrrtStar) res = drrt_star(t, s, s, cfg);
    if (mode == PlannerMode::kDrrt) res = drrt(t, s, s, cfg);
    if (mode == PlannerMode::kImplicitAstar) res = implicit_astar(t, s, s, cfg);
    CHECK(res.cost == 0.0);
    CHECK(res.path == std::vector<CompositeVertex>{s});
    CHECK(res.first_solution_iteration == 0);
    CHECK(res.iterations_used == 0);
  }

  const CompositeConfig q = t.config_of(s);
  const PlanResult rrt = composite_rrt_star(t.workspace, t.robots, q, q,
                                            iter_config(PlannerMode::kCompositeRrtStar, 100, 7));
  CHECK(rrt.cost == 0.0);
  CHECK(rrt.first_solution_iteration == 0);
}

TEST_CASE("heuristic sums per-robot goal distances") {
  const Workspace w = box_world(-5.0, 50.0);
  const Roadmap r0 = make_roadmap({{0, 0}, {1, 0}}, {{0, 1}});          // one edge, length 1
  const Roadmap r1 = make_roadmap({{10, 0}, {10, 2}}, {{0, 1}});        // one edge, length 2
  const TensorRoadmap t = make_tensor_roadmap(
      w, {{0.1, {0, 0}, {1, 0}}, {0.1, {10, 0}, {10, 2}}}, {r0, r1});

  CHECK(heuristic(t, t.goal_vertex()) == 0.0);
  CHECK(heuristic(t, t.start_vertex()) == doctest::Approx(3.0));
}

TEST_CASE("drrt finds a free adjacent start-goal edge directly") {
  const Workspace w = box_world(-5.0, 50.0);
  const Roadmap r0 = make_roadmap({{0, 0}, {1, 0}}, {{0, 1}});
  const Roadmap r1 = make_roadmap({{10, 0}, {11, 0}}, {{0, 1}});
  const TensorRoadmap t = make_tensor_roadmap(
      w, {{0.1, {0, 0}, {1, 0}}, {0.1, {10, 0}, {11, 0}}}, {r0, r1});

  const PlanResult res = drrt(t, t.start_vertex(), t.goal_vertex(),
                              iter_config(PlannerMode::kDrrt, 200, 3));
  REQUIRE(res.solved());
  CHECK(res.path == std::vector<CompositeVertex>{t.start_vertex(), t.goal_vertex()});
  CHECK(res.cost == doctest::Approx(composite_cost(t, t.start_vertex(), t.goal_vertex())));
  CHECK(res.first_solution_iteration == 1);
}

TEST_CASE("implicit A* equals the explicit-graph Dijkstra oracle") {
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const TensorRoadmap t = grid_pair(seed);
    const double oracle = explicit_optimum(t);
    const PlanResult res = implicit_astar(t, t.start_vertex(), t.goal_vertex(),
                                          iter_config(PlannerMode::kImplicitAstar, 100000, 0));
    if (oracle == kInf) {
      CHECK_FALSE(res.solved());
      CHECK_FALSE(res.timed_out);
    } else {
      REQUIRE(res.solved());
      CHECK(std::abs(res.cost - oracle) <= 1e-9);
      check_path_contract(t, res);
      CHECK(res.states_explored > 0);
    }
  }
}

TEST_CASE("heuristic is admissible against explicit-graph distances") {
  const TensorRoadmap t = grid_pair(6);
  const ExplicitTensorGraph g = explicit_tensor_graph(t, 100);
  const auto dist = shortest_path_distances(g.adj, static_cast<int>(t.encode(t.goal_vertex())));
  for (uint64_t code = 0; code < g.vertices.size(); ++code) {
    if (dist[code] == kInf) continue;
    CHECK(heuristic(t, g.vertices[code]) <= dist[code] + 1e-12);
  }
}

TEST_CASE("drrt_star is sound, audited and converges on the grid pair") {
  const TensorRoadmap t = grid_pair(3);
  const double oracle = explicit_optimum(t);
  REQUIRE(oracle < kInf);

  const long limit = 10000;
  const PlanResult res = drrt_star(t, t.start_vertex(), t.goal_vertex(),
                                   iter_config(PlannerMode::kDrrtStar, limit, 17));
  REQUIRE(res.solved());
  CHECK(res.cost >= oracle - 1e-9);  // can never beat the roadmap optimum
  CHECK(res.tree_audit_error <= 1e-9);
  CHECK(res.iterations_used == limit);
  REQUIRE(res.first_solution_iteration.has_value());
  CHECK(*res.first_solution_iteration >= 1);
  check_history_contract(res, limit);
  check_path_contract(t, res);

  // converged: this instance is small enough that 10k iterations attain it
  CHECK(res.cost == doctest::Approx(oracle).epsilon(1e-6));

  const PlanResult again = drrt_star(t, t.start_vertex(), t.goal_vertex(),
                                     iter_config(PlannerMode::kDrrtStar, limit, 17));
  CHECK(again.cost == res.cost);
  CHECK(again.path == res.path);
  CHECK(again.first_solution_iteration == res.first_solution_iteration);
  REQUIRE(again.history.size() == res.history.size());
  for (size_t k = 0; k < res.history.size(); ++k) {
    CHECK(again.history[k].iteration == res.history[k].iteration);
    CHECK(again.history[k].best_cost == res.history[k].best_cost);
  }
}

TEST_CASE("branch and bound does not change the converged cost") {
  const TensorRoadmap t = grid_pair(4);
  const double oracle = explicit_optimum(t);
  REQUIRE(oracle < kInf);
  for (const uint64_t seed : {5, 17, 23}) {
    PlannerConfig cfg = iter_config(PlannerMode::kDrrtStar, 10000, seed);
    cfg.branch_and_bound = false;
    const PlanResult plain = drrt_star(t, t.start_vertex(), t.goal_vertex(), cfg);
    cfg.branch_and_bound = true;
    const PlanResult pruned = drrt_star(t, t.start_vertex(), t.goal_vertex(), cfg);
    REQUIRE(plain.solved());
    REQUIRE(pruned.solved());
    // both converge to the roadmap optimum, so pruning cannot have cost a path
    CHECK(plain.cost == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(pruned.cost == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(pruned.tree_audit_error <= 1e-9);
  }
}

TEST_CASE("implicit A* reports budget exhaustion distinctly from infeasibility") {
  const TensorRoadmap t = grid_pair(5);

  PlannerConfig tiny = iter_config(PlannerMode::kImplicitAstar, 100000, 0);
  tiny.astar_max_states = 3;
  const PlanResult starved = implicit_astar(t, t.start_vertex(), t.goal_vertex(), tiny);
  CHECK_FALSE(starved.solved());
  CHECK(starved.timed_out);

  // goal isolated for robot 0: genuinely infeasible, not a budget failure
  const Workspace w = box_world(-5.0, 50.0);
  const Roadmap r0 = make_roadmap({{0, 0}, {1, 0}, {0, 1}}, {{0, 2}});
  const Roadmap r1 = make_roadmap({{10, 0}, {11, 0}}, {{0, 1}});
  const TensorRoadmap blocked = make_tensor_roadmap(
      w, {{0.1, {0, 0}, {1, 0}}, {0.1, {10, 0}, {11, 0}}}, {r0, r1});
  const PlanResult res = implicit_astar(blocked, blocked.start_vertex(), blocked.goal_vertex(),
                                        iter_config(PlannerMode::kImplicitAstar, 100000, 0));
  CHECK_FALSE(res.solved());
  CHECK_FALSE(res.timed_out);

  const PlanResult sampled = drrt_star(blocked, blocked.start_vertex(), blocked.goal_vertex(),
                                       iter_config(PlannerMode::kDrrtStar, 500, 11));
  CHECK_FALSE(sampled.solved());
  CHECK(sampled.iterations_used == 500);
}

TEST_CASE("edge cache answers match direct edge checks") {
  const TensorRoadmap t = grid_pair(7);
  EdgeCache small_cache(4);
  EdgeCache big_cache;
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const CompositeVertex a = t.decode(rng.raw() % 81);
    const CompositeVertex b = t.decode(rng.raw() % 81);
    if (a == b) continue;
    const bool direct = composite_edge_free(t, a, b, kDefaultCollisionStep);
    CHECK(small_cache.edge_free(t, a, b, kDefaultCollisionStep) == direct);
    CHECK(big_cache.edge_free(t, a, b, kDefaultCollisionStep) == direct);
    CHECK(big_cache.edge_free(t, b, a, kDefaultCollisionStep) == direct);  // symmetric key
  }
}

TEST_CASE("drrt cost dominates converged drrt_star on the two-disk benchmark") {
  const Workspace w = bench_world();
  const std::vector<DiskRobot> robots{{0.2, {0.0, 0.0}, {9.0, 9.0}},
                                      {0.2, {9.0, 9.0}, {0.0, 0.0}}};
  double sum_star = 0.0, sum_plain = 0.0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<Roadmap> roadmaps;
    for (size_t i = 0; i < robots.size(); ++i) {
      roadmaps.push_back(
          build_prm_star(w, robots[i], 50, 0.1, mix_seed(seed, i), kDefaultCollisionStep,
                         static_cast<int>(i)));
    }
    const TensorRoadmap t = make_tensor_roadmap(w, robots, roadmaps);
    const PlanResult opt = implicit_astar(t, t.start_vertex(), t.goal_vertex(),
                                          iter_config(PlannerMode::kImplicitAstar, 1 << 20, 0));
    const PlanResult star = drrt_star(t, t.start_vertex(), t.goal_vertex(),
                                      iter_config(PlannerMode::kDrrtStar, 30000, seed));
    const PlanResult plain = drrt(t, t.start_vertex(), t.goal_vertex(),
                                  iter_config(PlannerMode::kDrrt, 30000, seed));
    REQUIRE(opt.solved());
    REQUIRE(star.solved());
    REQUIRE(plain.solved());
    // neither sampler may beat the exact roadmap optimum
    CHECK(star.cost >= opt.cost - 1e-9);
    CHECK(plain.cost >= opt.cost - 1e-9);
    CHECK(plain.cost >= star.cost - 1e-9);
    check_path_contract(t, star);
    check_path_contract(t, plain);
    sum_star += star.cost;
    sum_plain += plain.cost;
  }
  CHECK(sum_plain > sum_star);
}

TEST_CASE("composite RRT* nears the straight-line optimum in an empty workspace") {
  const Workspace w = box_world(0.0, 10.0);
  const std::vector<DiskRobot> robots{{0.3, {1.0, 1.0}, {1.0, 9.0}},
                                      {0.3, {9.0, 1.0}, {9.0, 9.0}}};
  CompositeConfig S{{robots[0].start, robots[1].start}};
  CompositeConfig T{{robots[0].goal, robots[1].goal}};

  // rewiring in the 4-dimensional composite space needs a real budget before
  // the cost settles near the straight-line sum of 16
  PlannerConfig cfg = iter_config(PlannerMode::kCompositeRrtStar, 40000, 5);
  const PlanResult res = composite_rrt_star(w, robots, S, T, cfg);
  REQUIRE(res.solved());
  CHECK(res.cost <= 1.2 * 16.0);
  CHECK(res.cost >= 16.0 - 1e-9);
  CHECK(res.tree_audit_error <= 1e-9);

  REQUIRE(res.config_path.size() >= 2);
  CHECK(res.config_path.front() == S);
  CHECK(res.config_path.back() == T);
  for (size_t k = 0; k + 1 < res.config_path.size(); ++k) {
    CHECK(composite_motion_free(w, robots, res.config_path[k], res.config_path[k + 1],
                                kDefaultCollisionStep / 10.0));
  }

  PlannerConfig short_cfg = iter_config(PlannerMode::kCompositeRrtStar, 4000, 5);
  const PlanResult once = composite_rrt_star(w, robots, S, T, short_cfg);
  const PlanResult again = composite_rrt_star(w, robots, S, T, short_cfg);
  CHECK(again.cost == once.cost);
  CHECK(res.cost <= once.cost + 1e-9);  // anytime: more budget never hurts

  CHECK_THROWS_AS(composite_rrt_star(w, {robots[0]}, {{S.points[0]}}, {{T.points[0]}}, cfg),
                  std::invalid_argument);
  const CompositeConfig overlapping{{{5.0, 5.0}, {5.2, 5.0}}};
  CHECK_THROWS_AS(composite_rrt_star(w, robots, overlapping, T, cfg), InfeasibleEndpoint);
}

TEST_CASE("returned paths are certified at the audit resolution") {
  // One corridor whose sweep passes at the configured step but penetrates a
  // stationary disk between samples: the coarse check samples the moving
  // robot at x = 0.04 and 0.08, the audit-step check hits the closest
  // approach at x = 0.06 where the disks overlap.
  Workspace w;
  w.bounds = Eigen::AlignedBox2d(Point2(-1.0, -1.0), Point2(2.0, 1.0));
  const DiskRobot mover{0.3, {0.0, 0.0}, {0.12, 0.0}};
  const DiskRobot sitter{0.3, {0.06, -0.5999}, {0.06, -0.5999}};
  const Roadmap moving = make_roadmap({{0.0, 0.0}, {0.12, 0.0}}, {{0, 1}});
  const Roadmap sitting = make_roadmap({{0.06, -0.5999}, {0.06, -0.5999}}, {{0, 1}});
  const TensorRoadmap t = make_tensor_roadmap(w, {mover, sitter}, {moving, sitting});
  const CompositeVertex S = t.start_vertex();
  const CompositeVertex T = t.goal_vertex();

  const CompositeVertex moved{{1, 0}};
  REQUIRE(composite_edge_free(t, S, moved, kDefaultCollisionStep));
  REQUIRE_FALSE(composite_edge_free(t, S, moved, kDefaultCollisionStep / 10.0));

  // The coarse explicit graph believes the instance is solvable; the
  // audit-resolution graph knows it is not.
  const ExplicitTensorGraph coarse = explicit_tensor_graph(t, 4, kDefaultCollisionStep);
  const auto coarse_dist = shortest_path_distances(coarse.adj, static_cast<int>(t.encode(S)));
  CHECK(coarse_dist[t.encode(T)] < kInf);
  const ExplicitTensorGraph fine = explicit_tensor_graph(t, 4, kDefaultCollisionStep / 10.0);
  const auto fine_dist = shortest_path_distances(fine.adj, static_cast<int>(t.encode(S)));
  CHECK(fine_dist[t.encode(T)] == kInf);

  // Every planner must refuse the corridor rather than return a path that
  // would fail the audit.
  const PlanResult star = drrt_star(t, S, T, iter_config(PlannerMode::kDrrtStar, 2000, 7));
  CHECK_FALSE(star.solved());
  CHECK(star.config_path.empty());

  const PlanResult plain = drrt(t, S, T, iter_config(PlannerMode::kDrrt, 2000, 7));
  CHECK_FALSE(plain.solved());

  const PlanResult astar =
      implicit_astar(t, S, T, iter_config(PlannerMode::kImplicitAstar, 1 << 16, 0));
  CHECK_FALSE(astar.solved());
  CHECK_FALSE(astar.timed_out);  // exhausted, not out of budget
}
