#include "mrmp/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace mrmp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioParseError(path + ": " + what);
}

void require_keys(const json& obj, const std::string& at,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional) {
  if (!obj.is_object()) fail(at, "expected an object");
  for (const auto& item : obj.items()) {
    if (!required.count(item.key()) && !optional.count(item.key())) {
      fail(at, "unknown key \"" + item.key() + "\"");
    }
  }
  for (const std::string& key : required) {
    if (!obj.contains(key)) fail(at, "missing key \"" + key + "\"");
  }
}

double as_number(const json& v, const std::string& at) {
  if (!v.is_number()) fail(at, "expected a number");
  return v.get<double>();
}

long as_integer(const json& v, const std::string& at) {
  if (!v.is_number_integer()) fail(at, "expected an integer");
  return v.get<long>();
}

bool as_bool(const json& v, const std::string& at) {
  if (!v.is_boolean()) fail(at, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& at) {
  if (!v.is_string()) fail(at, "expected a string");
  return v.get<std::string>();
}

Point2 as_point(const json& v, const std::string& at) {
  if (!v.is_array() || v.size() != 2) fail(at, "expected [x, y]");
  return {as_number(v[0], at + "[0]"), as_number(v[1], at + "[1]")};
}

Workspace parse_workspace(const json& v, const std::string& at) {
  require_keys(v, at, {"bounds"}, {"obstacles"});
  const json& b = v.at("bounds");
  require_keys(b, at + ".bounds", {"min", "max"}, {});
  Workspace w;
  w.bounds = Eigen::AlignedBox2d(as_point(b.at("min"), at + ".bounds.min"),
                                 as_point(b.at("max"), at + ".bounds.max"));
  if (v.contains("obstacles")) {
    const json& obs = v.at("obstacles");
    if (!obs.is_array()) fail(at + ".obstacles", "expected an array");
    for (size_t i = 0; i < obs.size(); ++i) {
      const std::string oat = at + ".obstacles[" + std::to_string(i) + "]";
      if (!obs[i].is_array()) fail(oat, "expected an array of [x, y]");
      Polygon poly;
      for (size_t j = 0; j < obs[i].size(); ++j) {
        poly.vertices.push_back(as_point(obs[i][j], oat + "[" + std::to_string(j) + "]"));
      }
      w.obstacles.push_back(std::move(poly));
    }
  }
  return w;
}

DiskRobot parse_robot(const json& v, const std::string& at) {
  require_keys(v, at, {"radius", "start", "goal"}, {});
  DiskRobot r;
  r.radius = as_number(v.at("radius"), at + ".radius");
  r.start = as_point(v.at("start"), at + ".start");
  r.goal = as_point(v.at("goal"), at + ".goal");
  return r;
}

PlannerConfig parse_planner(const json& v, const std::string& at) {
  require_keys(v, at, {"planner"},
               {"iterations", "time_limit_ms", "branch_and_bound", "collision_step",
                "rrt_star_steer", "goal_bias", "astar_max_states"});
  PlannerConfig cfg;
  try {
    cfg.mode = planner_mode_from_name(as_string(v.at("planner"), at + ".planner"));
  } catch (const std::invalid_argument& e) {
    fail(at + ".planner", e.what());
  }
  if (v.contains("iterations")) cfg.iteration_limit = as_integer(v.at("iterations"), at + ".iterations");
  if (v.contains("time_limit_ms")) cfg.time_limit_ms = as_number(v.at("time_limit_ms"), at + ".time_limit_ms");
  if (v.contains("branch_and_bound")) cfg.branch_and_bound = as_bool(v.at("branch_and_bound"), at + ".branch_and_bound");
  if (v.contains("collision_step")) cfg.collision_step = as_number(v.at("collision_step"), at + ".collision_step");
  if (v.contains("rrt_star_steer")) cfg.rrt_star_steer = as_number(v.at("rrt_star_steer"), at + ".rrt_star_steer");
  if (v.contains("goal_bias")) cfg.goal_bias = as_number(v.at("goal_bias"), at + ".goal_bias");
  if (v.contains("astar_max_states")) {
    const long m = as_integer(v.at("astar_max_states"), at + ".astar_max_states");
    if (m <= 0) fail(at + ".astar_max_states", "expected a positive integer");
    cfg.astar_max_states = static_cast<uint64_t>(m);
  }
  return cfg;
}

[[noreturn]] void invariant(const std::string& at, const std::string& what) {
  throw ScenarioInvariantError(at + ": " + what);
}

json point_json(const Point2& p) { return json::array({p.x(), p.y()}); }

}  // namespace

void Scenario::validate() const {
  if (name.empty()) invariant("name", "must not be empty");
  try {
    workspace.validate();
  } catch (const std::invalid_argument& e) {
    invariant("workspace", e.what());
  }
  if (robots.size() < 2) invariant("robots", "at least 2 robots required");
  for (size_t i = 0; i < robots.size(); ++i) {
    const std::string at = "robots[" + std::to_string(i) + "]";
    const DiskRobot& r = robots[i];
    if (!(r.radius > 0.0) || !std::isfinite(r.radius)) invariant(at + ".radius", "must be positive");
    if (!point_free(r.start, r.radius, workspace)) invariant(at + ".start", "not collision-free in the workspace");
    if (!point_free(r.goal, r.radius, workspace)) invariant(at + ".goal", "not collision-free in the workspace");
  }
  for (size_t i = 0; i < robots.size(); ++i) {
    for (size_t j = i + 1; j < robots.size(); ++j) {
      const std::string pair = "robots[" + std::to_string(i) + "]/robots[" + std::to_string(j) + "]";
      if (disks_collide(robots[i].start, robots[i].radius, robots[j].start, robots[j].radius)) {
        invariant(pair, "starts collide");
      }
      if (disks_collide(robots[i].goal, robots[i].radius, robots[j].goal, robots[j].radius)) {
        invariant(pair, "goals collide");
      }
    }
  }
  if (roadmap_kind != "prm_star" && roadmap_kind != "grid9") {
    invariant("roadmap_kind", "expected \"prm_star\" or \"grid9\"");
  }
  if (roadmap_kind == "prm_star" && n < 2) invariant("n", "at least 2 vertices required");
  if (roadmap_kind == "grid9" && n != 9) invariant("n", "must be 9 for grid9 roadmaps");
  if (!(eta >= 0.0) || !std::isfinite(eta)) invariant("eta", "must be a nonnegative number");
  if (!(grid_jitter >= 0.0) || !std::isfinite(grid_jitter)) invariant("grid_jitter", "must be a nonnegative number");
  if (seeds.empty()) invariant("seeds", "at least one seed required");
  if (!roadmap_files.empty() && roadmap_files.size() != robots.size()) {
    invariant("roadmap_files", "expected one path per robot");
  }
  for (size_t p = 0; p < planners.size(); ++p) {
    try {
      planners[p].validate();
    } catch (const std::invalid_argument& e) {
      invariant("planners[" + std::to_string(p) + "]", e.what());
    }
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError(path + ": cannot open file");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioParseError(path + ": " + e.what());
  }

  require_keys(root, path, {"name", "workspace", "robots", "n", "eta", "seeds", "planners"},
               {"roadmap_kind", "grid_jitter", "roadmap_files"});
  Scenario s;
  s.name = as_string(root.at("name"), "name");
  s.workspace = parse_workspace(root.at("workspace"), "workspace");

  const json& robots = root.at("robots");
  if (!robots.is_array()) fail("robots", "expected an array");
  for (size_t i = 0; i < robots.size(); ++i) {
    s.robots.push_back(parse_robot(robots[i], "robots[" + std::to_string(i) + "]"));
  }

  s.n = static_cast<int>(as_integer(root.at("n"), "n"));
  s.eta = as_number(root.at("eta"), "eta");

  const json& seeds = root.at("seeds");
  if (!seeds.is_array()) fail("seeds", "expected an array");
  for (size_t i = 0; i < seeds.size(); ++i) {
    const std::string at = "seeds[" + std::to_string(i) + "]";
    const long v = as_integer(seeds[i], at);
    if (v < 0) fail(at, "expected a nonnegative integer");
    s.seeds.push_back(static_cast<uint64_t>(v));
  }

  const json& planners = root.at("planners");
  if (!planners.is_array()) fail("planners", "expected an array");
  for (size_t i = 0; i < planners.size(); ++i) {
    s.planners.push_back(parse_planner(planners[i], "planners[" + std::to_string(i) + "]"));
  }

  if (root.contains("roadmap_kind")) s.roadmap_kind = as_string(root.at("roadmap_kind"), "roadmap_kind");
  if (root.contains("grid_jitter")) s.grid_jitter = as_number(root.at("grid_jitter"), "grid_jitter");
  if (root.contains("roadmap_files")) {
    const json& files = root.at("roadmap_files");
    if (!files.is_array()) fail("roadmap_files", "expected an array");
    const auto base = std::filesystem::path(path).parent_path();
    for (size_t i = 0; i < files.size(); ++i) {
      const std::string rel = as_string(files[i], "roadmap_files[" + std::to_string(i) + "]");
      s.roadmap_files.push_back((base / rel).string());
    }
  }

  s.validate();
  return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
  json root;
  root["name"] = s.name;
  json ws;
  ws["bounds"]["min"] = point_json(s.workspace.bounds.min());
  ws["bounds"]["max"] = point_json(s.workspace.bounds.max());
  json obstacles = json::array();
  for (const Polygon& poly : s.workspace.obstacles) {
    json verts = json::array();
    for (const Point2& p : poly.vertices) verts.push_back(point_json(p));
    obstacles.push_back(std::move(verts));
  }
  ws["obstacles"] = std::move(obstacles);
  root["workspace"] = std::move(ws);

  json robots = json::array();
  for (const DiskRobot& r : s.robots) {
    json item;
    item["radius"] = r.radius;
    item["start"] = point_json(r.start);
    item["goal"] = point_json(r.goal);
    robots.push_back(std::move(item));
  }
  root["robots"] = std::move(robots);
  root["n"] = s.n;
  root["eta"] = s.eta;
  root["seeds"] = s.seeds;

  json planners = json::array();
  for (const PlannerConfig& cfg : s.planners) {
    json item;
    item["planner"] = planner_name(cfg.mode);
    item["iterations"] = cfg.iteration_limit;
    item["time_limit_ms"] = cfg.time_limit_ms;
    item["branch_and_bound"] = cfg.branch_and_bound;
    item["collision_step"] = cfg.collision_step;
    item["rrt_star_steer"] = cfg.rrt_star_steer;
    item["goal_bias"] = cfg.goal_bias;
    item["astar_max_states"] = cfg.astar_max_states;
    planners.push_back(std::move(item));
  }
  root["planners"] = std::move(planners);
  root["roadmap_kind"] = s.roadmap_kind;
  root["grid_jitter"] = s.grid_jitter;
  if (!s.roadmap_files.empty()) root["roadmap_files"] = s.roadmap_files;

  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  out << root.dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace mrmp
