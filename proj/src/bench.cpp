#include "mrmp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrmp/number_io.hpp"
#include "mrmp/shortest_path.hpp"

namespace mrmp {

namespace {

// Planner RNG streams live above the per-robot roadmap streams (0..R-1).
uint64_t planner_seed(uint64_t scenario_seed, size_t planner_index) {
  return mix_seed(scenario_seed, 1000 + static_cast<uint64_t>(planner_index));
}

double normalized(double cost, double normalizer) {
  if (!(normalizer > 0.0) || normalizer == kInf || cost == kInf) return kInf;
  return cost / normalizer;
}

}  // namespace

std::vector<Roadmap> build_scenario_roadmaps(const Scenario& s, uint64_t seed) {
  std::vector<Roadmap> roadmaps;
  roadmaps.reserve(s.robots.size());
  if (!s.roadmap_files.empty()) {
    for (const std::string& path : s.roadmap_files) roadmaps.push_back(load_roadmap_file(path));
    return roadmaps;
  }
  for (size_t i = 0; i < s.robots.size(); ++i) {
    const uint64_t stream = mix_seed(seed, static_cast<uint64_t>(i));
    if (s.roadmap_kind == "grid9") {
      roadmaps.push_back(build_grid_roadmap(s.workspace, s.robots[i], s.grid_jitter, stream,
                                            kDefaultCollisionStep, static_cast<int>(i)));
    } else {
      roadmaps.push_back(build_prm_star(s.workspace, s.robots[i], s.n, s.eta, stream,
                                        kDefaultCollisionStep, static_cast<int>(i)));
    }
  }
  return roadmaps;
}

TensorRoadmap scenario_tensor(const Scenario& s, uint64_t seed) {
  return make_tensor_roadmap(s.workspace, s.robots, build_scenario_roadmaps(s, seed));
}

PlanResult run_planner(const TensorRoadmap& t, const Scenario& s, const PlannerConfig& cfg) {
  switch (cfg.mode) {
    case PlannerMode::kDrrtStar:
      return drrt_star(t, t.start_vertex(), t.goal_vertex(), cfg);
    case PlannerMode::kDrrt:
      return drrt(t, t.start_vertex(), t.goal_vertex(), cfg);
    case PlannerMode::kImplicitAstar:
      return implicit_astar(t, t.start_vertex(), t.goal_vertex(), cfg);
    case PlannerMode::kCompositeRrtStar: {
      CompositeConfig S, T;
      for (const DiskRobot& r : s.robots) {
        S.points.push_back(r.start);
        T.points.push_back(r.goal);
      }
      return composite_rrt_star(s.workspace, s.robots, S, T, cfg);
    }
  }
  throw std::logic_error("run_planner: unhandled planner mode");
}

std::vector<BenchRecord> run_benchmark(const Scenario& s) {
  s.validate();
  std::vector<BenchRecord> records;
  const int r = static_cast<int>(s.robots.size());
  for (uint64_t seed : s.seeds) {
    TensorRoadmap t;
    double normalizer = kInf;
    bool built = false;
    try {
      t = scenario_tensor(s, seed);
      normalizer = 0.0;
      for (int i = 0; i < r; ++i) normalizer += t.goal_tables[i].dist[0];
      built = true;
    } catch (const std::exception&) {
    }
    for (size_t p = 0; p < s.planners.size(); ++p) {
      PlannerConfig cfg = s.planners[p];
      cfg.seed = planner_seed(seed, p);
      const std::string name = planner_name(cfg.mode);
      auto failure_row = [&]() {
        records.push_back({s.name, name, seed, r, s.n, 0, 0.0, kInf, false, kInf});
      };
      if (!built) {
        failure_row();
        continue;
      }
      try {
        const PlanResult res = run_planner(t, s, cfg);
        for (const HistoryPoint& h : res.history) {
          records.push_back({s.name, name, seed, r, s.n, h.iteration, h.elapsed_ms, h.best_cost,
                             h.best_cost < kInf, normalized(h.best_cost, normalizer)});
        }
      } catch (const std::exception&) {
        failure_row();
      }
    }
  }
  return records;
}

std::string csv_string(std::vector<BenchRecord> records) {
  std::sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.scenario, a.planner, a.seed, a.iteration) <
           std::tie(b.scenario, b.planner, b.seed, b.iteration);
  });
  std::string out = "scenario,planner,seed,R,n,iteration,elapsed_ms,best_cost,success,normalized_cost\n";
  for (const BenchRecord& rec : records) {
    out += rec.scenario;
    out += ',';
    out += rec.planner;
    out += ',';
    out += std::to_string(rec.seed);
    out += ',';
    out += std::to_string(rec.robot_count);
    out += ',';
    out += std::to_string(rec.n);
    out += ',';
    out += std::to_string(rec.iteration);
    out += ',';
    out += format_double(rec.elapsed_ms);
    out += ',';
    if (rec.best_cost < kInf) out += format_double(rec.best_cost);
    out += ',';
    out += rec.success ? "true" : "false";
    out += ',';
    if (rec.normalized_cost < kInf) out += format_double(rec.normalized_cost);
    out += '\n';
  }
  return out;
}

void emit_csv(std::vector<BenchRecord> records, const std::string& path) {
  const std::string body = csv_string(std::move(records));
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error(tmp + ": cannot open file for writing");
    out << body;
    if (!out) throw std::runtime_error(tmp + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

VerifyReport verify_small_instance(const Scenario& s, uint64_t max_vertices) {
  s.validate();
  std::vector<std::pair<PlannerConfig, size_t>> drrt_configs;
  for (size_t p = 0; p < s.planners.size(); ++p) {
    if (s.planners[p].mode == PlannerMode::kDrrtStar) drrt_configs.push_back({s.planners[p], p});
  }
  if (drrt_configs.empty()) {
    throw std::invalid_argument("verify_small_instance: scenario has no drrt_star planner config");
  }
  std::sort(drrt_configs.begin(), drrt_configs.end(),
            [](const auto& a, const auto& b) { return a.first.iteration_limit < b.first.iteration_limit; });

  VerifyReport rep;
  const TensorRoadmap t = scenario_tensor(s, s.seeds.front());
  const ExplicitTensorGraph g = explicit_tensor_graph(t, max_vertices);
  const int code_start = static_cast<int>(t.encode(t.start_vertex()));
  const int code_goal = static_cast<int>(t.encode(t.goal_vertex()));
  rep.explicit_cost = shortest_path_distances(g.adj, code_start)[code_goal];

  PlannerConfig acfg;
  acfg.mode = PlannerMode::kImplicitAstar;
  acfg.iteration_limit = static_cast<long>(g.vertices.size()) + 1;
  acfg.astar_max_states = 2 * g.vertices.size() + 2;
  rep.astar_cost = implicit_astar(t, t.start_vertex(), t.goal_vertex(), acfg).cost;
  rep.astar_matches = (rep.explicit_cost == kInf && rep.astar_cost == kInf) ||
                      std::abs(rep.explicit_cost - rep.astar_cost) <= 1e-9;

  for (const auto& [base_cfg, p] : drrt_configs) {
    VerifyBudget budget;
    budget.iterations = base_cfg.iteration_limit;
    budget.runs = static_cast<int>(s.seeds.size());
    for (uint64_t seed : s.seeds) {
      PlannerConfig cfg = base_cfg;
      cfg.seed = planner_seed(seed, p);
      const PlanResult res = drrt_star(t, t.start_vertex(), t.goal_vertex(), cfg);
      const bool attained = rep.explicit_cost == kInf
                                ? !res.solved()
                                : std::abs(res.cost - rep.explicit_cost) <= 1e-6;
      if (attained) ++budget.attained;
    }
    budget.fraction = budget.runs > 0 ? static_cast<double>(budget.attained) / budget.runs : 0.0;
    rep.budgets.push_back(budget);
  }

  const VerifyBudget& top = rep.budgets.back();
  rep.fractions_pass = top.fraction >= rep.threshold;
  for (const VerifyBudget& b : rep.budgets) {
    rep.fractions_pass = rep.fractions_pass && top.fraction >= b.fraction;
  }
  rep.pass = rep.astar_matches && rep.fractions_pass;
  return rep;
}

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void diagnostic(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

struct CommonFlags {
  std::string scenario_path;
  uint64_t seed = 0;
  long iterations = 0;
  double time_limit_ms = 0.0;
  int n = 0;
  double eta = -1.0;
  std::string output;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* iter_opt = nullptr;
  CLI::Option* time_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* eta_opt = nullptr;

  void attach(CLI::App* cmd, bool with_budget) {
    cmd->add_option("--scenario", scenario_path, "scenario file")->required();
    seed_opt = cmd->add_option("--seed", seed, "scenario seed (default: first listed)");
    if (with_budget) {
      iter_opt = cmd->add_option("--iterations", iterations, "iteration budget override");
      time_opt = cmd->add_option("--time-limit", time_limit_ms, "time budget override (ms)");
    }
    n_opt = cmd->add_option("--n", n, "roadmap vertex count override");
    eta_opt = cmd->add_option("--eta", eta, "connection radius inflation override");
  }

  Scenario load() const {
    Scenario s = load_scenario(scenario_path);
    if (n_opt->count()) s.n = n;
    if (eta_opt->count()) s.eta = eta;
    if (n_opt->count() || eta_opt->count()) s.validate();
    return s;
  }

  uint64_t pick_seed(const Scenario& s) const {
    return seed_opt->count() ? seed : s.seeds.front();
  }

  void apply_budget(PlannerConfig& cfg) const {
    if (iter_opt != nullptr && iter_opt->count()) cfg.iteration_limit = iterations;
    if (time_opt != nullptr && time_opt->count()) cfg.time_limit_ms = time_limit_ms;
  }
};

std::string point_str(const Point2& p) {
  return "(" + format_double(p.x()) + ", " + format_double(p.y()) + ")";
}

int run_build(const CommonFlags& flags) {
  Scenario s = flags.load();
  const uint64_t seed = flags.pick_seed(s);
  const std::vector<Roadmap> roadmaps = build_scenario_roadmaps(s, seed);
  const fs::path dir = flags.output.empty() ? fs::path(".") : fs::path(flags.output);
  fs::create_directories(dir);
  for (size_t i = 0; i < roadmaps.size(); ++i) {
    const fs::path path = dir / (s.name + "_seed" + std::to_string(seed) + "_robot" +
                                 std::to_string(i) + ".roadmap");
    save_roadmap_file(roadmaps[i], path.string());
    std::cout << path.string() << " vertices " << roadmaps[i].vertices.size() << " radius "
              << format_double(roadmaps[i].radius_used) << "\n";
  }
  return 0;
}

int run_plan(const CommonFlags& flags, const std::string& planner) {
  Scenario s = flags.load();
  PlannerConfig cfg;
  cfg.mode = planner_mode_from_name(planner);
  for (const PlannerConfig& candidate : s.planners) {
    if (candidate.mode == cfg.mode) {
      cfg = candidate;
      break;
    }
  }
  flags.apply_budget(cfg);
  if (cfg.iteration_limit <= 0 && cfg.time_limit_ms <= 0.0) {
    throw std::invalid_argument("plan: set --iterations or --time-limit (the scenario has no " +
                                std::string(planner_name(cfg.mode)) + " config)");
  }
  const uint64_t seed = flags.pick_seed(s);
  cfg.seed = seed;
  const TensorRoadmap t = scenario_tensor(s, seed);
  const PlanResult res = run_planner(t, s, cfg);

  std::cout << "planner " << planner_name(cfg.mode) << "\n";
  std::cout << "seed " << seed << "\n";
  std::cout << "cost " << (res.solved() ? format_double(res.cost) : "unsolved") << "\n";
  std::cout << "iterations " << res.iterations_used << "\n";
  std::cout << "first_solution "
            << (res.first_solution_iteration ? std::to_string(*res.first_solution_iteration) : "-")
            << "\n";
  for (size_t k = 0; k < res.config_path.size(); ++k) {
    std::cout << "path[" << k << "]";
    for (const Point2& p : res.config_path[k].points) std::cout << " " << point_str(p);
    std::cout << "\n";
  }

  if (!flags.output.empty()) {
    json out;
    out["planner"] = planner_name(cfg.mode);
    out["seed"] = seed;
    out["cost"] = res.solved() ? json(res.cost) : json(nullptr);
    out["iterations"] = res.iterations_used;
    out["first_solution"] =
        res.first_solution_iteration ? json(*res.first_solution_iteration) : json(nullptr);
    json path = json::array();
    for (const CompositeConfig& q : res.config_path) {
      json step = json::array();
      for (const Point2& p : q.points) step.push_back(json::array({p.x(), p.y()}));
      path.push_back(std::move(step));
    }
    out["path"] = std::move(path);
    std::ofstream f(flags.output);
    if (!f) throw std::runtime_error(flags.output + ": cannot open file for writing");
    f << out.dump(2) << "\n";
  }
  return res.solved() ? 0 : 4;
}

int run_bench(const CommonFlags& flags) {
  Scenario s = flags.load();
  if (flags.seed_opt->count()) s.seeds = {flags.seed};
  for (PlannerConfig& cfg : s.planners) flags.apply_budget(cfg);
  s.validate();
  const std::string out = flags.output.empty() ? s.name + ".csv" : flags.output;
  std::vector<BenchRecord> records = run_benchmark(s);
  const size_t count = records.size();
  emit_csv(std::move(records), out);
  std::cout << "wrote " << out << " (" << count << " records)" << "\n";
  return 0;
}

int run_verify(const CommonFlags& flags, uint64_t max_vertices) {
  Scenario s = flags.load();
  const VerifyReport rep = verify_small_instance(s, max_vertices);
  std::cout << "explicit_cost "
            << (rep.explicit_cost < kInf ? format_double(rep.explicit_cost) : "infeasible") << "\n";
  std::cout << "astar_cost " << (rep.astar_cost < kInf ? format_double(rep.astar_cost) : "infeasible")
            << "\n";
  std::cout << "astar_matches " << (rep.astar_matches ? "true" : "false") << "\n";
  for (const VerifyBudget& b : rep.budgets) {
    std::cout << "budget " << b.iterations << ": attained " << b.attained << "/" << b.runs
              << " fraction " << format_double(b.fraction) << "\n";
  }
  std::cout << "fractions_pass " << (rep.fractions_pass ? "true" : "false") << "\n";
  std::cout << "verdict " << (rep.pass ? "pass" : "fail") << "\n";
  return rep.pass ? 0 : 3;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"multi-robot motion planning over implicit tensor-product roadmaps", "mrmp"};
  app.require_subcommand(1);

  CommonFlags build_flags, plan_flags, bench_flags, verify_flags;
  std::string planner;
  uint64_t max_vertices = 200000;

  CLI::App* build = app.add_subcommand("build", "construct and serialize per-robot roadmaps");
  build_flags.attach(build, false);
  build->add_option("--output", build_flags.output, "output directory (default: .)");

  CLI::App* plan = app.add_subcommand("plan", "run one planner and print the path and cost");
  plan_flags.attach(plan, true);
  plan->add_option("--planner", planner, "drrt_star | drrt | implicit_astar | composite_rrt_star")
      ->required();
  plan->add_option("--output", plan_flags.output, "also write the result as JSON");

  CLI::App* bench = app.add_subcommand("bench", "run every (seed, planner) pair and emit CSV");
  bench_flags.attach(bench, true);
  bench->add_option("--output", bench_flags.output, "CSV path (default: <name>.csv)");

  CLI::App* verify = app.add_subcommand("verify", "explicit-graph verification on a small instance");
  verify_flags.attach(verify, false);
  verify->add_option("--max-vertices", max_vertices, "explicit tensor graph size guard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (build->parsed()) return run_build(build_flags);
    if (plan->parsed()) return run_plan(plan_flags, planner);
    if (bench->parsed()) return run_bench(bench_flags);
    if (verify->parsed()) return run_verify(verify_flags, max_vertices);
  } catch (const ScenarioParseError& e) {
    diagnostic("parse_error", e.what());
    return 2;
  } catch (const ScenarioInvariantError& e) {
    diagnostic("invariant_violation", e.what());
    return 2;
  } catch (const std::exception& e) {
    diagnostic("error", e.what());
    return 2;
  }
  return 0;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("mrmp");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mrmp
