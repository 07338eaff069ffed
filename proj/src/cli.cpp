#include "greensplit/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "greensplit/distributed.hpp"
#include "greensplit/dynamics.hpp"
#include "greensplit/errors.hpp"
#include "greensplit/optimizer.hpp"
#include "greensplit/plotdata.hpp"
#include "greensplit/scenario_io.hpp"
#include "greensplit/sim.hpp"

#ifndef GREENSPLIT_SCENARIO_DIR
#define GREENSPLIT_SCENARIO_DIR ""
#endif

namespace greensplit {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void require_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be positive");
}

// Writes via a callback to a file, or to stdout when the path is empty or "-".
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write " + path);
  body(file);
  if (!file) throw ValidationError("failed writing " + path);
}

std::string config_hash(const RunConfig& cfg, const NetworkSpec& spec) {
  Json j;
  j["command"] = cfg.command;
  j["scenario"] = to_json(spec);
  j["x0"] = cfg.x0;
  j["mode"] = cfg.mode;
  j["agents"] = cfg.agents;
  j["cycles"] = cfg.cycles;
  j["mu"] = cfg.mu;
  j["xi"] = cfg.xi;
  j["horizon"] = cfg.horizon;
  j["dt"] = cfg.dt;
  j["rounds"] = cfg.rounds;
  j["starts"] = cfg.starts;
  j["seed"] = cfg.seed;
  return fnv1a_hex(j.dump());
}

ArtifactHeader header_for(const RunConfig& cfg, const NetworkSpec& spec) {
  ArtifactHeader h;
  h.seed = cfg.seed;
  h.config_hash = config_hash(cfg, spec);
  h.command = cfg.command;
  return h;
}

Json header_json(const ArtifactHeader& h) {
  return {{"version", h.version}, {"seed", h.seed}, {"config_hash", h.config_hash}, {"command", h.command}};
}

CommGraph parse_layout(const std::string& layout) {
  static const std::regex grid(R"((\d+)x(\d+))");
  static const std::regex named(R"((path|complete):(\d+))");
  std::smatch m;
  if (std::regex_match(layout, m, grid)) return CommGraph::grid(std::stoi(m[1].str()), std::stoi(m[2].str()));
  if (std::regex_match(layout, m, named)) {
    const int n = std::stoi(m[2].str());
    return m[1].str() == "path" ? CommGraph::path(n) : CommGraph::complete(n);
  }
  throw ValidationError("agent layout must be RxC, path:N or complete:N");
}

int cmd_build(const RunConfig& cfg, const NetworkSpec& spec, std::ostream& out) {
  const Schedule sched = scenario_schedule(spec);
  out << "scenario " << (spec.name.empty() ? cfg.scenario : spec.name) << ": " << spec.roads.size() << " roads, "
      << spec.intersections.size() << " intersections, " << spec.state_dim << " states, " << sched.mode_count()
      << " modes, T=" << format_number(spec.cycle_time) << (cfg.validate ? " (valid)" : "") << '\n';
  if (!cfg.export_path.empty()) {
    emit(cfg.export_path, out, [&](std::ostream& os) { os << to_json(spec).dump(2) << '\n'; });
  }
  return 0;
}

int cmd_modes(const RunConfig& cfg, const NetworkSpec& spec, std::ostream& out) {
  const ModeSet ms = assemble_modes(spec, scenario_schedule(spec));
  Json doc = modes_to_json(ms);
  doc["header"] = header_json(header_for(cfg, spec));
  doc["road_ids"] = Json::array();
  for (const auto& r : spec.roads) doc["road_ids"].push_back(r.id);
  emit(cfg.out, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  return 0;
}

std::vector<std::string> road_ids(const NetworkSpec& spec) {
  std::vector<std::string> ids;
  for (const auto& r : spec.roads) ids.push_back(r.id);
  return ids;
}

int cmd_simulate(const RunConfig& cfg, const NetworkSpec& spec, std::ostream& out) {
  require_positive(cfg.horizon, "--horizon");
  require_positive(cfg.dt, "--dt");
  const ModeSet ms = assemble_modes(spec, scenario_schedule(spec));
  const Eigen::VectorXd x0 = load_state(cfg.x0, spec);
  Trajectory traj;
  if (cfg.mode == "switching") {
    traj = simulate_switching(ms, spec, x0, cfg.horizon, cfg.dt);
  } else if (cfg.mode == "average") {
    traj = simulate_average(average_system(ms, spec), x0, cfg.horizon, cfg.dt);
  } else {
    throw ValidationError("--mode must be switching or average");
  }
  emit(cfg.out, out, [&](std::ostream& os) { write_trajectory_csv(os, header_for(cfg, spec), traj, road_ids(spec)); });
  return 0;
}

int cmd_compare(const RunConfig& cfg, const NetworkSpec& spec, std::ostream& out) {
  require_positive(cfg.horizon, "--horizon");
  require_positive(cfg.dt, "--dt");
  if (cfg.cycles.empty()) throw ValidationError("--cycles needs at least one value");
  const Eigen::VectorXd x0 = load_state(cfg.x0, spec);
  std::vector<CycleError> rows;
  for (double t : cfg.cycles) {
    require_positive(t, "--cycles");
    const NetworkSpec scaled = rescale_cycle(spec, t);
    const ModeSet ms = assemble_modes(scaled, scenario_schedule(scaled));
    const ErrorReport rep = averaging_error(ms, average_system(ms, scaled), scaled, x0, cfg.horizon, cfg.dt);
    rows.push_back({t, rep.error_percent});
  }
  emit(cfg.out, out, [&](std::ostream& os) { write_averaging_csv(os, header_for(cfg, spec), rows); });
  return 0;
}

int cmd_optimize(const RunConfig& cfg, const NetworkSpec& spec, std::ostream& out) {
  require_positive(cfg.xi, "--xi");
  if (!(cfg.mu > 0 && cfg.mu < 1)) throw ValidationError("--mu must lie in (0,1)");
  if (cfg.starts < 1) throw ValidationError("--starts must be at least 1");
  const Schedule sched = scenario_schedule(spec);
  const ModeSet ms = assemble_modes(spec, sched);
  const Eigen::VectorXd x0 = load_state(cfg.x0, spec);

  OptimizerOptions opts;
  opts.mu = cfg.mu;
  opts.xi_fraction = cfg.xi;
  opts.starts = cfg.starts;
  opts.seed = cfg.seed;
  opts.threads = std::min(cfg.threads, thread_limit());
  const OptReport rep = optimize(ms, ms.output_map, x0, opts);
  const double start_cost = cost_at(ms, ms.output_map, x0, ms.durations);
  const double check = cost_at(ms, ms.output_map, x0, rep.d_star);

  const ArtifactHeader header = header_for(cfg, spec);
  Json doc;
  doc["header"] = header_json(header);
  doc["scenario"] = spec.name;
  doc["cycle_time"] = ms.cycle_time;
  doc["initial"] = {{"durations", to_std(ms.durations)}, {"cost", start_cost}};
  doc["optimized"] = {{"durations", to_std(rep.d_star)},
                      {"eps_star", rep.eps_star},
                      {"cost", rep.cost},
                      {"congestion_cost", check},
                      {"phase_splits", phase_splits(sched, to_std(rep.d_star))}};
  doc["best_start"] = rep.best_start;
  doc["starts"] = rep.starts_run;
  doc["trajectory"] = Json::array();
  for (const auto& r : rep.trajectory) {
    doc["trajectory"].push_back({{"start", r.start},
                                 {"outer", r.outer},
                                 {"inner", r.inner},
                                 {"eps_bar", r.eps_bar},
                                 {"alpha_tilde", r.alpha_tilde},
                                 {"kkt_norm", r.kkt_norm},
                                 {"cost", r.cost},
                                 {"d", to_std(r.d)}});
  }
  emit(cfg.out, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  if (!cfg.plot.empty()) {
    emit(cfg.plot, out, [&](std::ostream& os) { write_optimization_csv(os, header, rep.trajectory); });
  }
  return 0;
}

int cmd_distributed(const RunConfig& cfg, const NetworkSpec& spec, std::ostream& out) {
  if (cfg.rounds < 0) throw ValidationError("--rounds must be nonnegative");
  const CommGraph graph = parse_layout(cfg.agents);
  const ModeSet ms = assemble_modes(spec, scenario_schedule(spec));
  const Eigen::MatrixXd lambda = averaged_matrix(ms.modes, ms.durations);
  const Eigen::VectorXd x0 = load_state(cfg.x0, spec);
  // Contiguous blocks of state indices per agent (roads are declared in order).
  const int n = spec.state_dim;
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) assignment[static_cast<std::size_t>(k)] = static_cast<int>(static_cast<long>(k) * graph.size() / n);
  const DistributedResult res =
      run_distributed(lambda, x0 * x0.transpose(), graph, assignment, cfg.rounds, 1e-6, std::min(cfg.threads, thread_limit()));
  emit(cfg.out, out, [&](std::ostream& os) { write_distributed_csv(os, header_for(cfg, spec), res.trace); });
  return 0;
}

}  // namespace

std::filesystem::path bundled_scenario_dir() {
  if (const char* env = std::getenv("GREENSPLIT_SCENARIOS")) return env;
  return GREENSPLIT_SCENARIO_DIR;
}

int thread_limit() {
  const char* env = std::getenv("GREENSPLIT_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<int>(std::min(v, 1024L));
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const NetworkSpec spec = load_scenario(cfg.scenario, bundled_scenario_dir());
    if (cfg.command == "build") return cmd_build(cfg, spec, out);
    if (cfg.command == "modes") return cmd_modes(cfg, spec, out);
    if (cfg.command == "simulate") return cmd_simulate(cfg, spec, out);
    if (cfg.command == "compare-averaging") return cmd_compare(cfg, spec, out);
    if (cfg.command == "optimize") return cmd_optimize(cfg, spec, out);
    if (cfg.command == "distributed") return cmd_distributed(cfg, spec, out);
    throw ValidationError("unknown command '" + cfg.command + "'");
  } catch (const Error& e) {
    err << "error: class=" << e.error_class() << " message=" << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: class=InternalError message=" << e.what() << '\n';
    return 3;
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Green-split optimization for signalized traffic networks", "greensplit"};
  app.set_version_flag("--version", GREENSPLIT_VERSION);
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.threads = thread_limit();

  auto scenario = [&](CLI::App* sub) {
    sub->add_option("scenario", cfg.scenario, "Scenario file, bundled name or grid_RxC")->required();
  };
  auto state = [&](CLI::App* sub) { sub->add_option("--x0", cfg.x0, "Initial state: zeros, ones or a state file"); };
  auto output = [&](CLI::App* sub) { sub->add_option("--out,-o", cfg.out, "Output path (stdout when omitted)"); };
  auto seed = [&](CLI::App* sub) { sub->add_option("--seed", cfg.seed, "Random seed"); };

  auto* build = app.add_subcommand("build", "Validate a scenario and print a summary");
  scenario(build);
  build->add_flag("--validate", cfg.validate, "Only validate");
  build->add_option("--export", cfg.export_path, "Write the canonical scenario JSON");

  auto* modes = app.add_subcommand("modes", "Export the mode matrices as JSON");
  scenario(modes);
  output(modes);

  auto* simulate = app.add_subcommand("simulate", "Simulate the switching or averaged system");
  scenario(simulate);
  state(simulate);
  output(simulate);
  simulate->add_option("--mode", cfg.mode, "switching or average");
  simulate->add_option("--horizon", cfg.horizon, "Horizon (s)");
  simulate->add_option("--dt", cfg.dt, "Sampling step (s)");

  auto* compare = app.add_subcommand("compare-averaging", "Averaging error for several cycle times");
  scenario(compare);
  state(compare);
  output(compare);
  compare->add_option("--cycles", cfg.cycles, "Cycle times")->delimiter(',');
  compare->add_option("--horizon", cfg.horizon, "Horizon (s)");
  compare->add_option("--dt", cfg.dt, "Sampling step (s)");

  auto* optimize_cmd = app.add_subcommand("optimize", "Optimize the mode durations");
  scenario(optimize_cmd);
  state(optimize_cmd);
  output(optimize_cmd);
  seed(optimize_cmd);
  optimize_cmd->add_option("--mu", cfg.mu, "Step fraction in (0,1)");
  optimize_cmd->add_option("--xi", cfg.xi, "Initial epsilon increment (fraction of 1/J(d0))");
  optimize_cmd->add_option("--starts", cfg.starts, "Number of starting points");
  optimize_cmd->add_option("--plot", cfg.plot, "Write iteration plot data CSV");

  auto* dist = app.add_subcommand("distributed", "Distributed Lyapunov solve on an agent graph");
  scenario(dist);
  state(dist);
  output(dist);
  dist->add_option("--agents", cfg.agents, "Agent layout: RxC, path:N or complete:N");
  dist->add_option("--rounds", cfg.rounds, "Maximum rounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForVersion&) {
    out << GREENSPLIT_VERSION << '\n';
    return 0;
  } catch (const CLI::Success&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: class=ValidationError message=" << e.what() << '\n';
    return 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return run(cfg, out, err);
}

}  // namespace greensplit
