#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace greensplit {

struct RunConfig {
  std::string command;   // build | modes | simulate | compare-averaging | optimize | distributed
  std::string scenario;  // path, bundled name or grid_RxC
  std::string x0 = "ones";
  std::string out;
  std::string plot;      // optional plot-data CSV (optimize)
  std::string mode = "switching";
  std::string agents = "3x3";
  std::vector<double> cycles{30, 60, 100, 120};
  double mu = 0.8;
  double xi = 0.05;
  double horizon = 600;
  double dt = 1;
  int rounds = 10;
  int starts = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  bool validate = false;
  std::string export_path;  // build: canonical scenario output
};

/// Directory searched for bundled scenario names.
std::filesystem::path bundled_scenario_dir();

/// Executes one command. Returns the process exit code; errors are reported
/// on `err` as a single "error: class=<Class> message=<text>" line.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (subcommands and options) and runs the command.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

/// GREENSPLIT_THREADS, clamped to at least 1; 1 when unset.
int thread_limit();

}  // namespace greensplit
