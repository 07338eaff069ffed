#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "greensplit/distributed.hpp"
#include "greensplit/optimizer.hpp"
#include "greensplit/sim.hpp"

namespace greensplit {

/// Provenance written as the first line of every artifact.
struct ArtifactHeader {
  std::string version = GREENSPLIT_VERSION;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string command;
};

void write_header(std::ostream& os, const ArtifactHeader& header);

/// iter,alpha_tilde,kkt_norm,cost
void write_optimization_csv(std::ostream& os, const ArtifactHeader& header,
                            const std::vector<IterationRecord>& trajectory);

/// round,agent,frobenius_error
void write_distributed_csv(std::ostream& os, const ArtifactHeader& header, const std::vector<RoundError>& trace);

/// Long format: series,t,value with series "x[k]" for states and "y[road]"
/// for outputs.
void write_trajectory_csv(std::ostream& os, const ArtifactHeader& header, const Trajectory& traj,
                          const std::vector<std::string>& road_ids);

struct CycleError {
  double cycle_time = 0.0;
  double error_percent = 0.0;
};

/// cycle_time,error_percent
void write_averaging_csv(std::ostream& os, const ArtifactHeader& header, const std::vector<CycleError>& rows);

/// Shortest round-trip representation of a double.
std::string format_number(double v);

}  // namespace greensplit
