#include "greensplit/plotdata.hpp"

#include <charconv>
#include <cmath>

namespace greensplit {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_header(std::ostream& os, const ArtifactHeader& header) {
  os << "# greensplit version=" << header.version << " seed=" << header.seed << " config_hash=" << header.config_hash;
  if (!header.command.empty()) os << " command=" << header.command;
  os << '\n';
}

void write_optimization_csv(std::ostream& os, const ArtifactHeader& header,
                            const std::vector<IterationRecord>& trajectory) {
  write_header(os, header);
  os << "iter,alpha_tilde,kkt_norm,cost\n";
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto& r = trajectory[k];
    os << k << ',' << format_number(r.alpha_tilde) << ',' << format_number(r.kkt_norm) << ',' << format_number(r.cost)
       << '\n';
  }
}

void write_distributed_csv(std::ostream& os, const ArtifactHeader& header, const std::vector<RoundError>& trace) {
  write_header(os, header);
  os << "round,agent,frobenius_error\n";
  for (const auto& e : trace) os << e.round << ',' << e.agent << ',' << format_number(e.frobenius_error) << '\n';
}

void write_trajectory_csv(std::ostream& os, const ArtifactHeader& header, const Trajectory& traj,
                          const std::vector<std::string>& road_ids) {
  write_header(os, header);
  os << "series,t,value\n";
  if (traj.size() == 0) return;
  const auto n = traj.states.front().size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
      os << "x[" << i << "]," << format_number(traj.times[k]) << ',' << format_number(traj.states[k][i]) << '\n';
    }
  }
  for (std::size_t r = 0; r < road_ids.size(); ++r) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
      os << "y[" << road_ids[r] << "]," << format_number(traj.times[k]) << ','
         << format_number(traj.outputs[k][static_cast<Eigen::Index>(r)]) << '\n';
    }
  }
}

void write_averaging_csv(std::ostream& os, const ArtifactHeader& header, const std::vector<CycleError>& rows) {
  write_header(os, header);
  os << "cycle_time,error_percent\n";
  for (const auto& r : rows) os << format_number(r.cycle_time) << ',' << format_number(r.error_percent) << '\n';
}

}  // namespace greensplit
