#include "greensplit/dynamics.hpp"

#include "greensplit/errors.hpp"

namespace greensplit {

namespace {

int checked_index(int idx, int n, const char* what) {
  if (idx < 0 || idx >= n) throw DimensionError(std::string("block index out of range: ") + what);
  return idx;
}

}  // namespace

Eigen::MatrixXd mode_matrix(const NetworkSpec& spec, const std::vector<int>& active_phase) {
  const int n = spec.state_dim;
  if (n <= 0 || spec.first_cell.size() != spec.roads.size()) throw DimensionError("network has not been validated");
  if (active_phase.size() != spec.intersections.size()) throw DimensionError("one active phase per intersection");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < spec.roads.size(); ++i) {
    const auto& road = spec.roads[i];
    const double rate = road.free_flow_speed / spec.step;
    const int first = spec.first_cell[i];
    const int sigma = road.cell_count;
    // Cell chain: every cell but the last drains into its successor at gamma/h.
    for (int k = 0; k + 1 < sigma; ++k) {
      a(first + k, first + k) -= rate;
      a(first + k + 1, first + k) += rate;
    }
    a(first + sigma - 1, first + sigma - 1) -= road.exit_rate;
  }

  for (std::size_t j = 0; j < spec.intersections.size(); ++j) {
    const auto& inter = spec.intersections[j];
    const int p = checked_index(active_phase[j], static_cast<int>(inter.phases.size()), "phase");
    for (int m : inter.phases[p]) {
      const auto& mv = inter.movements[checked_index(m, static_cast<int>(inter.movements.size()), "movement")];
      const int from = checked_index(spec.road_index(mv.from_road), static_cast<int>(spec.roads.size()), "road");
      const int to = checked_index(spec.road_index(mv.to_road), static_cast<int>(spec.roads.size()), "road");
      const int src = spec.last_cell(from);
      const int dst = spec.first_cell[to];
      a(dst, src) += mv.rate();
      a(src, src) -= mv.rate();
    }
  }
  return a;
}

ModeSet assemble_modes(const NetworkSpec& spec, const Schedule& schedule) {
  if (schedule.active_phase.size() != schedule.mode_durations.size()) {
    throw DimensionError("schedule modes and durations disagree");
  }
  ModeSet ms;
  ms.cycle_time = schedule.cycle_time;
  ms.input_map = input_map(spec);
  ms.output_map = output_map(spec);
  ms.durations = Eigen::Map<const Eigen::VectorXd>(schedule.mode_durations.data(),
                                                   static_cast<Eigen::Index>(schedule.mode_durations.size()));
  ms.active_phase = schedule.active_phase;
  ms.pattern = Pattern::Constant(spec.state_dim, spec.state_dim, false);
  double start = 0.0;
  for (std::size_t k = 0; k < schedule.mode_durations.size(); ++k) {
    ms.modes.push_back(mode_matrix(spec, schedule.active_phase[k]));
    ms.pattern = ms.pattern || sparsity(ms.modes.back());
    ms.windows.emplace_back(start, schedule.boundaries[k]);
    start = schedule.boundaries[k];
  }
  return ms;
}

Eigen::MatrixXd averaged_matrix(const std::vector<Eigen::MatrixXd>& modes, const Eigen::VectorXd& durations,
                                double cycle_time) {
  if (modes.empty() || static_cast<Eigen::Index>(modes.size()) != durations.size()) {
    throw DimensionError("one duration per mode required");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(modes.front().rows(), modes.front().cols());
  for (std::size_t k = 0; k < modes.size(); ++k) a += durations[static_cast<Eigen::Index>(k)] * modes[k];
  return a / cycle_time;
}

Eigen::MatrixXd averaged_matrix(const std::vector<Eigen::MatrixXd>& modes, const Eigen::VectorXd& durations) {
  return averaged_matrix(modes, durations, durations.sum());
}

AveragedSystem average_system(const ModeSet& ms, const NetworkSpec& spec, const Eigen::VectorXd& durations) {
  AveragedSystem sys;
  sys.a = averaged_matrix(ms.modes, durations);
  sys.b = ms.input_map;
  sys.c = ms.output_map;
  sys.u = average_inflow(spec);
  return sys;
}

AveragedSystem average_system(const ModeSet& ms, const NetworkSpec& spec) {
  return average_system(ms, spec, ms.durations);
}

Eigen::MatrixXd output_map(const NetworkSpec& spec) {
  const auto nr = static_cast<Eigen::Index>(spec.roads.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nr, spec.state_dim);
  for (Eigen::Index i = 0; i < nr; ++i) c(i, spec.last_cell(static_cast<int>(i))) = 1.0;
  return c;
}

Eigen::MatrixXd input_map(const NetworkSpec& spec) {
  const auto nr = static_cast<Eigen::Index>(spec.roads.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(spec.state_dim, nr);
  for (Eigen::Index i = 0; i < nr; ++i) b(spec.first_cell[i], i) = 1.0;
  return b;
}

Eigen::VectorXd inflow_at(const NetworkSpec& spec, double t) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(spec.roads.size()));
  for (std::size_t i = 0; i < spec.roads.size(); ++i) {
    u[static_cast<Eigen::Index>(i)] = spec.roads[i].inflow.rate_at(t, spec.cycle_time);
  }
  return u;
}

Eigen::VectorXd average_inflow(const NetworkSpec& spec) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(spec.roads.size()));
  for (std::size_t i = 0; i < spec.roads.size(); ++i) {
    u[static_cast<Eigen::Index>(i)] = spec.roads[i].inflow.average(spec.cycle_time);
  }
  return u;
}

}  // namespace greensplit
