#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace greensplit {

/// One piece of a periodic, piecewise-constant exogenous inflow. The rate
/// holds from `start` (seconds into the cycle) until the next segment.
struct InflowSegment {
  double start = 0.0;
  double rate = 0.0;
  bool operator==(const InflowSegment&) const = default;
};

/// Periodic inflow profile of a source road. An empty profile is zero inflow.
struct InflowProfile {
  std::vector<InflowSegment> segments;

  double rate_at(double t, double cycle_time) const;
  /// Time average over one cycle.
  double average(double cycle_time) const;
  bool is_zero() const;
  bool operator==(const InflowProfile&) const = default;
};

struct Road {
  std::string id;
  double length = 0.0;
  double free_flow_speed = 0.0;
  int cell_count = 0;  // filled in by validation: ceil(length / h)
  bool is_source = false;
  bool is_destination = false;
  double exit_rate = 0.0;
  InflowProfile inflow;

  bool operator==(const Road&) const = default;
};

/// Flow from `from_road` into `to_road` across one intersection.
/// The transmission rate is routing_ratio * saturation_rate.
struct Movement {
  std::string from_road;
  std::string to_road;
  double routing_ratio = 1.0;
  double saturation_rate = 0.0;

  double rate() const { return routing_ratio * saturation_rate; }
  bool operator==(const Movement&) const = default;
};

struct Intersection {
  std::string id;
  std::vector<Movement> movements;
  /// Phases in cycle order; each entry holds indices into `movements`.
  std::vector<std::vector<int>> phases;

  bool operator==(const Intersection&) const = default;
};

struct NetworkSpec {
  std::string name;
  double step = 1.0;  // discretization step h
  double cycle_time = 100.0;
  bool allow_phase_overlap = false;
  bool enforce_conservation = true;
  std::vector<Road> roads;
  std::vector<Intersection> intersections;
  /// Optional per-intersection phase durations from the scenario; empty
  /// means "use the uniform split".
  std::vector<std::vector<double>> phase_durations;

  // Derived by validate_network().
  std::vector<int> first_cell;  // state index of cell 1 of each road
  int state_dim = 0;

  int road_index(const std::string& id) const;  // -1 when absent
  int last_cell(int road) const { return first_cell[road] + roads[road].cell_count - 1; }
  std::size_t road_count() const { return roads.size(); }

  bool operator==(const NetworkSpec&) const = default;
};

/// Checks every structural invariant, fills the derived fields and returns
/// the validated network. Throws ValidationError naming the violated rule.
NetworkSpec validate_network(NetworkSpec spec);

/// Indices of roads with no directed path (through movements) to a
/// destination road.
std::vector<int> unreachable_roads(const NetworkSpec& spec);

/// Global periodic schedule: per-intersection phase durations together with
/// the network modes they induce.
struct Schedule {
  double cycle_time = 0.0;
  std::vector<std::vector<double>> phase_durations;  // [intersection][phase]

  // Derived.
  std::vector<double> boundaries;                 // tau_1 < ... < tau_m = T
  std::vector<double> mode_durations;             // d_i = tau_i - tau_{i-1}
  std::vector<std::vector<int>> active_phase;     // [mode][intersection]

  std::size_t mode_count() const { return mode_durations.size(); }
};

/// Builds the schedule for the given per-intersection phase durations. Each
/// intersection's durations must be nonnegative and sum to the cycle time
/// (they are renormalized to sum to it exactly).
Schedule make_schedule(const NetworkSpec& spec, std::vector<std::vector<double>> phase_durations);

/// Equal green time for every phase of every intersection.
Schedule uniform_schedule(const NetworkSpec& spec);

/// The scenario's own schedule when it declares one, otherwise uniform.
Schedule scenario_schedule(const NetworkSpec& spec);

/// Green split function: true when `phase` of `intersection` holds the right
/// of way at time t (periodic in the cycle time).
bool is_green(const Schedule& schedule, int intersection, int phase, double t);

/// Sum of mode durations during which each phase is active, i.e. the phase
/// splits implied by a vector of mode durations.
std::vector<std::vector<double>> phase_splits(const Schedule& schedule, const std::vector<double>& mode_durations);

struct GridParams {
  double road_length = 200.0;
  double step = 100.0;
  double free_flow_speed = 10.0;
  double through_ratio = 0.6;
  double left_ratio = 0.2;
  double right_ratio = 0.2;
  double saturation_rate = 0.5;
  double exit_rate = 0.5;
  double inflow = 0.0;
  double cycle_time = 100.0;
};

/// Manhattan-style grid of rows x cols signalized intersections. Every
/// corridor carries two one-way roads; boundary approaches are sources and
/// boundary exits are destinations. Each intersection gets the classic four
/// phases: north-south through/right, north-south left, east-west
/// through/right, east-west left.
NetworkSpec generate_grid(int rows, int cols, const GridParams& params = {});

}  // namespace greensplit
