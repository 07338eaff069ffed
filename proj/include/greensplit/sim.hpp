#pragma once

#include <vector>

#include <Eigen/Dense>

#include "greensplit/dynamics.hpp"
#include "greensplit/network.hpp"

namespace greensplit {

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> outputs;

  std::size_t size() const { return times.size(); }
};

struct ErrorReport {
  double horizon = 0.0;
  double error_percent = 0.0;  // (100 / H) * int |x - x_av| / |x_av| dt
  int samples_used = 0;
  int samples_excluded = 0;
};

/// Same modes with different durations; windows are rebuilt in mode order.
ModeSet with_durations(ModeSet ms, const Eigen::VectorXd& durations);

/// Event grid on [0, horizon]: multiples of dt, every switching instant
/// k T + tau_i and every inflow breakpoint, sorted and deduplicated.
std::vector<double> event_grid(const ModeSet& ms, const NetworkSpec& spec, double horizon, double dt);

/// Piecewise-LTI propagation of x' = A_{sigma(t)} x + B u(t) using the exact
/// matrix exponential on each window where mode and inflow are constant.
Trajectory simulate_switching(const ModeSet& ms, const NetworkSpec& spec, const Eigen::VectorXd& x0, double horizon,
                              double dt);

/// Exact propagation of x' = A_av x + B u_av sampled at `times`.
Trajectory simulate_average(const AveragedSystem& sys, const Eigen::VectorXd& x0, const std::vector<double>& times);
Trajectory simulate_average(const AveragedSystem& sys, const Eigen::VectorXd& x0, double horizon, double dt);

/// Relative deviation between switching and averaged trajectories on the
/// shared event grid. Samples where |x_av| < 1e-6 |x0| are left out.
ErrorReport averaging_error(const ModeSet& ms, const AveragedSystem& sys, const NetworkSpec& spec,
                            const Eigen::VectorXd& x0, double horizon, double dt);

/// Trapezoid estimate of int |y|^2 dt along a trajectory.
double output_energy(const Trajectory& traj);

/// Same network and splits with a different cycle time: phase durations and
/// inflow breakpoints are rescaled proportionally.
NetworkSpec rescale_cycle(const NetworkSpec& spec, double cycle_time);

}  // namespace greensplit
