#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "greensplit/network.hpp"

namespace greensplit {

using Pattern = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Constant system matrices of the switching model, one per network mode.
struct ModeSet {
  std::vector<Eigen::MatrixXd> modes;
  Eigen::VectorXd durations;
  double cycle_time = 0.0;
  Eigen::MatrixXd input_map;                       // B, n x n_r
  Eigen::MatrixXd output_map;                      // C_av, n_r x n
  std::vector<std::pair<double, double>> windows;  // [tau_{i-1}, tau_i)
  std::vector<std::vector<int>> active_phase;      // [mode][intersection]
  Pattern pattern;                                 // union of the modes' nonzeros

  int state_dim() const { return static_cast<int>(input_map.rows()); }
  int mode_count() const { return static_cast<int>(modes.size()); }
};

struct AveragedSystem {
  Eigen::MatrixXd a;       // A_av
  Eigen::MatrixXd b;       // n x n_r
  Eigen::MatrixXd c;       // n_r x n
  Eigen::VectorXd u;       // period-averaged inflow, length n_r
};

/// System matrix for one combination of active phases (one entry per
/// intersection).
Eigen::MatrixXd mode_matrix(const NetworkSpec& spec, const std::vector<int>& active_phase);

ModeSet assemble_modes(const NetworkSpec& spec, const Schedule& schedule);

/// (1/T) * sum_i d_i A_i with an explicit normalization T. This is the map
/// the gradient differentiates; it is linear in d.
Eigen::MatrixXd averaged_matrix(const std::vector<Eigen::MatrixXd>& modes, const Eigen::VectorXd& durations,
                                double cycle_time);

/// Averaged matrix normalized by sum(d), hence invariant under positive
/// rescaling of d.
Eigen::MatrixXd averaged_matrix(const std::vector<Eigen::MatrixXd>& modes, const Eigen::VectorXd& durations);

AveragedSystem average_system(const ModeSet& ms, const NetworkSpec& spec);
AveragedSystem average_system(const ModeSet& ms, const NetworkSpec& spec, const Eigen::VectorXd& durations);

/// Selector of every road's downstream cell (queue lengths).
Eigen::MatrixXd output_map(const NetworkSpec& spec);

/// Exogenous inflows enter the first cell of their road.
Eigen::MatrixXd input_map(const NetworkSpec& spec);

Eigen::VectorXd inflow_at(const NetworkSpec& spec, double t);
Eigen::VectorXd average_inflow(const NetworkSpec& spec);

inline Pattern sparsity(const Eigen::MatrixXd& a) { return a.array() != 0.0; }

}  // namespace greensplit
