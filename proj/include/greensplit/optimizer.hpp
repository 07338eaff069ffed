#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "greensplit/dynamics.hpp"
#include "greensplit/ssa.hpp"

namespace greensplit {

struct OptimizerOptions {
  /// Fraction of the Gauss-Newton step toward alpha_tilde = 0 taken per
  /// inner iteration; must lie in (0, 1).
  double mu = 0.8;
  /// Initial epsilon increment as a fraction of epsilon_0 = 1 / J(d0).
  double xi_fraction = 0.05;
  /// The line search stops once the increment drops below this fraction.
  double xi_min_fraction = 1e-4;
  /// Largest per-iteration change of any duration, as a fraction of T.
  double step_cap_fraction = 0.1;
  /// Stationarity threshold on T * |projected d(alpha_tilde)/dd|_inf.
  double kkt_tolerance = 1e-6;
  int max_inner_iterations = 5000;
  int max_backtracks = 30;
  int starts = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  SsaOptions ssa;
};

struct IterationRecord {
  int start = 0;
  int outer = 0;
  int inner = 0;
  double eps_bar = 0.0;      // smoothing parameter being tested
  double alpha_tilde = 0.0;
  double kkt_norm = 0.0;     // |P grad|_inf with grad = alpha_tilde * d(alpha_tilde)/dd
  double cost = 0.0;         // 1 / (last accepted epsilon)
  Eigen::VectorXd d;
};

struct InnerResult {
  Eigen::VectorXd d;
  double alpha_tilde = 0.0;
  bool converged = false;  // achieved or stationary
  bool achieved = false;   // |alpha_tilde| <= tol_alpha
  int iterations = 0;
  double kkt_norm = 0.0;
};

struct OptReport {
  Eigen::VectorXd d_star;
  double eps_star = 0.0;
  double cost = 0.0;        // 1 / eps_star
  double start_cost = 0.0;  // J at the starting point of the winning start
  int best_start = 0;
  int starts_run = 0;
  std::vector<IterationRecord> trajectory;
};

/// Tolerance on |alpha_tilde| for a smoothing parameter to count as achieved.
double alpha_tolerance(double abscissa);

/// Euclidean projection of the gradient onto the tangent cone of the simplex
/// {sum d = T, d >= 0} (sign flipped): sum(v) = 0 and v_i <= 0 wherever
/// d_i = 0, so the step d - mu v stays feasible; v = 0 iff the KKT
/// conditions hold.
Eigen::VectorXd project_tangent(const Eigen::VectorXd& grad, const Eigen::VectorXd& d);

/// True when sum(d) = T within 1e-9 T and every entry is nonnegative.
bool on_simplex(const Eigen::VectorXd& d, double cycle_time, double tol = 1e-9);

/// Minimizes |alpha_tilde(eps_bar, A_av(d))| over the simplex from start_d.
InnerResult inner_descent(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0, double eps_bar,
                          const Eigen::VectorXd& start_d, const OptimizerOptions& options = {},
                          std::vector<IterationRecord>* trace = nullptr);

/// Two-stage optimization from a single starting point (warm start).
OptReport optimize_from(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                        const Eigen::VectorXd& start_d, const OptimizerOptions& options = {});

/// Multi-start optimization. Start 0 is the mode set's own durations; the
/// others are drawn uniformly from the simplex with the configured seed.
/// Returns the lowest-cost result (ties go to the lower start index).
OptReport optimize(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                   const OptimizerOptions& options = {});

/// Congestion cost J(d) of the averaged system at durations d.
double cost_at(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0, const Eigen::VectorXd& d);

/// Starting points used by optimize(), deterministic in the seed.
std::vector<Eigen::VectorXd> start_points(const ModeSet& ms, int starts, std::uint64_t seed);

}  // namespace greensplit
