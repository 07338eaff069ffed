#pragma once

#include <Eigen/Dense>

#include "greensplit/dynamics.hpp"
#include "greensplit/lyapunov.hpp"

namespace greensplit {

struct SsaOptions {
  /// Bisection stops once the bracket is below root_tolerance * (1 + |root|).
  double root_tolerance = 1e-10;
  int max_expansions = 200;
  int max_bisections = 400;
};

struct SsaResult {
  double alpha_tilde = 0.0;
  double epsilon = 0.0;
  double abscissa = 0.0;  // alpha(A_av)
  Eigen::MatrixXd p;      // controllability solution of the shifted pair
  Eigen::MatrixXd q;      // observability solution of the shifted pair
  Eigen::VectorXd grad_d; // d(alpha_tilde)/dd, filled by ssa_gradient
};

/// g(s) = trace(C W(A - sI, x0) C^T) for shifts s above the spectral
/// abscissa, evaluated from one Schur decomposition of A.
class ShiftedGramianCost {
 public:
  ShiftedGramianCost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0);

  double abscissa() const { return solver_.abscissa(); }
  /// +inf for shifts at or below the spectral abscissa.
  double operator()(double shift) const;

  /// P with (A - sI) P + P (A - sI)^T + x0 x0^T = 0.
  Eigen::MatrixXd controllability(double shift) const;
  /// Q with (A - sI)^T Q + Q (A - sI) + C^T C = 0.
  Eigen::MatrixXd observability(double shift) const;

  /// Root of g(s) = 1/epsilon by bracketed bisection.
  double root(double epsilon, const SsaOptions& options = {}) const;

 private:
  ShiftedLyapunov<double> solver_;
  Eigen::MatrixXcd rhs_;     // U^H x0 x0^T U
  Eigen::MatrixXcd weight_;  // U^H C^T C U
  Eigen::MatrixXd ctc_;
  Eigen::VectorXd x0_;
};

/// Smoothed spectral abscissa of (A, C, x0) at smoothing epsilon, together
/// with the Lyapunov pair (P, Q) at the root.
SsaResult smoothed_abscissa(const Eigen::MatrixXd& a_av, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                            double epsilon, const SsaOptions& options = {});

/// Gradient of the smoothed abscissa with respect to the mode durations:
/// component i is <A_i / T, QP> / trace(QP). Also stores it in result.grad_d.
Eigen::VectorXd ssa_gradient(SsaResult& result, const ModeSet& modes);

Eigen::VectorXd ssa_gradient(const Eigen::MatrixXd& a_av, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                             double epsilon, const ModeSet& modes, const SsaOptions& options = {});

}  // namespace greensplit
