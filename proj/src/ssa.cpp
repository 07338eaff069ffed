#include "greensplit/ssa.hpp"

#include <cmath>
#include <limits>

namespace greensplit {

ShiftedGramianCost::ShiftedGramianCost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0)
    : solver_(a), ctc_(c.transpose() * c), x0_(x0) {
  if (c.cols() != a.rows()) throw DimensionError("output map has the wrong width");
  if (x0.size() != a.rows()) throw DimensionError("initial state has the wrong length");
  const Eigen::MatrixXd outer = x0 * x0.transpose();
  rhs_ = solver_.to_schur_basis(outer);
  weight_ = solver_.to_schur_basis(ctc_);
}

double ShiftedGramianCost::operator()(double shift) const {
  if (!(shift > abscissa())) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXcd y = solver_.solve_transformed(rhs_, shift);
  // trace(C^T C P) = trace(U^H C^T C U Y)
  return (weight_.transpose().cwiseProduct(y)).sum().real();
}

Eigen::MatrixXd ShiftedGramianCost::controllability(double shift) const {
  return solver_.back_transform(solver_.solve_transformed(rhs_, shift));
}

Eigen::MatrixXd ShiftedGramianCost::observability(double shift) const {
  return solver_.back_transform(solver_.solve_adjoint_transformed(weight_, shift));
}

double ShiftedGramianCost::root(double epsilon, const SsaOptions& options) const {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw ValidationError("smoothing parameter epsilon must be positive");
  const double target = 1.0 / epsilon;
  const double alpha = abscissa();
  const double scale = 1.0 + std::abs(alpha);

  double delta = 1e-6 * scale;
  double lo = alpha + delta;
  double g_lo = (*this)(lo);
  // Upper bound on g near the abscissa if the system is merely poorly excited;
  // anything this small means x0 never reaches the output.
  const double negligible = 1e-14 * x0_.squaredNorm() * std::max(1.0, ctc_.diagonal().sum()) / delta;
  if (g_lo <= negligible) {
    throw DegenerateSystem("initial state is not observable through the output map (g vanishes)");
  }
  for (int k = 0; k < 8 && g_lo <= target; ++k) {
    delta *= 1e-2;
    lo = alpha + delta;
    g_lo = (*this)(lo);
  }
  if (g_lo <= target) {
    throw NoConvergence("smoothed abscissa root lies at the spectral abscissa; epsilon too small for this x0");
  }

  double step = scale;
  double hi = lo + step;
  int expansions = 0;
  while ((*this)(hi) > target) {
    if (++expansions > options.max_expansions) throw NoConvergence("bracket expansion for the smoothed abscissa failed");
    step *= 2.0;
    hi = lo + step;
  }

  for (int it = 0; it < options.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= options.root_tolerance * (1.0 + std::abs(mid)) || mid <= lo || mid >= hi) break;
    if ((*this)(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SsaResult smoothed_abscissa(const Eigen::MatrixXd& a_av, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                            double epsilon, const SsaOptions& options) {
  if (x0.size() == 0 || x0.isZero(0.0)) throw DegenerateSystem("initial state is zero");
  const ShiftedGramianCost cost(a_av, c, x0);
  SsaResult out;
  out.epsilon = epsilon;
  out.abscissa = cost.abscissa();
  out.alpha_tilde = cost.root(epsilon, options);
  out.p = cost.controllability(out.alpha_tilde);
  out.q = cost.observability(out.alpha_tilde);
  return out;
}

Eigen::VectorXd ssa_gradient(SsaResult& result, const ModeSet& modes) {
  const Eigen::MatrixXd qp = result.q * result.p;
  const double tr = qp.trace();
  if (!(tr > 1e-14 * result.q.norm() * result.p.norm()) || !std::isfinite(tr)) {
    throw ZeroTrace("trace(QP) vanishes; the smoothed abscissa gradient is undefined");
  }
  Eigen::VectorXd grad(modes.mode_count());
  for (int i = 0; i < modes.mode_count(); ++i) {
    grad[i] = modes.modes[static_cast<std::size_t>(i)].cwiseProduct(qp).sum() / (modes.cycle_time * tr);
  }
  result.grad_d = grad;
  return grad;
}

Eigen::VectorXd ssa_gradient(const Eigen::MatrixXd& a_av, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                             double epsilon, const ModeSet& modes, const SsaOptions& options) {
  SsaResult r = smoothed_abscissa(a_av, c, x0, epsilon, options);
  return ssa_gradient(r, modes);
}

}  // namespace greensplit
