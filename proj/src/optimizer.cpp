#include "greensplit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <thread>

#include "greensplit/errors.hpp"

namespace greensplit {

namespace {

struct Evaluation {
  SsaResult ssa;
  double cost = std::numeric_limits<double>::infinity();  // J(d) = g(0)
};

Evaluation evaluate(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0, double eps,
                    const Eigen::VectorXd& d, const SsaOptions& options) {
  const Eigen::MatrixXd a = averaged_matrix(ms.modes, d, ms.cycle_time);
  const ShiftedGramianCost g(a, c, x0);
  Evaluation ev;
  ev.ssa.epsilon = eps;
  ev.ssa.abscissa = g.abscissa();
  ev.ssa.alpha_tilde = g.root(eps, options);
  ev.ssa.p = g.controllability(ev.ssa.alpha_tilde);
  ev.ssa.q = g.observability(ev.ssa.alpha_tilde);
  ev.cost = g(0.0);
  return ev;
}

// Clamps rounding-level negatives and restores sum(d) = T exactly enough.
Eigen::VectorXd normalize_simplex(Eigen::VectorXd d, double cycle_time) {
  for (auto& v : d) {
    if (v < 0) v = 0;
  }
  Eigen::Index top = 0;
  d.maxCoeff(&top);
  d[top] += cycle_time - d.sum();
  if (d[top] < 0) d[top] = 0;
  return d;
}

double unit_uniform(std::mt19937_64& gen) {
  // 53 random bits in [0, 1), independent of the standard library's distributions.
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

double alpha_tolerance(double abscissa) { return 1e-8 * (1.0 + std::abs(abscissa)); }

Eigen::VectorXd project_tangent(const Eigen::VectorXd& grad, const Eigen::VectorXd& d) {
  const Eigen::Index m = grad.size();
  if (d.size() != m) throw DimensionError("gradient and durations differ in length");
  if (m == 0) return {};
  const double tol = 1e-12 * std::max(1.0, d.sum());

  // Projection onto {sum v = 0, v_i <= 0 where d_i = 0}:
  //   v_i = g_i - lambda (free),  v_i = min(g_i - lambda, 0) (active),
  // with lambda the root of the decreasing piecewise-linear sum.
  double total = 0.0;
  int count = 0;
  std::vector<double> bounded;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (d[i] <= tol) {
      bounded.push_back(grad[i]);
    } else {
      total += grad[i];
      ++count;
    }
  }
  std::sort(bounded.begin(), bounded.end());
  double lambda = bounded.empty() ? 0.0 : bounded.front();
  for (double g : bounded) {
    if (count > 0 && total / count <= g) break;
    total += g;
    ++count;
  }
  if (count > 0) lambda = total / count;

  Eigen::VectorXd v(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    v[i] = grad[i] - lambda;
    if (d[i] <= tol) v[i] = std::min(v[i], 0.0);
  }
  return v;
}

bool on_simplex(const Eigen::VectorXd& d, double cycle_time, double tol) {
  return std::abs(d.sum() - cycle_time) <= tol * cycle_time && (d.array() >= 0.0).all();
}

double cost_at(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0, const Eigen::VectorXd& d) {
  return congestion_cost(averaged_matrix(ms.modes, d, ms.cycle_time), c, x0);
}

InnerResult inner_descent(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0, double eps_bar,
                          const Eigen::VectorXd& start_d, const OptimizerOptions& options,
                          std::vector<IterationRecord>* trace) {
  if (!(options.mu > 0 && options.mu < 1)) throw ValidationError("step size mu must lie in (0,1)");
  if (start_d.size() != ms.mode_count()) throw DimensionError("one duration per mode required");
  if (!on_simplex(start_d, ms.cycle_time, 1e-6)) throw ValidationError("start point is not on the simplex");

  const double T = ms.cycle_time;
  InnerResult out;
  out.d = normalize_simplex(start_d, T);
  Evaluation ev = evaluate(ms, c, x0, eps_bar, out.d, options.ssa);

  auto record = [&](int inner, double kkt) {
    if (!trace) return;
    IterationRecord rec;
    rec.inner = inner;
    rec.eps_bar = eps_bar;
    rec.alpha_tilde = ev.ssa.alpha_tilde;
    rec.kkt_norm = kkt;
    rec.cost = ev.cost;
    rec.d = out.d;
    trace->push_back(std::move(rec));
  };

  for (int it = 0; it < options.max_inner_iterations; ++it) {
    out.iterations = it;
    out.alpha_tilde = ev.ssa.alpha_tilde;
    const double alpha = ev.ssa.alpha_tilde;
    if (std::abs(alpha) <= alpha_tolerance(ev.ssa.abscissa)) {
      out.achieved = out.converged = true;
      out.kkt_norm = 0.0;
      record(it, 0.0);
      return out;
    }
    if (ms.mode_count() == 1) {
      record(it, 0.0);
      return out;  // nothing to move; converged only if achieved
    }

    const Eigen::VectorXd grad = ssa_gradient(ev.ssa, ms);
    const Eigen::VectorXd v = project_tangent(alpha * grad, out.d);
    out.kkt_norm = v.lpNorm<Eigen::Infinity>();
    record(it, out.kkt_norm);
    if (T * out.kkt_norm <= options.kkt_tolerance * std::abs(alpha) || v.squaredNorm() == 0.0) {
      out.converged = true;  // stationary: eps_bar is not achievable from here
      return out;
    }

    // Gauss-Newton step on alpha_tilde along the projected direction.
    Eigen::VectorXd step = -(options.mu * alpha * alpha / v.squaredNorm()) * v;
    const double cap = options.step_cap_fraction * T;
    const double largest = step.lpNorm<Eigen::Infinity>();
    if (largest > cap) step *= cap / largest;
    double ratio = 1.0;
    for (Eigen::Index i = 0; i < step.size(); ++i) {
      if (step[i] < 0) ratio = std::min(ratio, out.d[i] / -step[i]);
    }
    step *= ratio;

    bool accepted = false;
    for (int bt = 0; bt <= options.max_backtracks; ++bt) {
      const Eigen::VectorXd trial_d = normalize_simplex(out.d + step, T);
      Evaluation trial = evaluate(ms, c, x0, eps_bar, trial_d, options.ssa);
      if (std::abs(trial.ssa.alpha_tilde) < std::abs(alpha)) {
        out.d = trial_d;
        ev = std::move(trial);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no decrease possible at working precision
      return out;
    }
  }
  out.iterations = options.max_inner_iterations;
  out.alpha_tilde = ev.ssa.alpha_tilde;
  out.converged = out.achieved = std::abs(out.alpha_tilde) <= alpha_tolerance(ev.ssa.abscissa);
  return out;
}

OptReport optimize_from(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                        const Eigen::VectorXd& start_d, const OptimizerOptions& options) {
  if (!on_simplex(start_d, ms.cycle_time, 1e-6)) throw ValidationError("start point is not on the simplex");
  Eigen::VectorXd d = normalize_simplex(start_d, ms.cycle_time);
  const double j0 = cost_at(ms, c, x0, d);
  if (!std::isfinite(j0) || !(j0 > 0)) {
    throw NoStableStart("averaged system is not Hurwitz at the start point");
  }

  OptReport report;
  report.start_cost = j0;
  double eps = 1.0 / j0;
  const double eps0 = eps;
  double xi = options.xi_fraction * eps0;

  IterationRecord first;
  first.eps_bar = eps;
  first.cost = j0;
  first.d = d;
  report.trajectory.push_back(first);

  int outer = 0;
  while (ms.mode_count() > 1 && xi >= options.xi_min_fraction * eps0) {
    ++outer;
    std::vector<IterationRecord> local;
    const InnerResult res = inner_descent(ms, c, x0, eps + xi, d, options, &local);
    for (auto& rec : local) {
      rec.outer = outer;
      report.trajectory.push_back(std::move(rec));
    }
    if (res.achieved) {
      eps += xi;
      d = res.d;
      continue;
    }
    // The stationary point of a failed trial is itself feasible for the
    // smaller epsilon 1/J(d); keep it when it beats the accepted one.
    const double jf = cost_at(ms, c, x0, res.d);
    if (std::isfinite(jf) && 1.0 / jf > eps) {
      eps = 1.0 / jf;
      d = res.d;
    }
    xi *= 0.5;
  }

  report.d_star = d;
  report.eps_star = eps;
  report.cost = 1.0 / eps;
  report.starts_run = 1;
  return report;
}

std::vector<Eigen::VectorXd> start_points(const ModeSet& ms, int starts, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  out.push_back(ms.durations * (ms.cycle_time / ms.durations.sum()));
  const Eigen::Index m = ms.mode_count();
  for (int k = 1; k < starts; ++k) {
    std::mt19937_64 gen(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(k));
    Eigen::VectorXd d(m);
    for (Eigen::Index i = 0; i < m; ++i) d[i] = -std::log(1.0 - unit_uniform(gen));
    out.push_back(normalize_simplex(d * (ms.cycle_time / d.sum()), ms.cycle_time));
  }
  return out;
}

OptReport optimize(const ModeSet& ms, const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                   const OptimizerOptions& options) {
  if (options.starts < 1) throw ValidationError("at least one start is required");
  const auto starts = start_points(ms, options.starts, options.seed);

  std::vector<std::optional<OptReport>> results(starts.size());
  auto run_one = [&](std::size_t k) {
    try {
      results[k] = optimize_from(ms, c, x0, starts[k], options);
    } catch (const NoStableStart&) {
      results[k].reset();
    }
  };
  const std::size_t workers = static_cast<std::size_t>(std::max(1, options.threads));
  if (workers == 1 || starts.size() == 1) {
    for (std::size_t k = 0; k < starts.size(); ++k) run_one(k);
  } else {
    for (std::size_t base = 0; base < starts.size(); base += workers) {
      std::vector<std::jthread> pool;
      for (std::size_t k = base; k < std::min(starts.size(), base + workers); ++k) pool.emplace_back(run_one, k);
    }
  }

  int best = -1;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (results[k] && (best < 0 || results[k]->cost < results[static_cast<std::size_t>(best)]->cost)) {
      best = static_cast<int>(k);
    }
  }
  if (best < 0) {
    throw NoStableStart(
        "no start point yields a Hurwitz averaged system; check that every movement is green in some mode and "
        "that every road reaches a destination");
  }
  OptReport report = std::move(*results[static_cast<std::size_t>(best)]);
  for (auto& rec : report.trajectory) rec.start = best;
  report.best_start = best;
  report.starts_run = static_cast<int>(starts.size());
  return report;
}

}  // namespace greensplit
