#include "greensplit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <unsupported/Eigen/MatrixFunctions>

#include "greensplit/errors.hpp"

namespace greensplit {

namespace {

void check_horizon(double horizon, double dt) {
  if (!(horizon > 0) || !std::isfinite(horizon)) throw ValidationError("horizon must be positive");
  if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("sampling step dt must be positive");
  if (horizon / dt > 1e7) throw ValidationError("horizon / dt exceeds 1e7 samples");
}

// exp([[A, B], [0, 0]] h) = [[e^{Ah}, int_0^h e^{As} ds B], [0, I]]
class StepCache {
 public:
  StepCache(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) : a_(a), b_(b) {}

  const Eigen::MatrixXd& operator()(double h) {
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    const Eigen::Index n = a_.rows();
    const Eigen::Index r = b_.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + r, n + r);
    aug.topLeftCorner(n, n) = a_ * h;
    aug.topRightCorner(n, r) = b_ * h;
    Eigen::MatrixXd phi = aug.exp();
    return cache_.emplace(h, phi.topRows(n)).first->second;
  }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
  std::map<double, Eigen::MatrixXd> cache_;
};

Eigen::VectorXd advance(const Eigen::MatrixXd& phi, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  const Eigen::Index n = x.size();
  return phi.leftCols(n) * x + phi.rightCols(phi.cols() - n) * u;
}

int mode_at(const ModeSet& ms, double t) {
  double phase = std::fmod(t, ms.cycle_time);
  if (phase < 0) phase += ms.cycle_time;
  for (std::size_t k = 0; k < ms.windows.size(); ++k) {
    if (phase < ms.windows[k].second) return static_cast<int>(k);
  }
  return ms.mode_count() - 1;
}

}  // namespace

ModeSet with_durations(ModeSet ms, const Eigen::VectorXd& durations) {
  if (durations.size() != ms.mode_count()) throw DimensionError("one duration per mode required");
  if ((durations.array() < 0).any() || !(durations.sum() > 0)) throw ValidationError("durations must be nonnegative");
  ms.durations = durations * (ms.cycle_time / durations.sum());
  double start = 0.0;
  for (int k = 0; k < ms.mode_count(); ++k) {
    const double end = k + 1 == ms.mode_count() ? ms.cycle_time : start + ms.durations[k];
    ms.windows[static_cast<std::size_t>(k)] = {start, end};
    start = end;
  }
  return ms;
}

std::vector<double> event_grid(const ModeSet& ms, const NetworkSpec& spec, double horizon, double dt) {
  check_horizon(horizon, dt);
  std::vector<double> grid;
  const auto samples = static_cast<long>(std::floor(horizon / dt + 1e-9));
  for (long k = 0; k <= samples; ++k) grid.push_back(std::min(horizon, static_cast<double>(k) * dt));
  grid.push_back(horizon);

  std::vector<double> offsets;
  for (const auto& w : ms.windows) offsets.push_back(w.first);
  for (const auto& road : spec.roads) {
    for (const auto& s : road.inflow.segments) offsets.push_back(s.start * ms.cycle_time / spec.cycle_time);
  }
  for (double base = 0.0; base < horizon; base += ms.cycle_time) {
    for (double off : offsets) {
      if (base + off <= horizon) grid.push_back(base + off);
    }
  }
  std::sort(grid.begin(), grid.end());
  const double merge = 1e-12 * std::max(1.0, horizon);
  std::vector<double> out;
  for (double t : grid) {
    if (out.empty() || t - out.back() > merge) out.push_back(t);
  }
  return out;
}

Trajectory simulate_switching(const ModeSet& ms, const NetworkSpec& spec, const Eigen::VectorXd& x0, double horizon,
                              double dt) {
  if (x0.size() != ms.state_dim()) throw DimensionError("initial state has the wrong length");
  Trajectory traj;
  traj.times = event_grid(ms, spec, horizon, dt);

  std::vector<StepCache> caches;
  for (const auto& a : ms.modes) caches.emplace_back(a, ms.input_map);

  Eigen::VectorXd x = x0;
  traj.states.push_back(x);
  traj.outputs.push_back(ms.output_map * x);
  for (std::size_t k = 1; k < traj.times.size(); ++k) {
    const double t0 = traj.times[k - 1];
    const double mid = 0.5 * (t0 + traj.times[k]);
    const int mode = mode_at(ms, mid);
    // Inflow profiles are defined over the scenario's cycle.
    const Eigen::VectorXd u = inflow_at(spec, mid * spec.cycle_time / ms.cycle_time);
    x = advance(caches[static_cast<std::size_t>(mode)](traj.times[k] - t0), x, u);
    traj.states.push_back(x);
    traj.outputs.push_back(ms.output_map * x);
  }
  return traj;
}

Trajectory simulate_average(const AveragedSystem& sys, const Eigen::VectorXd& x0, const std::vector<double>& times) {
  if (x0.size() != sys.a.rows()) throw DimensionError("initial state has the wrong length");
  if (times.empty() || times.front() != 0.0) throw ValidationError("time grid must start at 0");
  StepCache step(sys.a, sys.b);
  Trajectory traj;
  traj.times = times;
  Eigen::VectorXd x = x0;
  traj.states.push_back(x);
  traj.outputs.push_back(sys.c * x);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double h = times[k] - times[k - 1];
    if (!(h > 0)) throw ValidationError("time grid must be strictly increasing");
    x = advance(step(h), x, sys.u);
    traj.states.push_back(x);
    traj.outputs.push_back(sys.c * x);
  }
  return traj;
}

Trajectory simulate_average(const AveragedSystem& sys, const Eigen::VectorXd& x0, double horizon, double dt) {
  check_horizon(horizon, dt);
  std::vector<double> times;
  const auto samples = static_cast<long>(std::floor(horizon / dt + 1e-9));
  for (long k = 0; k <= samples; ++k) times.push_back(static_cast<double>(k) * dt);
  if (horizon - times.back() > 1e-12 * horizon) times.push_back(horizon);
  return simulate_average(sys, x0, times);
}

ErrorReport averaging_error(const ModeSet& ms, const AveragedSystem& sys, const NetworkSpec& spec,
                            const Eigen::VectorXd& x0, double horizon, double dt) {
  const Trajectory sw = simulate_switching(ms, spec, x0, horizon, dt);
  const Trajectory av = simulate_average(sys, x0, sw.times);
  const double floor = 1e-6 * x0.norm();

  ErrorReport rep;
  rep.horizon = horizon;
  std::vector<double> ratio(sw.size());
  std::vector<char> usable(sw.size());
  for (std::size_t k = 0; k < sw.size(); ++k) {
    const double ref = av.states[k].norm();
    usable[k] = ref >= floor && ref > 0.0;
    ratio[k] = usable[k] ? (sw.states[k] - av.states[k]).norm() / ref : 0.0;
    if (usable[k]) {
      ++rep.samples_used;
    } else {
      ++rep.samples_excluded;
    }
  }
  double integral = 0.0;
  for (std::size_t k = 1; k < sw.size(); ++k) {
    if (usable[k - 1] && usable[k]) integral += 0.5 * (ratio[k - 1] + ratio[k]) * (sw.times[k] - sw.times[k - 1]);
  }
  rep.error_percent = 100.0 * integral / horizon;
  return rep;
}

double output_energy(const Trajectory& traj) {
  double total = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    total += 0.5 * (traj.outputs[k - 1].squaredNorm() + traj.outputs[k].squaredNorm()) *
             (traj.times[k] - traj.times[k - 1]);
  }
  return total;
}

NetworkSpec rescale_cycle(const NetworkSpec& spec, double cycle_time) {
  if (!(cycle_time > 0)) throw ValidationError("cycle time must be positive");
  NetworkSpec out = spec;
  const double f = cycle_time / spec.cycle_time;
  out.cycle_time = cycle_time;
  for (auto& phases : out.phase_durations)
    for (auto& d : phases) d *= f;
  for (auto& road : out.roads)
    for (auto& s : road.inflow.segments) s.start *= f;
  return validate_network(std::move(out));
}

}  // namespace greensplit
