#include <algorithm>
#include <cmath>
#include <numeric>

#include "greensplit/errors.hpp"
#include "greensplit/network.hpp"

namespace greensplit {

Schedule make_schedule(const NetworkSpec& spec, std::vector<std::vector<double>> phase_durations) {
  const double T = spec.cycle_time;
  if (phase_durations.size() != spec.intersections.size()) {
    throw ValidationError("schedule must list phase durations for every intersection");
  }
  for (std::size_t j = 0; j < phase_durations.size(); ++j) {
    auto& durations = phase_durations[j];
    const auto& id = spec.intersections[j].id;
    if (durations.size() != spec.intersections[j].phases.size()) {
      throw ValidationError("intersection " + id + ": schedule length differs from phase count");
    }
    double total = 0.0;
    for (double& d : durations) {
      if (!(d >= 0) || !std::isfinite(d)) throw ValidationError("intersection " + id + ": negative phase duration");
      total += d;
    }
    if (std::abs(total - T) > 1e-6 * T) {
      throw ValidationError("intersection " + id + ": phase durations sum to " + std::to_string(total) +
                            " instead of the cycle time");
    }
    for (double& d : durations) d *= T / total;
  }

  Schedule s;
  s.cycle_time = T;
  s.phase_durations = std::move(phase_durations);

  std::vector<double> cuts{T};
  for (const auto& durations : s.phase_durations) {
    double t = 0.0;
    for (std::size_t p = 0; p + 1 < durations.size(); ++p) {
      t += durations[p];
      if (t > 0 && t < T) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  const double merge_tol = 1e-12 * T;
  for (double c : cuts) {
    if (s.boundaries.empty() || c - s.boundaries.back() > merge_tol) s.boundaries.push_back(c);
  }
  s.boundaries.back() = T;

  double prev = 0.0;
  for (double tau : s.boundaries) {
    s.mode_durations.push_back(tau - prev);
    const double mid = 0.5 * (prev + tau);
    std::vector<int> active(s.phase_durations.size(), 0);
    for (std::size_t j = 0; j < s.phase_durations.size(); ++j) {
      double start = 0.0;
      const auto& durations = s.phase_durations[j];
      for (std::size_t p = 0; p < durations.size(); ++p) {
        if (durations[p] > 0 && mid >= start && mid < start + durations[p]) {
          active[j] = static_cast<int>(p);
          break;
        }
        start += durations[p];
      }
    }
    s.active_phase.push_back(std::move(active));
    prev = tau;
  }
  return s;
}

Schedule uniform_schedule(const NetworkSpec& spec) {
  std::vector<std::vector<double>> durations;
  for (const auto& inter : spec.intersections) {
    const auto count = inter.phases.size();
    durations.emplace_back(count, spec.cycle_time / static_cast<double>(count));
  }
  return make_schedule(spec, std::move(durations));
}

Schedule scenario_schedule(const NetworkSpec& spec) {
  if (spec.phase_durations.empty()) return uniform_schedule(spec);
  return make_schedule(spec, spec.phase_durations);
}

bool is_green(const Schedule& schedule, int intersection, int phase, double t) {
  const double T = schedule.cycle_time;
  double tc = std::fmod(t, T);
  if (tc < 0) tc += T;
  const auto& durations = schedule.phase_durations.at(intersection);
  double start = 0.0;
  for (int p = 0; p < static_cast<int>(durations.size()); ++p) {
    if (tc >= start && tc < start + durations[p]) return p == phase;
    start += durations[p];
  }
  return false;
}

std::vector<std::vector<double>> phase_splits(const Schedule& schedule, const std::vector<double>& mode_durations) {
  std::vector<std::vector<double>> out;
  for (const auto& durations : schedule.phase_durations) out.emplace_back(durations.size(), 0.0);
  for (std::size_t k = 0; k < mode_durations.size(); ++k) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j][schedule.active_phase[k][j]] += mode_durations[k];
  }
  return out;
}

}  // namespace greensplit
