#include "greensplit/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "greensplit/errors.hpp"

namespace greensplit {

double InflowProfile::rate_at(double t, double cycle_time) const {
  if (segments.empty()) return 0.0;
  double phase = std::fmod(t, cycle_time);
  if (phase < 0) phase += cycle_time;
  double rate = segments.back().rate;  // wraps around from the previous cycle
  for (const auto& s : segments) {
    if (s.start <= phase) rate = s.rate;
  }
  return rate;
}

double InflowProfile::average(double cycle_time) const {
  if (segments.empty()) return 0.0;
  double total = segments.back().rate * segments.front().start;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const double end = k + 1 < segments.size() ? segments[k + 1].start : cycle_time;
    total += segments[k].rate * (end - segments[k].start);
  }
  return total / cycle_time;
}

bool InflowProfile::is_zero() const {
  return std::all_of(segments.begin(), segments.end(), [](const InflowSegment& s) { return s.rate == 0.0; });
}

int NetworkSpec::road_index(const std::string& id) const {
  for (std::size_t i = 0; i < roads.size(); ++i) {
    if (roads[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

std::string join(const std::vector<std::string>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? ", " : "") << items[i];
  return out.str();
}

void check_road(const Road& r, double cycle_time) {
  if (r.id.empty()) fail("road with empty id");
  if (!(r.length > 0)) fail("road " + r.id + ": length must be positive");
  if (!(r.free_flow_speed > 0)) fail("road " + r.id + ": free-flow speed must be positive");
  if (!(r.exit_rate >= 0 && r.exit_rate <= 1)) fail("road " + r.id + ": exit rate must lie in [0,1]");
  if (r.exit_rate > 0 && !r.is_destination) fail("road " + r.id + ": exit rate > 0 requires a destination road");
  if (r.is_source && r.is_destination) fail("road " + r.id + ": a road cannot be both source and destination");
  double prev = -1.0;
  for (const auto& s : r.inflow.segments) {
    if (!(s.start >= 0 && s.start < cycle_time)) fail("road " + r.id + ": inflow segment starts outside [0,T)");
    if (s.start <= prev) fail("road " + r.id + ": inflow segments must have increasing start times");
    if (!(s.rate >= 0) || !std::isfinite(s.rate)) fail("road " + r.id + ": inflow rates must be nonnegative");
    prev = s.start;
  }
  if (!r.inflow.is_zero() && !r.is_source) fail("road " + r.id + ": exogenous inflow requires a source road");
}

}  // namespace

std::vector<int> unreachable_roads(const NetworkSpec& spec) {
  const int nr = static_cast<int>(spec.roads.size());
  // Reverse adjacency: to_road -> from_roads.
  std::vector<std::vector<int>> upstream(nr);
  for (const auto& inter : spec.intersections) {
    for (const auto& mv : inter.movements) {
      const int from = spec.road_index(mv.from_road);
      const int to = spec.road_index(mv.to_road);
      if (from >= 0 && to >= 0) upstream[to].push_back(from);
    }
  }
  std::vector<char> reached(nr, 0);
  std::deque<int> queue;
  for (int i = 0; i < nr; ++i) {
    if (spec.roads[i].is_destination) {
      reached[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const int r = queue.front();
    queue.pop_front();
    for (int u : upstream[r]) {
      if (!reached[u]) {
        reached[u] = 1;
        queue.push_back(u);
      }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < nr; ++i) {
    if (!reached[i]) out.push_back(i);
  }
  return out;
}

NetworkSpec validate_network(NetworkSpec spec) {
  if (!(spec.step > 0)) fail("discretization step h must be positive");
  if (!(spec.cycle_time > 0)) fail("cycle time T must be positive");
  if (spec.roads.empty()) fail("network has no roads");

  std::set<std::string> ids;
  for (auto& r : spec.roads) {
    check_road(r, spec.cycle_time);
    if (!ids.insert(r.id).second) fail("duplicate road id " + r.id);
    // Guard against ceil(3.0000000001) when length/h is integral up to rounding.
    r.cell_count = std::max(1, static_cast<int>(std::ceil(r.length / spec.step - 1e-9)));
  }

  std::map<std::string, std::string> upstream_of;    // road -> intersection feeding it
  std::map<std::string, std::string> downstream_of;  // road -> intersection it feeds
  std::set<std::string> inter_ids;
  std::map<std::string, double> ratio_sum;
  for (const auto& inter : spec.intersections) {
    if (inter.id.empty()) fail("intersection with empty id");
    if (!inter_ids.insert(inter.id).second) fail("duplicate intersection id " + inter.id);
    if (inter.phases.empty()) fail("intersection " + inter.id + " has no phases");

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& mv : inter.movements) {
      const std::string tag = inter.id + " movement " + mv.from_road + "->" + mv.to_road;
      if (spec.road_index(mv.from_road) < 0) fail(tag + ": unknown road " + mv.from_road);
      if (spec.road_index(mv.to_road) < 0) fail(tag + ": unknown road " + mv.to_road);
      if (mv.from_road == mv.to_road) fail(tag + ": a movement must connect two different roads");
      if (!seen.insert({mv.from_road, mv.to_road}).second) fail(tag + ": duplicate movement");
      if (!(mv.routing_ratio >= 0 && mv.routing_ratio <= 1)) fail(tag + ": routing ratio must lie in [0,1]");
      if (!(mv.saturation_rate >= 0) || !std::isfinite(mv.saturation_rate)) {
        fail(tag + ": saturation rate must be nonnegative");
      }
      auto [it_d, new_d] = downstream_of.emplace(mv.from_road, inter.id);
      if (!new_d && it_d->second != inter.id) {
        fail("road " + mv.from_road + " has more than one downstream intersection");
      }
      auto [it_u, new_u] = upstream_of.emplace(mv.to_road, inter.id);
      if (!new_u && it_u->second != inter.id) fail("road " + mv.to_road + " has more than one upstream intersection");
      ratio_sum[mv.from_road] += mv.routing_ratio;
    }

    std::vector<int> coverage(inter.movements.size(), 0);
    for (std::size_t p = 0; p < inter.phases.size(); ++p) {
      std::set<int> in_phase;
      for (int idx : inter.phases[p]) {
        if (idx < 0 || idx >= static_cast<int>(inter.movements.size())) {
          fail("intersection " + inter.id + " phase " + std::to_string(p) + " references an unknown movement");
        }
        if (!in_phase.insert(idx).second) {
          fail("intersection " + inter.id + " phase " + std::to_string(p) + " lists a movement twice");
        }
        ++coverage[idx];
      }
    }
    for (std::size_t k = 0; k < coverage.size(); ++k) {
      const auto& mv = inter.movements[k];
      if (coverage[k] == 0) {
        fail("intersection " + inter.id + ": movement " + mv.from_road + "->" + mv.to_road + " is in no phase");
      }
      if (coverage[k] > 1 && !spec.allow_phase_overlap) {
        fail("intersection " + inter.id + ": movement " + mv.from_road + "->" + mv.to_road +
             " appears in several phases but phase overlap is not allowed");
      }
    }
  }

  for (const auto& r : spec.roads) {
    if (r.is_source && upstream_of.count(r.id)) fail("source road " + r.id + " cannot have an upstream intersection");
  }

  if (spec.enforce_conservation) {
    for (const auto& [road, total] : ratio_sum) {
      if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "routing ratios leaving road " << road << " sum to " << total << " instead of 1";
        fail(msg.str());
      }
    }
  }

  const auto lost = unreachable_roads(spec);
  if (!lost.empty()) {
    std::vector<std::string> names;
    for (int i : lost) names.push_back(spec.roads[i].id);
    fail("no path to any destination road from: " + join(names));
  }

  if (!spec.phase_durations.empty()) {
    if (spec.phase_durations.size() != spec.intersections.size()) {
      fail("schedule must list phase durations for every intersection");
    }
    for (std::size_t j = 0; j < spec.intersections.size(); ++j) {
      if (spec.phase_durations[j].size() != spec.intersections[j].phases.size()) {
        fail("intersection " + spec.intersections[j].id + ": schedule length differs from phase count");
      }
    }
  }

  spec.first_cell.assign(spec.roads.size(), 0);
  int offset = 0;
  for (std::size_t i = 0; i < spec.roads.size(); ++i) {
    spec.first_cell[i] = offset;
    offset += spec.roads[i].cell_count;
  }
  spec.state_dim = offset;

  if (!spec.phase_durations.empty()) {
    // Normalizes and range-checks the durations.
    spec.phase_durations = make_schedule(spec, spec.phase_durations).phase_durations;
  }
  return spec;
}

}  // namespace greensplit
