#include <cmath>
#include <string>

#include "greensplit/errors.hpp"
#include "greensplit/network.hpp"

namespace greensplit {

namespace {

enum Heading { kEast = 0, kWest = 1, kSouth = 2, kNorth = 3 };

// Road carrying traffic with the given heading along corridor `line`, segment
// `seg`. Eastbound segment c runs from intersection column c-1 to c; westbound
// segment c runs from column c to c-1 (same for south/north along rows).
std::string road_name(Heading h, int line, int seg) {
  static const char* prefix[] = {"E", "W", "S", "N"};
  return std::string(prefix[h]) + std::to_string(line) + "_" + std::to_string(seg);
}

Heading right_of(Heading h) {
  switch (h) {
    case kEast: return kSouth;
    case kWest: return kNorth;
    case kSouth: return kWest;
    case kNorth: return kEast;
  }
  return kEast;
}

Heading left_of(Heading h) {
  switch (h) {
    case kEast: return kNorth;
    case kWest: return kSouth;
    case kSouth: return kEast;
    case kNorth: return kWest;
  }
  return kEast;
}

}  // namespace

NetworkSpec generate_grid(int rows, int cols, const GridParams& p) {
  if (rows < 1 || cols < 1) throw ValidationError("grid needs at least one row and one column");
  if (std::abs(p.through_ratio + p.left_ratio + p.right_ratio - 1.0) > 1e-12) {
    throw ValidationError("grid turning ratios must sum to 1");
  }

  NetworkSpec spec;
  spec.name = "grid_" + std::to_string(rows) + "x" + std::to_string(cols);
  spec.step = p.step;
  spec.cycle_time = p.cycle_time;

  auto add_road = [&](Heading h, int line, int seg, int segments) {
    Road r;
    r.id = road_name(h, line, seg);
    r.length = p.road_length;
    r.free_flow_speed = p.free_flow_speed;
    // Eastbound/southbound enter at segment 0; westbound/northbound enter at the last segment.
    const bool forward = (h == kEast || h == kSouth);
    r.is_source = forward ? seg == 0 : seg == segments;
    r.is_destination = forward ? seg == segments : seg == 0;
    if (r.is_destination) r.exit_rate = p.exit_rate;
    if (r.is_source && p.inflow > 0) r.inflow.segments.push_back({0.0, p.inflow});
    spec.roads.push_back(std::move(r));
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c <= cols; ++c) add_road(kEast, r, c, cols);
    for (int c = 0; c <= cols; ++c) add_road(kWest, r, c, cols);
  }
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r <= rows; ++r) add_road(kSouth, c, r, rows);
    for (int r = 0; r <= rows; ++r) add_road(kNorth, c, r, rows);
  }

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Intersection inter;
      inter.id = "I" + std::to_string(r) + "_" + std::to_string(c);
      const std::string in[4] = {road_name(kEast, r, c), road_name(kWest, r, c + 1), road_name(kSouth, c, r),
                                 road_name(kNorth, c, r + 1)};
      const std::string out[4] = {road_name(kEast, r, c + 1), road_name(kWest, r, c), road_name(kSouth, c, r + 1),
                                  road_name(kNorth, c, r)};
      // phase order: NS through/right, NS left, EW through/right, EW left
      std::vector<std::vector<int>> phases(4);
      for (Heading h : {kSouth, kNorth, kEast, kWest}) {
        const bool north_south = (h == kSouth || h == kNorth);
        const int through_phase = north_south ? 0 : 2;
        auto add = [&](Heading to, double ratio, int phase) {
          inter.movements.push_back({in[h], out[to], ratio, p.saturation_rate});
          phases[phase].push_back(static_cast<int>(inter.movements.size()) - 1);
        };
        add(h, p.through_ratio, through_phase);
        add(right_of(h), p.right_ratio, through_phase);
        add(left_of(h), p.left_ratio, through_phase + 1);
      }
      inter.phases = std::move(phases);
      spec.intersections.push_back(std::move(inter));
    }
  }
  return validate_network(std::move(spec));
}

}  // namespace greensplit
