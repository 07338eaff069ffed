#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "greensplit/errors.hpp"
#include "greensplit/network.hpp"
#include "greensplit/scenario_io.hpp"

using namespace greensplit;

namespace {

Road make_road(const std::string& id, double length, double speed = 1.0) {
  Road r;
  r.id = id;
  r.length = length;
  r.free_flow_speed = speed;
  return r;
}

NetworkSpec lone_road(double length, double step) {
  NetworkSpec spec;
  spec.step = step;
  Road r = make_road("r1", length);
  r.is_destination = true;
  spec.roads.push_back(r);
  return spec;
}

// r1 -> I1 -> r2 (destination), r3 -> I1 -> r4 (destination).
NetworkSpec crossing() {
  NetworkSpec spec;
  spec.step = 1.0;
  spec.cycle_time = 100.0;
  for (const char* id : {"r1", "r2", "r3", "r4"}) spec.roads.push_back(make_road(id, 2.0));
  spec.roads[0].is_source = spec.roads[2].is_source = true;
  spec.roads[1].is_destination = spec.roads[3].is_destination = true;
  spec.roads[1].exit_rate = spec.roads[3].exit_rate = 0.5;
  Intersection in;
  in.id = "I1";
  in.movements = {{"r1", "r2", 1.0, 0.5}, {"r3", "r4", 1.0, 0.5}};
  in.phases = {{0}, {1}};
  spec.intersections.push_back(in);
  return spec;
}

}  // namespace

TEST(BuildNetwork, LoneRoadOfThreeCells) {
  const NetworkSpec spec = validate_network(lone_road(3.0, 1.0));
  EXPECT_EQ(spec.roads[0].cell_count, 3);
  EXPECT_EQ(spec.state_dim, 3);
}

TEST(BuildNetwork, CellCountRoundsUp) {
  EXPECT_EQ(validate_network(lone_road(250.0, 100.0)).roads[0].cell_count, 3);
  EXPECT_EQ(validate_network(lone_road(300.0, 100.0)).roads[0].cell_count, 3);
  EXPECT_EQ(validate_network(lone_road(50.0, 100.0)).roads[0].cell_count, 1);
}

TEST(BuildNetwork, FourIntersectionScenarioHas36States) {
  const NetworkSpec spec = load_scenario(GREENSPLIT_TEST_SCENARIOS "/four_intersections.json");
  EXPECT_EQ(spec.roads.size(), 12u);
  EXPECT_EQ(spec.intersections.size(), 4u);
  EXPECT_EQ(spec.state_dim, 36);
  std::vector<std::string> sources, destinations;
  for (const auto& r : spec.roads) {
    if (r.is_source) sources.push_back(r.id);
    if (r.is_destination) destinations.push_back(r.id);
  }
  EXPECT_EQ(sources, (std::vector<std::string>{"r1", "r3", "r10", "r12"}));
  EXPECT_EQ(destinations, (std::vector<std::string>{"r2", "r5", "r8", "r11"}));
}

TEST(BuildNetwork, RoadWithoutPathToDestinationIsRejected) {
  NetworkSpec spec = crossing();
  spec.roads[3].is_destination = false;
  spec.roads[3].exit_rate = 0.0;
  try {
    validate_network(spec);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no path to any destination"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("r4"), std::string::npos);
  }
}

TEST(BuildNetwork, RoutingRatiosMustSumToOne) {
  NetworkSpec spec = crossing();
  spec.intersections[0].movements[0].routing_ratio = 0.7;
  EXPECT_THROW(validate_network(spec), ValidationError);
  spec.enforce_conservation = false;
  EXPECT_NO_THROW(validate_network(spec));
}

TEST(BuildNetwork, RejectsBrokenInvariants) {
  {
    NetworkSpec spec = crossing();
    spec.roads[0].exit_rate = 0.2;  // not a destination
    EXPECT_THROW(validate_network(spec), ValidationError);
  }
  {
    NetworkSpec spec = crossing();
    spec.roads[1].exit_rate = 1.5;
    EXPECT_THROW(validate_network(spec), ValidationError);
  }
  {
    NetworkSpec spec = crossing();
    spec.intersections[0].phases = {{0}};  // movement 1 never green
    EXPECT_THROW(validate_network(spec), ValidationError);
  }
  {
    NetworkSpec spec = crossing();
    spec.intersections[0].phases = {{0, 1}, {1}};
    EXPECT_THROW(validate_network(spec), ValidationError);
    spec.allow_phase_overlap = true;
    EXPECT_NO_THROW(validate_network(spec));
  }
  {
    NetworkSpec spec = crossing();
    spec.roads[0].length = 0.0;
    EXPECT_THROW(validate_network(spec), ValidationError);
  }
  {
    NetworkSpec spec = crossing();
    spec.intersections[0].movements[0].to_road = "nowhere";
    EXPECT_THROW(validate_network(spec), ValidationError);
  }
}

TEST(BuildNetwork, RoadHasAtMostOneDownstreamIntersection) {
  NetworkSpec spec = crossing();
  Intersection extra;
  extra.id = "I2";
  extra.movements = {{"r1", "r4", 1.0, 0.5}};
  extra.phases = {{0}};
  spec.intersections.push_back(extra);
  spec.enforce_conservation = false;
  EXPECT_THROW(validate_network(spec), ValidationError);
}

TEST(GenerateGrid, OneByOneIsTheFourWayIntersection) {
  const NetworkSpec spec = generate_grid(1, 1);
  ASSERT_EQ(spec.intersections.size(), 1u);
  const auto& inter = spec.intersections[0];
  EXPECT_EQ(inter.phases.size(), 4u);
  EXPECT_EQ(inter.movements.size(), 12u);  // four approaches x (through, right, left)
  int sources = 0, destinations = 0;
  for (const auto& r : spec.roads) {
    sources += r.is_source;
    destinations += r.is_destination;
  }
  EXPECT_EQ(sources, 4);
  EXPECT_EQ(destinations, 4);
}

TEST(GenerateGrid, ThreeByThreeIsConnected) {
  const NetworkSpec spec = generate_grid(3, 3);
  EXPECT_EQ(spec.intersections.size(), 9u);
  EXPECT_TRUE(unreachable_roads(spec).empty());
}

TEST(GenerateGrid, FourByFourCoversEveryMovement) {
  const NetworkSpec spec = generate_grid(4, 4);
  for (const auto& inter : spec.intersections) {
    std::vector<int> hits(inter.movements.size(), 0);
    for (const auto& phase : inter.phases)
      for (int m : phase) ++hits[static_cast<std::size_t>(m)];
    for (int h : hits) EXPECT_GE(h, 1) << inter.id;
  }
}

TEST(GenerateGrid, RejectsEmptyGrid) {
  EXPECT_THROW(generate_grid(0, 3), ValidationError);
  EXPECT_THROW(generate_grid(2, 0), ValidationError);
}

TEST(UniformSchedule, FourPhasesGetAQuarterEach) {
  const Schedule s = uniform_schedule(generate_grid(1, 1));
  ASSERT_EQ(s.phase_durations[0].size(), 4u);
  for (double d : s.phase_durations[0]) EXPECT_DOUBLE_EQ(d, 25.0);
  EXPECT_EQ(s.mode_count(), 4u);
}

TEST(UniformSchedule, SinglePhaseTakesTheWholeCycle) {
  NetworkSpec spec = crossing();
  spec.intersections[0].phases = {{0, 1}};
  const Schedule s = uniform_schedule(validate_network(spec));
  EXPECT_DOUBLE_EQ(s.phase_durations[0][0], 100.0);
  ASSERT_EQ(s.mode_count(), 1u);
  EXPECT_DOUBLE_EQ(s.mode_durations[0], 100.0);
}

TEST(UniformSchedule, GreenSplitsOfTheFourWayIntersection) {
  const Schedule s = uniform_schedule(generate_grid(1, 1));
  // Each phase is green for exactly one quarter of the cycle, in order.
  for (int p = 0; p < 4; ++p) {
    for (double t = 0.5; t < 100.0; t += 1.0) {
      EXPECT_EQ(is_green(s, 0, p, t), static_cast<int>(t / 25.0) == p) << "phase " << p << " t " << t;
    }
  }
  EXPECT_TRUE(is_green(s, 0, 0, 100.5));  // periodic
}

TEST(Schedule, DurationsSumToCycleAndModesMerge) {
  const NetworkSpec spec = load_scenario(GREENSPLIT_TEST_SCENARIOS "/four_intersections.json");
  const Schedule s = uniform_schedule(spec);
  ASSERT_EQ(s.mode_count(), 4u);
  EXPECT_NEAR(std::accumulate(s.mode_durations.begin(), s.mode_durations.end(), 0.0), 100.0, 1e-12);
  for (double d : s.mode_durations) EXPECT_GE(d, 0.0);
  EXPECT_DOUBLE_EQ(s.boundaries.back(), 100.0);
}

TEST(Schedule, RejectsDurationsThatMissTheCycle) {
  const NetworkSpec spec = validate_network(crossing());
  EXPECT_THROW(make_schedule(spec, {{40.0, 40.0}}), ValidationError);
  EXPECT_THROW(make_schedule(spec, {{120.0, -20.0}}), ValidationError);
  const Schedule s = make_schedule(spec, {{30.0, 70.0}});
  EXPECT_DOUBLE_EQ(s.mode_durations[0], 30.0);
  EXPECT_DOUBLE_EQ(s.mode_durations[1], 70.0);
}

TEST(Schedule, PhaseSplitsRecoverPhaseDurations) {
  const NetworkSpec spec = load_scenario(GREENSPLIT_TEST_SCENARIOS "/four_intersections.json");
  const Schedule s = uniform_schedule(spec);
  const auto splits = phase_splits(s, s.mode_durations);
  for (std::size_t j = 0; j < splits.size(); ++j)
    for (std::size_t p = 0; p < splits[j].size(); ++p) EXPECT_NEAR(splits[j][p], s.phase_durations[j][p], 1e-12);
}
