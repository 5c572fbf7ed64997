#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "adaplan/sim.hpp"

using namespace adaplan;

namespace {

Scenario StraightScenario(double length, std::vector<ObstacleSpec> obstacles = {}) {
  PlannerStack stack;
  Scenario s;
  s.track = MakeStraightTrack(length, 5.25);
  s.reference = GenerateReference(s.track, stack.params, stack.bounds, {});
  s.ego_start_arc = 10.0;
  s.ego_speed = 10.0;
  s.goal_arc = length - 40.0;
  s.max_time = 80.0;
  s.obstacles = std::move(obstacles);
  return s;
}

}  // namespace

TEST(World, StepAdvancesEgoAndObstacles) {
  Scenario s = StraightScenario(300.0, {{100.0, 3.5, 5.0}});
  World world(s, VehicleParams{});
  WorldState w = world.Initial();
  const double x0 = w.ego.x;
  w = world.Step(w, {10.0, 0.0}, 0.01);
  EXPECT_NEAR(w.ego.x - x0, 0.1, 1e-9);
  EXPECT_NEAR(w.ego_progress, 0.1, 1e-6);
  EXPECT_NEAR(w.obstacles[0].arc, 100.05, 1e-12);
  EXPECT_NEAR(w.time, 0.01, 1e-15);
  EXPECT_EQ(w.collisions, 0);
}

TEST(World, CollisionCountedOncePerContact) {
  // Parked obstacle straight ahead in the ego lane.
  Scenario s = StraightScenario(300.0, {{30.0, 0.0, 0.0}});
  World world(s, VehicleParams{});
  WorldState w = world.Initial();
  int contact_steps = 0;
  for (int k = 0; k < 300; ++k) {
    w = world.Step(w, {10.0, 0.0}, 0.01);
    if (w.in_contact[0]) ++contact_steps;
  }
  EXPECT_GT(contact_steps, 10);
  EXPECT_EQ(w.collisions, 1);
  EXPECT_EQ(w.min_distance, 0.0);
}

TEST(World, DetectUsesRadius) {
  Scenario s = StraightScenario(300.0, {{40.0, 0.0, 0.0}, {100.0, 0.0, 0.0}});
  World world(s, VehicleParams{});
  const WorldState w = world.Initial();
  const auto d = world.Detect(w, 50.0);
  EXPECT_TRUE(d[0]);
  EXPECT_FALSE(d[1]);
}

TEST(World, ClosedTrackProgressUnwraps) {
  PlannerStack stack;
  Scenario s;
  s.track = MakeCircleTrack(40.0, 5.25);
  s.reference = GenerateReference(s.track, stack.params, stack.bounds, {});
  s.goal_arc = 1.0;
  World world(s, stack.params);
  WorldState w = world.Initial();
  const double L = world.centerline().Length();
  // Drive the circle with the steady-state steering angle.
  const double psi = std::atan(stack.params.wheelbase / 40.0);
  const double v = 10.0;
  const int steps = static_cast<int>(std::ceil(1.2 * L / (v * 0.01)));
  for (int k = 0; k < steps; ++k) w = world.Step(w, {v, psi}, 0.01);
  EXPECT_NEAR(w.ego_progress, steps * v * 0.01, 0.05 * L);
  EXPECT_GT(w.ego_progress, L);
}

TEST(Episode, EmptyStraightCompletesWithinLimits) {
  const Scenario s = StraightScenario(600.0);
  PlannerStack stack;
  stack.mode = StackMode::kFdOnly;
  const EpisodeMetrics m = RunEpisode(s, stack, Rates{});
  EXPECT_TRUE(m.completed);
  EXPECT_EQ(m.collisions, 0);
  EXPECT_EQ(m.input_violations, 0);
  EXPECT_LE(m.avg_speed_kmh, m.max_speed_kmh + 1e-9);
  EXPECT_LE(m.max_speed_kmh, stack.bounds.u_max.v * 3.6 + 1e-9);
  // Reaching the goal needs at least goal / v_max seconds.
  EXPECT_GE(m.completion_time, s.goal_arc / stack.bounds.u_max.v);
}

TEST(Episode, SaOvertakesSlowLeader) {
  Scenario s = StraightScenario(500.0, {{45.0, 0.0, 5.0}});
  s.pass_margin = 10.0;
  PlannerStack stack;
  stack.mode = StackMode::kSaOnly;
  const EpisodeMetrics m = RunEpisode(s, stack, Rates{});
  EXPECT_TRUE(m.overtake_success);
  EXPECT_EQ(m.collisions, 0);
  EXPECT_GT(m.sa_feasible, 0);
  EXPECT_EQ(m.sa_certificate_violations, 0);
  EXPECT_GE(m.sa_min_certified, stack.sa.d_safe - 1e-2);
  for (const auto& sample : m.mode_trace) EXPECT_EQ(sample.beta, 1);
}

TEST(Episode, SwitchedStackRecordsDecisions) {
  Scenario s = StraightScenario(500.0, {{50.0, 0.0, 6.0}, {70.0, 3.5, 7.0}});
  s.pass_margin = 10.0;
  PlannerStack stack;
  std::ostringstream decisions;
  EpisodeOutputs out;
  out.decision_log = &decisions;
  const EpisodeMetrics m = RunEpisode(s, stack, Rates{}, out);
  EXPECT_GT(m.switch_decisions, 0);
  EXPECT_EQ(m.degraded_decisions, 0);
  int lines = 0;
  std::istringstream in(decisions.str());
  for (std::string line; std::getline(in, line);) {
    EXPECT_NO_THROW(static_cast<void>(nlohmann::json::parse(line)));
    ++lines;
  }
  EXPECT_EQ(lines, m.switch_decisions);
  for (const auto& sample : m.mode_trace) {
    EXPECT_TRUE(sample.beta == 0 || sample.beta == 1);
    EXPECT_TRUE(sample.gamma == 0.0 || std::abs(std::abs(sample.gamma) - stack.switcher.v0) < 1e-12);
  }
}

TEST(Episode, RerunIsIdentical) {
  Scenario s = StraightScenario(400.0, {{50.0, 0.0, 6.0}, {60.0, -3.5, 8.0}});
  s.pass_margin = 10.0;
  PlannerStack stack;
  std::ostringstream log_a, log_b;
  const EpisodeMetrics a = RunEpisode(s, stack, Rates{}, {&log_a, nullptr});
  const EpisodeMetrics b = RunEpisode(s, stack, Rates{}, {&log_b, nullptr});
  EXPECT_EQ(MetricsToJson(a, true).dump(), MetricsToJson(b, true).dump());
  EXPECT_EQ(log_a.str(), log_b.str());
}

TEST(Episode, HalvedPlanRateKeepsInputBounds) {
  Scenario s = StraightScenario(400.0, {{50.0, 0.0, 6.0}});
  s.pass_margin = 10.0;
  PlannerStack stack;
  Rates rates;
  rates.plan_hz = 5.0;
  const EpisodeMetrics m = RunEpisode(s, stack, rates);
  EXPECT_EQ(m.input_violations, 0);
  EXPECT_LE(m.mode_trace.size(), static_cast<size_t>(std::ceil(m.completion_time * 5.0)) + 1);
}

TEST(Episode, SlowSwitcherRepliesAreApplied) {
  Scenario s = StraightScenario(400.0, {{50.0, 0.0, 6.0}});
  s.pass_margin = 10.0;
  PlannerStack stack;
  stack.switcher.mode = "mock";
  stack.switcher.mock_latency_s = 0.3;
  stack.switcher.timeout_s = 1.0;
  stack.experience = {{"e", {10, 20, 1, 20, 0, 0}, {PlannerMode::kSa, SpeedCommand::kKeep}, ""}};
  const EpisodeMetrics m = RunEpisode(s, stack, Rates{});
  ASSERT_FALSE(m.mode_trace.empty());
  // The first decision lands 0.3 s in; before that the stack runs FD.
  EXPECT_EQ(m.mode_trace.front().beta, 0);
  bool saw_sa = false;
  for (const auto& sample : m.mode_trace) {
    if (sample.time < 0.3 - 1e-9) EXPECT_EQ(sample.beta, 0);
    saw_sa |= sample.beta == 1;
  }
  EXPECT_TRUE(saw_sa);
}

TEST(Config, Validation) {
  Rates r;
  r.plan_hz = 30.0;
  EXPECT_THROW(r.Validate(), std::invalid_argument);
  r = Rates{};
  r.plan_hz = 200.0;
  EXPECT_THROW(r.Validate(), std::invalid_argument);
  EXPECT_EQ(ParseStackMode("sa-only"), StackMode::kSaOnly);
  EXPECT_THROW(ParseStackMode("both"), std::invalid_argument);
  Scenario s = StraightScenario(200.0);
  s.goal_arc = 0.0;
  EXPECT_THROW(s.Validate(), std::invalid_argument);
}

TEST(Studies, ScenarioGenerationIsSeeded) {
  OvertakeStudyConfig c;
  PlannerStack stack;
  const Track t = MakeStraightTrack(c.road_length, c.half_width);
  const ReferencePlan ref = GenerateReference(t, stack.params, stack.bounds, {});
  const Scenario a = MakeOvertakeScenario(c, ref, t, 4, 7);
  const Scenario b = MakeOvertakeScenario(c, ref, t, 4, 7);
  const Scenario d = MakeOvertakeScenario(c, ref, t, 4, 8);
  ASSERT_EQ(a.obstacles.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.obstacles[i].start_arc, b.obstacles[i].start_arc);
    EXPECT_EQ(a.obstacles[i].speed, b.obstacles[i].speed);
    EXPECT_GE(a.obstacles[i].speed, c.speed_min);
    EXPECT_LE(a.obstacles[i].speed, c.speed_max);
  }
  EXPECT_NE(a.obstacles[0].speed, d.obstacles[0].speed);
  EXPECT_NE(MixSeed(1, 2), MixSeed(2, 1));
}

TEST(Studies, TablesAreFixedPrecision) {
  std::vector<OvertakeRow> rows = {{StackMode::kFdOnly, 1, 3, 1, 2}};
  EXPECT_EQ(OvertakeTable(rows),
            "mode,density,trials,successes,success_rate,collisions\nfd-only,1,3,1,0.3333,2\n");
  EXPECT_EQ(OvertakePlotData(rows), "series,x,y\nfd-only,1,0.3333\n");
}
