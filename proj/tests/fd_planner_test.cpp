#include "adaplan/fd_planner.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fd_oracle.hpp"

namespace adaplan {
namespace {

class FdFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    straight_track_ = MakeStraightTrack(400, 5.25);
    straight_ = GenerateReference(straight_track_, params_, bounds_, {});
    circle_track_ = MakeCircleTrack(50, 6.0);
    circle_ = GenerateReference(circle_track_, params_, bounds_, {});
  }

  ReferenceSlice StraightSlice(double x, int H = 20, double gamma = 0.0) const {
    return QueryReference(straight_, {x, 0, 0}, gamma, H, params_.dt);
  }

  VehicleParams params_;
  ActionBounds bounds_;
  Track straight_track_;
  ReferencePlan straight_;
  Track circle_track_;
  ReferencePlan circle_;
};

TEST(SelectOffsetsTest, ClosestToZeroInGridOrder) {
  FdConfig c;
  c.M = 1;
  EXPECT_EQ(SelectOffsets(c), std::vector<double>{0.0});
  c.M = 3;
  EXPECT_EQ(SelectOffsets(c), (std::vector<double>{-1.75, 0.0, 1.75}));
  c.M = 4;
  EXPECT_EQ(SelectOffsets(c), (std::vector<double>{-3.5, -1.75, 0.0, 1.75}));
  c.M = 6;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST_F(FdFixture, SingleCandidateIsTheSlice) {
  FdConfig c;
  c.M = 1;
  const ReferenceSlice slice = StraightSlice(20);
  const auto paths = SamplePaths(slice, straight_track_, c, params_);
  ASSERT_EQ(paths.size(), 1u);
  for (size_t h = 0; h < slice.states.size(); ++h) {
    EXPECT_NEAR(paths[0].waypoints[h].x, slice.states[h].x, 1e-12);
    EXPECT_NEAR(paths[0].waypoints[h].y, slice.states[h].y, 1e-12);
    EXPECT_NEAR(paths[0].waypoints[h].theta, slice.states[h].theta, 1e-9);
  }
}

TEST_F(FdFixture, ParallelLinesOnStraight) {
  FdConfig c;
  c.M = 3;
  c.offsets = {-1.5, 0.0, 1.5};
  const auto paths = SamplePaths(StraightSlice(20), straight_track_, c, params_);
  ASSERT_EQ(paths.size(), 3u);
  for (const auto& p : paths) {
    for (const auto& w : p.waypoints) {
      EXPECT_NEAR(w.y, p.offset, 1e-9);
      EXPECT_NEAR(w.theta, 0.0, 1e-9);
    }
  }
}

TEST_F(FdFixture, OffsetsOnCurveStayInsideWithTangentHeadings) {
  FdConfig c;
  c.M = 5;
  c.offsets = {-8.0, -2.0, 0.0, 2.0, 8.0};  // outer entries must be clipped
  const VehicleState pose = circle_.waypoints[30];
  const ReferenceSlice slice = QueryReference(circle_, pose, 0.0, 20, params_.dt);
  const auto paths = SamplePaths(slice, circle_track_, c, params_);
  const double limit = circle_track_.half_width - 0.5 * params_.width;
  const Polyline centerline = circle_track_.Centerline();
  for (const auto& p : paths) {
    const size_t n = p.waypoints.size();
    for (size_t h = 0; h < n; ++h) {
      const auto& w = p.waypoints[h];
      EXPECT_LE(std::abs(centerline.Project(w.position()).lateral), limit + 1e-6);
      // Tangent of a circle centered at (0, 50) traversed counter-clockwise.
      if (h > 0 && h + 1 < n) {
        const double tangent = std::atan2(w.y - 50.0, w.x) + M_PI / 2;
        EXPECT_NEAR(NormalizeAngle(w.theta - tangent), 0.0, 0.01);
      }
    }
  }
  EXPECT_GT(std::abs(paths[1].waypoints[5].x - paths[2].waypoints[5].x) +
                std::abs(paths[1].waypoints[5].y - paths[2].waypoints[5].y),
            1.0);
}

TEST_F(FdFixture, NarrowTrackGivesCenterlineOnly) {
  Track narrow = MakeStraightTrack(400, 0.9);
  const auto paths = SamplePaths(StraightSlice(20), narrow, FdConfig{}, params_);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].offset, 0.0);
}

TEST_F(FdFixture, StationaryTracking) {
  FdConfig c;
  c.M = 1;
  const ReferenceSlice slice = StraightSlice(50);
  const double v = slice.speeds[0];
  const auto path = SamplePaths(slice, straight_track_, c, params_)[0];
  const CandidateRollout r =
      TrackCandidate(path, slice.states[0], {v, 0.0}, bounds_, params_, c);
  for (const auto& u : r.inputs) {
    EXPECT_NEAR(u.v, v, 1e-4);
    EXPECT_NEAR(u.psi, 0.0, 1e-4);
  }
  EXPECT_LT(DeviationCost(r.states, slice), 1e-6);
  EXPECT_TRUE(r.within_epsilon);
}

TEST_F(FdFixture, LateralErrorDecays) {
  FdConfig c;
  c.M = 1;
  const ReferenceSlice slice = StraightSlice(50, 20);
  const auto path = SamplePaths(slice, straight_track_, c, params_)[0];
  const VehicleState start{slice.states[0].x, 1.0, 0.0};
  const CandidateRollout r =
      TrackCandidate(path, start, {slice.speeds[0], 0.0}, bounds_, params_, c);
  // Non-increasing until within 2 cm, then settled inside that band.
  bool settled = false;
  for (size_t h = 1; h < r.states.size(); ++h) {
    const double e = std::abs(r.states[h].y);
    if (settled) {
      EXPECT_LE(e, 0.02) << h;
    } else {
      EXPECT_LE(e, std::abs(r.states[h - 1].y)) << h;
      settled = e < 0.02;
    }
  }
  EXPECT_TRUE(settled);
}

TEST_F(FdFixture, SpeedClippedAtBound) {
  FdConfig c;
  c.M = 1;
  ActionBounds slow = bounds_;
  slow.u_max.v = 12.0;
  const ReferenceSlice slice = StraightSlice(50);  // reference at 20 m/s
  const auto path = SamplePaths(slice, straight_track_, c, params_)[0];
  const CandidateRollout r = TrackCandidate(path, slice.states[0], {12.0, 0.0}, slow, params_, c);
  for (const auto& u : r.inputs) EXPECT_DOUBLE_EQ(u.v, 12.0);
}

TEST(ClearanceTest, Examples) {
  const std::vector<VehicleState> states = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  EXPECT_TRUE(Clearance(states, {}, 2.0));
  const PointPredictions at_boundary = {{{0, 5}, {1, 2}, {2, 5}}};
  EXPECT_TRUE(Clearance(states, at_boundary, 2.0));
  const PointPredictions crossing = {{{0, 5}, {1, 0.1}, {2, -5}}};
  EXPECT_FALSE(Clearance(states, crossing, 2.0));
}

TEST_F(FdFixture, SelectsCenterWithoutObstacles) {
  FdPlanner planner(FdConfig{}, params_, bounds_, straight_track_);
  const ReferenceSlice slice = StraightSlice(30);
  const PlanResult r = planner.Plan(slice.states[0], {slice.speeds[0], 0.0}, slice, {});
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.selected_offset, 0.0);
  EXPECT_EQ(r.selected_id, 2);
}

TEST_F(FdFixture, SymmetricBlockPicksLowerId) {
  FdConfig c;
  c.M = 3;
  c.offsets = {-3.5, 0.0, 3.5};
  FdPlanner planner(c, params_, bounds_, straight_track_);
  const ReferenceSlice slice = StraightSlice(30);
  PointPredictions block(1);
  for (int h = 0; h <= 20; ++h) block[0].push_back({slice.states[0].x + 25.0, 0.0});
  const PlanResult r = planner.Plan(slice.states[0], {slice.speeds[0], 0.0}, slice, block);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.selected_id, 0);
  const auto& cands = planner.last_candidates();
  EXPECT_NEAR(DeviationCost(cands[0].states, slice), DeviationCost(cands[2].states, slice),
              1e-6);
}

TEST_F(FdFixture, EmptyFeasibleSetIsReported) {
  FdPlanner planner(FdConfig{}, params_, bounds_, straight_track_);
  const ReferenceSlice slice = StraightSlice(30);
  PointPredictions wall(1);
  for (int h = 0; h <= 20; ++h) wall[0].push_back(slice.states[0].position());
  const PlanResult r = planner.Plan(slice.states[0], {slice.speeds[0], 0.0}, slice, wall);
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.inputs.size(), 20u);
}

TEST_F(FdFixture, MatchesEnumerationWithBlockedPaths) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ahead(5.0, 40.0);
  std::uniform_int_distribution<int> lane(0, 4);
  FdConfig c;
  FdPlanner planner(c, params_, bounds_, straight_track_);
  const ReferenceSlice slice = StraightSlice(30);
  for (int trial = 0; trial < 10; ++trial) {
    PointPredictions obs(2);
    for (auto& o : obs) {
      const double x = slice.states[0].x + ahead(rng);
      const double y = c.offsets[static_cast<size_t>(lane(rng))];
      for (int h = 0; h <= 20; ++h) o.push_back({x + 8.0 * 0.1 * h, y});
    }
    planner.Reset();
    const PlanResult r = planner.Plan(slice.states[0], {slice.speeds[0], 0.0}, slice, obs);
    const auto oracle =
        testing::EnumerateAlpha(planner.last_candidates(), obs, slice, c.d_safe);
    EXPECT_EQ(r.feasible ? r.selected_id : -1, oracle.id);
    if (r.feasible) EXPECT_DOUBLE_EQ(r.deviation_cost, oracle.cost);
  }
}

TEST_F(FdFixture, PlanSatisfiesDynamicsAndBoundsExactly) {
  FdPlanner planner(FdConfig{}, params_, bounds_, straight_track_);
  const ReferenceSlice slice = StraightSlice(30);
  const ControlInput prev{15.0, 0.05};
  const VehicleState start{slice.states[0].x, 0.7, 0.1};
  const PlanResult r = planner.Plan(start, prev, slice, {});
  EXPECT_TRUE(CheckBounds(r.inputs, bounds_, &prev));
  for (size_t h = 0; h < r.inputs.size(); ++h) {
    const LinearizedDynamics lin = Linearize(r.states[h], r.inputs[h], params_);
    Eigen::Vector3d next = lin.Apply(r.states[h].AsVector(), r.inputs[h].AsVector());
    Eigen::Vector3d diff = next - r.states[h + 1].AsVector();
    diff(2) = NormalizeAngle(diff(2));
    EXPECT_LE(diff.norm(), 1e-9);
  }
}

TEST_F(FdFixture, WarmStartIsDeterministic) {
  FdPlanner a(FdConfig{}, params_, bounds_, straight_track_);
  FdPlanner b(FdConfig{}, params_, bounds_, straight_track_);
  const ReferenceSlice slice = StraightSlice(30);
  for (int k = 0; k < 3; ++k) {
    const PlanResult ra = a.Plan(slice.states[0], {slice.speeds[0], 0.0}, slice, {});
    const PlanResult rb = b.Plan(slice.states[0], {slice.speeds[0], 0.0}, slice, {});
    ASSERT_EQ(ra.inputs.size(), rb.inputs.size());
    for (size_t h = 0; h < ra.inputs.size(); ++h) {
      EXPECT_EQ(ra.inputs[h].v, rb.inputs[h].v);
      EXPECT_EQ(ra.inputs[h].psi, rb.inputs[h].psi);
    }
  }
}

}  // namespace
}  // namespace adaplan
