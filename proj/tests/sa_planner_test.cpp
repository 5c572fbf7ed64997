#include "adaplan/sa_planner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace adaplan {
namespace {

ObstacleForecast Car(double x, double y, double vx = 0.0) {
  return {TransformToWorld(RectanglePolytope(4.5, 2.0), RigidPose2(Vec2(x, y), 0.0)),
          Vec2(vx, 0.0)};
}

class SaFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    track_ = MakeStraightTrack(600, 5.25);
    plan_ = GenerateReference(track_, params_, bounds_, {});
  }

  ReferenceSlice Slice(double x, int H, double gamma = 0.0) const {
    return QueryReference(plan_, {x, 0, 0}, gamma, H, params_.dt);
  }

  double MinShapeDistance(const std::vector<VehicleState>& states,
                          const ShapePredictions& obs) const {
    return PathShapeClearance(states, obs, Footprint(params_));
  }

  VehicleParams params_;
  ActionBounds bounds_;
  Track track_;
  ReferencePlan plan_;
};

TEST_F(SaFixture, DualSubproblemMatchesDistanceOracle) {
  const ConvexPolytope body = Footprint(params_);
  const std::vector<VehicleState> states = {{0, 0, 0.0}, {2, 0.3, 0.2}, {4, 0.5, -0.4}};
  const ShapePredictions obs = PredictShapes({Car(30, 1.0), Car(8, 6.0)}, 2, 0.1);
  const DualSet d = SolveDualSubproblem(states, obs, body, 0.5);
  ASSERT_EQ(d.margins.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    for (size_t h = 0; h < 3; ++h) {
      const ConvexPolytope ego = TransformToWorld(body, states[h].pose());
      const double oracle =
          testing::SupportSamplingDistance(ego.vertices(), obs[i][h].vertices());
      EXPECT_NEAR(d.margins[i][h], oracle, 1e-6);
      EXPECT_TRUE(DualCertificateFeasible(body, states[h].pose(), obs[i][h], d.duals[i][h], 0.5,
                                          1e-9));
    }
  }
  EXPECT_EQ(d.residual, 0.0);
}

TEST_F(SaFixture, DualSubproblemOverlapAndEmpty) {
  const ConvexPolytope body = Footprint(params_);
  const std::vector<VehicleState> states = {{0, 0, 0}};
  const ShapePredictions obs = PredictShapes({Car(1.0, 0.5)}, 0, 0.1);
  const DualSet d = SolveDualSubproblem(states, obs, body, 0.5);
  EXPECT_LT(d.margins[0][0], 0.0);
  EXPECT_GT(d.residual, 0.5);
  const Vec2 w = obs[0][0].normals().transpose() * d.duals[0][0].lambda;
  EXPECT_LE(w.norm(), 1.0 + 1e-8);
  EXPECT_GE(d.duals[0][0].lambda.minCoeff(), 0.0);
  EXPECT_GE(d.duals[0][0].mu.minCoeff(), 0.0);

  const DualSet none = SolveDualSubproblem(states, {}, body, 0.5);
  EXPECT_TRUE(none.duals.empty());
  EXPECT_EQ(none.residual, 0.0);
}

TEST_F(SaFixture, DualSubproblemIsOrderIndependent) {
  const ConvexPolytope body = Footprint(params_);
  std::vector<VehicleState> states;
  for (int h = 0; h <= 10; ++h) states.push_back({2.0 * h, 0.1 * h, 0.05 * h});
  const std::vector<ObstacleForecast> a = {Car(12, 3, 5), Car(20, -3, 2), Car(5, 4, 0)};
  std::vector<ObstacleForecast> b = {a[2], a[0], a[1]};
  const DualSet da = SolveDualSubproblem(states, PredictShapes(a, 10, 0.1), body, 0.5);
  const DualSet db = SolveDualSubproblem(states, PredictShapes(b, 10, 0.1), body, 0.5);
  const int perm[3] = {1, 2, 0};
  for (int i = 0; i < 3; ++i) {
    for (int h = 0; h <= 10; ++h) {
      EXPECT_EQ(da.margins[i][h], db.margins[perm[i]][h]);
    }
  }
  EXPECT_EQ(da.residual, db.residual);
}

TEST_F(SaFixture, MotionWithoutObstaclesIsTracking) {
  SaConfig c;
  const ReferenceSlice slice = Slice(50, c.H);
  const TrackingTargets targets = TargetsFromSlice(slice);
  const ControlInput prev{slice.speeds[0], 0.0};
  Motion ref;
  ref.inputs = NominalFromTargets(targets, bounds_, params_, prev);
  ref.states = Rollout(slice.states[0], ref.inputs, params_);
  const MotionResult r = SolveMotionSubproblem(DualSet{}, slice.states[0], prev, targets, {},
                                               bounds_, params_, ref, c);
  EXPECT_EQ(r.active_pairs, 0);
  EXPECT_LT(r.objective_at_solution, 1e-6);
}

TEST_F(SaFixture, MotionSpeedShift) {
  SaConfig c;
  const double v0 = 2.0;
  for (double gamma : {0.0, -v0}) {
    const ReferenceSlice slice = Slice(50, c.H, gamma);
    const TrackingTargets targets = TargetsFromSlice(slice);
    const ControlInput prev{20.0 + gamma, 0.0};
    Motion ref;
    ref.inputs = NominalFromTargets(targets, bounds_, params_, prev);
    ref.states = Rollout(slice.states[0], ref.inputs, params_);
    const MotionResult r = SolveMotionSubproblem(DualSet{}, slice.states[0], prev, targets, {},
                                                 bounds_, params_, ref, c);
    for (const auto& u : r.motion.inputs) EXPECT_NEAR(u.v, 20.0 + gamma, 1e-4);
  }
}

TEST_F(SaFixture, MotionRespectsActiveDuals) {
  SaConfig c;
  const ReferenceSlice slice = Slice(50, c.H);
  const TrackingTargets targets = TargetsFromSlice(slice);
  const ControlInput prev{15.0, 0.0};
  // Obstacle ahead in lane, moving slower; tracking alone would hit it.
  const ShapePredictions obs = PredictShapes({Car(66, 0.0, 5.0)}, c.H, params_.dt);
  const VehicleState s0 = slice.states[0];
  Motion ref;
  ref.inputs = NominalFromTargets(targets, bounds_, params_, prev);
  ref.states = Rollout(s0, ref.inputs, params_);
  const ConvexPolytope body = Footprint(params_);
  const DualSet duals = SolveDualSubproblem(ref.states, obs, body, c.d_safe);
  ASSERT_GT(duals.residual, 0.0);
  const MotionResult r =
      SolveMotionSubproblem(duals, s0, prev, targets, obs, bounds_, params_, ref, c);
  EXPECT_GE(MinShapeDistance(r.motion.states, obs), c.d_safe - 1e-3);
  EXPECT_LE(r.objective_at_solution,
            r.objective_at_reference + 1e-6 * (1.0 + std::abs(r.objective_at_reference)));
}

TEST_F(SaFixture, AmObstacleFreeConvergesImmediately) {
  SaConfig c;
  const ReferenceSlice slice = Slice(50, c.H);
  const AmOutcome out = AmSolve(slice.states[0], {slice.speeds[0], 0.0}, TargetsFromSlice(slice),
                                {}, bounds_, params_, c);
  EXPECT_TRUE(out.plan.feasible);
  EXPECT_EQ(out.plan.residual, 0.0);
  EXPECT_EQ(out.state.iterations_to_tolerance, 0);
  EXPECT_LT(out.plan.deviation_cost, 1e-6);
}

TEST_F(SaFixture, AmObjectiveMonotoneAndWarmStartNoSlower) {
  SaConfig c;
  const ReferenceSlice slice = Slice(50, c.H);
  const TrackingTargets targets = TargetsFromSlice(slice);
  const ShapePredictions obs =
      PredictShapes({Car(68, 0.0, 8.0), Car(75, 3.5, 10.0), Car(60, -3.5, 9.0)}, c.H, params_.dt);
  const ControlInput prev{16.0, 0.0};
  const AmOutcome cold = AmSolve(slice.states[0], prev, targets, obs, bounds_, params_, c);
  for (size_t k = 0; k < cold.plan.objective_at_solution.size(); ++k) {
    const double ref = cold.plan.objective_at_reference[k];
    EXPECT_LE(cold.plan.objective_at_solution[k], ref + 1e-6 * (1.0 + std::abs(ref))) << k;
  }
  EXPECT_TRUE(cold.plan.feasible) << cold.plan.residual;
  EXPECT_LE(cold.plan.residual, 1e-3);
  const AmOutcome warm =
      AmSolve(slice.states[0], prev, targets, obs, bounds_, params_, c, &cold.state);
  ASSERT_GE(cold.state.iterations_to_tolerance, 0);
  ASSERT_GE(warm.state.iterations_to_tolerance, 0);
  EXPECT_LE(warm.state.iterations_to_tolerance, cold.state.iterations_to_tolerance);
}

TEST_F(SaFixture, PlannerSwervesAroundStaticBlocker) {
  SaConfig c;
  SaPlanner planner(c, params_, bounds_, track_);
  const ReferenceQuery query(plan_);
  const std::vector<ObstacleForecast> obstacles = {Car(80, 0.0)};
  const ShapePredictions world = PredictShapes(obstacles, 0, 0.1);
  VehicleState s{40, 0, 0};
  ControlInput u{15, 0};
  double closest = 1e9;
  double max_lateral = 0.0;
  for (int k = 0; k < 60; ++k) {
    const PlanResult p = planner.Plan(s, u, query, 0.0, obstacles);
    if (p.feasible) {
      // Certified at the plan's own states.
      for (size_t h = 0; h < p.states.size(); ++h) {
        const double d = MinDistance(TransformToWorld(Footprint(params_), p.states[h].pose()),
                                     world[0][0]);
        EXPECT_GE(d, c.d_safe - 1e-2);
      }
    }
    u = p.inputs[0];
    s = StepNonlinear(s, u, params_);
    closest = std::min(
        closest, MinDistance(TransformToWorld(Footprint(params_), s.pose()), world[0][0]));
    max_lateral = std::max(max_lateral, std::abs(s.y));
  }
  EXPECT_GT(s.x, 100.0);
  EXPECT_GT(max_lateral, 2.0);
  EXPECT_GE(closest, c.d_safe - 1e-2);
}

TEST(SaConfigTest, Validation) {
  SaConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.am_iterations = 1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c.am_iterations = 3;
  c.d_safe = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace adaplan
