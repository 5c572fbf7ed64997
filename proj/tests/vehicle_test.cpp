#include "adaplan/vehicle.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace adaplan {
namespace {

VehicleParams Params(double wheelbase = 2.0, double dt = 0.1) {
  VehicleParams p;
  p.wheelbase = wheelbase;
  p.dt = dt;
  return p;
}

TEST(StepNonlinearTest, StraightAndAlignedMotion) {
  const VehicleState a = StepNonlinear({0, 0, 0}, {1.0, 0.0}, Params());
  EXPECT_NEAR(a.x, 0.1, 1e-15);
  EXPECT_NEAR(a.y, 0.0, 1e-15);
  EXPECT_NEAR(a.theta, 0.0, 1e-15);
  const VehicleState b = StepNonlinear({0, 0, std::numbers::pi / 2}, {1.0, 0.0}, Params());
  EXPECT_NEAR(b.x, 0.0, 1e-15);
  EXPECT_NEAR(b.y, 0.1, 1e-15);
  EXPECT_NEAR(b.theta, std::numbers::pi / 2, 1e-15);
}

TEST(StepNonlinearTest, HeadingRateFollowsAckermannFormula) {
  const VehicleState s = StepNonlinear({0, 0, 0}, {1.0, 0.1}, Params(2.0, 0.1));
  EXPECT_NEAR(s.theta, 0.1 * std::tan(0.1) / 2.0, 1e-15);
  EXPECT_NEAR(s.theta, 0.0050167, 1e-7);
}

TEST(StepNonlinearTest, KeepsHeadingNormalized) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> psi(-1.2, 1.2);
  VehicleState s{0, 0, 3.1};
  for (int i = 0; i < 2000; ++i) {
    s = StepNonlinear(s, {15.0, psi(rng)}, Params(2.7, 0.1));
    ASSERT_GT(s.theta, -std::numbers::pi);
    ASSERT_LE(s.theta, std::numbers::pi);
  }
}

TEST(StepNonlinearTest, RejectsSingularSteering) {
  EXPECT_THROW(StepNonlinear({0, 0, 0}, {1.0, std::numbers::pi / 2}, Params()),
               std::invalid_argument);
  EXPECT_THROW(Linearize({0, 0, 0}, {1.0, -2.0}, Params()), std::invalid_argument);
}

TEST(LinearizeTest, ExactAtExpansionPoint) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const VehicleState s{10 * u(rng), 10 * u(rng), 3 * u(rng)};
    const ControlInput c{10 + 10 * u(rng), 0.5 * u(rng)};
    const LinearizedDynamics lin = Linearize(s, c, Params(2.7));
    const Eigen::Vector3d lhs = lin.Apply(s.AsVector(), c.AsVector());
    EXPECT_TRUE(lhs.isApprox(StepUnwrapped(s.AsVector(), c, Params(2.7)), 1e-14));
  }
}

TEST(LinearizeTest, StraightReferenceJacobian) {
  const double v = 7.0;
  const double dt = 0.1;
  const LinearizedDynamics lin = Linearize({3, 4, 0}, {v, 0.0}, Params(2.7, dt));
  EXPECT_NEAR(lin.A(0, 2), 0.0, 1e-15);
  EXPECT_NEAR(lin.A(1, 2), v * dt, 1e-15);
  EXPECT_NEAR(lin.B(2, 1), v * dt / 2.7, 1e-15);
}

double LinearizationResidual(const VehicleState& s, const ControlInput& u,
                             const Eigen::Matrix<double, 5, 1>& dir, double delta,
                             const VehicleParams& p) {
  const LinearizedDynamics lin = Linearize(s, u, p);
  const Eigen::Vector3d ds = delta * dir.head<3>();
  const Eigen::Vector2d du = delta * dir.tail<2>();
  const Eigen::Vector3d s1 = s.AsVector() + ds;
  const ControlInput u1 = ControlInput::FromVector(u.AsVector() + du);
  return (lin.Apply(s1, u1.AsVector()) - StepUnwrapped(s1, u1, p)).norm();
}

TEST(LinearizeTest, ResidualIsSecondOrder) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const VehicleParams p = Params(2.7, 0.1);
  for (int i = 0; i < 20; ++i) {
    const VehicleState s{50 * u(rng), 50 * u(rng), 3 * u(rng)};
    const ControlInput c{10 + 8 * u(rng), 0.4 * u(rng)};
    Eigen::Matrix<double, 5, 1> dir;
    for (int k = 0; k < 5; ++k) dir(k) = u(rng);
    dir.normalize();
    const double r1 = LinearizationResidual(s, c, dir, 1e-3, p);
    const double r2 = LinearizationResidual(s, c, dir, 5e-4, p);
    const double ratio = r1 / r2;
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
  }
}

TEST(LinearizeTest, HorizonRolloutStaysCloseToNonlinear) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const VehicleParams p = Params(2.7, 0.1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ControlInput> nominal;
    for (int h = 0; h < 10; ++h) nominal.push_back({10 + 3 * u(rng), 0.25 * u(rng)});
    // Linearize along the nominal rollout, then replay a modified sequence.
    std::vector<Eigen::Vector3d> ref{Eigen::Vector3d(0, 0, u(rng))};
    for (const auto& c : nominal) ref.push_back(StepUnwrapped(ref.back(), c, p));
    Eigen::Vector3d lin_state = ref[0];
    Eigen::Vector3d true_state = ref[0];
    for (int h = 0; h < 10; ++h) {
      const ControlInput changed{nominal[h].v + 0.5 * u(rng),
                                 std::clamp(nominal[h].psi + 0.05 * u(rng), -0.3, 0.3)};
      const LinearizedDynamics lin = Linearize(VehicleState::FromVector(ref[h]), nominal[h], p);
      lin_state = lin.Apply(lin_state, changed.AsVector());
      true_state = StepUnwrapped(true_state, changed, p);
      EXPECT_LE((lin_state.head<2>() - true_state.head<2>()).norm(), 0.1);
    }
  }
}

TEST(CheckBoundsTest, InclusiveBoundaries) {
  ActionBounds b;
  b.u_min = {0.0, -0.5};
  b.u_max = {20.0, 0.5};
  b.a_min = {-1.0, -0.1};
  b.a_max = {0.5, 0.1};
  const std::vector<ControlInput> at_min(5, b.u_min);
  EXPECT_TRUE(CheckBounds(at_min, b));
  std::vector<ControlInput> ramp;
  for (int i = 0; i < 10; ++i) ramp.push_back({0.5 * i, -0.5 + 0.1 * i});
  EXPECT_TRUE(CheckBounds(ramp, b));
  const std::vector<ControlInput> jump = {{1.0, 0.0}, {1.6, 0.0}};
  EXPECT_FALSE(CheckBounds(jump, b));
  const std::vector<ControlInput> over = {{21.0, 0.0}};
  EXPECT_FALSE(CheckBounds(over, b));
  const ControlInput prev{0.0, 0.0};
  const std::vector<ControlInput> first = {{0.6, 0.0}};
  EXPECT_FALSE(CheckBounds(first, b, &prev));
}

TEST(ActionBoundsTest, ClampStepStaysInsideBothWindows) {
  ActionBounds b;
  const ControlInput prev{5.0, 0.05};
  const ControlInput c = b.ClampStep({9.0, -0.4}, prev);
  EXPECT_DOUBLE_EQ(c.v, 5.0 + b.a_max.v);
  EXPECT_DOUBLE_EQ(c.psi, 0.05 + b.a_min.psi);
  const std::vector<ControlInput> seq = {c};
  EXPECT_TRUE(CheckBounds(seq, b, &prev));
}

}  // namespace
}  // namespace adaplan
