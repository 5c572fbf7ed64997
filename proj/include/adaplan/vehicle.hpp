#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "adaplan/geometry.hpp"

namespace adaplan {

/// Pose s = [x, y, theta].
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Eigen::Vector3d AsVector() const { return {x, y, theta}; }
  static VehicleState FromVector(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
  Vec2 position() const { return {x, y}; }
  RigidPose2 pose() const { return RigidPose2(position(), theta); }
};

/// Action u = [v, psi]. psi is the front-wheel steering angle.
struct ControlInput {
  double v = 0.0;
  double psi = 0.0;

  Eigen::Vector2d AsVector() const { return {v, psi}; }
  static ControlInput FromVector(const Eigen::Vector2d& u) { return {u(0), u(1)}; }
};

/// Box bounds on u and per-step bounds on u_{k+1} - u_k.
struct ActionBounds {
  ControlInput u_min{0.0, -0.5};
  ControlInput u_max{20.0, 0.5};
  ControlInput a_min{-0.8, -0.1};
  ControlInput a_max{0.5, 0.1};

  void Validate() const;
  ControlInput Clamp(const ControlInput& u) const;
  /// Clamp `u` into the box and into the rate window around `prev`.
  ControlInput ClampStep(const ControlInput& u, const ControlInput& prev) const;
};

struct VehicleParams {
  double wheelbase = 2.7;
  double dt = 0.1;
  double length = 4.5;
  double width = 2.0;

  void Validate() const;
};

/// s_{k+1} = A s_k + B u_k + c, valid around the expansion point.
struct LinearizedDynamics {
  Eigen::Matrix3d A;
  Eigen::Matrix<double, 3, 2> B;
  Eigen::Vector3d c;

  Eigen::Vector3d Apply(const Eigen::Vector3d& s, const Eigen::Vector2d& u) const {
    return A * s + B * u + c;
  }
};

/// Forward-Euler Ackermann step with heading renormalized.
VehicleState StepNonlinear(const VehicleState& s, const ControlInput& u,
                           const VehicleParams& params);
/// Same step, heading left unwrapped (continuous along a rollout).
Eigen::Vector3d StepUnwrapped(const Eigen::Vector3d& s, const ControlInput& u,
                              const VehicleParams& params);

/// Jacobian linearization of StepUnwrapped at (s_ref, u_ref).
LinearizedDynamics Linearize(const VehicleState& s_ref, const ControlInput& u_ref,
                             const VehicleParams& params);

/// Inclusive check of the box and rate bounds. When `prev` is given the
/// first element is also rate-checked against it.
bool CheckBounds(std::span<const ControlInput> u_seq, const ActionBounds& bounds,
                 const ControlInput* prev = nullptr);

ConvexPolytope Footprint(const VehicleParams& params);

}  // namespace adaplan
