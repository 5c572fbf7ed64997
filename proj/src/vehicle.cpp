#include "adaplan/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace adaplan {

namespace {

constexpr double kBoundTol = 1e-9;

void CheckSteering(double psi) {
  if (!(std::abs(psi) < 0.5 * std::numbers::pi)) {
    throw std::invalid_argument("steering angle must satisfy |psi| < pi/2");
  }
}

bool Within(double value, double lo, double hi) {
  return value >= lo - kBoundTol && value <= hi + kBoundTol;
}

}  // namespace

void ActionBounds::Validate() const {
  if (u_min.v > u_max.v || u_min.psi > u_max.psi) {
    throw std::invalid_argument("u_min must not exceed u_max");
  }
  if (a_min.v > 0.0 || a_max.v < 0.0 || a_min.psi > 0.0 || a_max.psi < 0.0) {
    throw std::invalid_argument("rate bounds must bracket zero");
  }
}

ControlInput ActionBounds::Clamp(const ControlInput& u) const {
  return {std::clamp(u.v, u_min.v, u_max.v), std::clamp(u.psi, u_min.psi, u_max.psi)};
}

ControlInput ActionBounds::ClampStep(const ControlInput& u, const ControlInput& prev) const {
  const double v_lo = std::max(u_min.v, prev.v + a_min.v);
  const double v_hi = std::min(u_max.v, prev.v + a_max.v);
  const double p_lo = std::max(u_min.psi, prev.psi + a_min.psi);
  const double p_hi = std::min(u_max.psi, prev.psi + a_max.psi);
  // An out-of-box `prev` can make the window empty; the box wins.
  return {v_lo <= v_hi ? std::clamp(u.v, v_lo, v_hi) : std::clamp(u.v, u_min.v, u_max.v),
          p_lo <= p_hi ? std::clamp(u.psi, p_lo, p_hi)
                       : std::clamp(u.psi, u_min.psi, u_max.psi)};
}

void VehicleParams::Validate() const {
  if (!(wheelbase > 0.0) || !(dt > 0.0) || !(length > 0.0) || !(width > 0.0)) {
    throw std::invalid_argument("vehicle parameters must be positive");
  }
}

Eigen::Vector3d StepUnwrapped(const Eigen::Vector3d& s, const ControlInput& u,
                              const VehicleParams& params) {
  CheckSteering(u.psi);
  const double dt = params.dt;
  return {s(0) + u.v * std::cos(s(2)) * dt, s(1) + u.v * std::sin(s(2)) * dt,
          s(2) + u.v * std::tan(u.psi) / params.wheelbase * dt};
}

VehicleState StepNonlinear(const VehicleState& s, const ControlInput& u,
                           const VehicleParams& params) {
  if (!s.AsVector().allFinite() || !std::isfinite(u.v) || !std::isfinite(u.psi)) {
    throw std::invalid_argument("non-finite state or input");
  }
  Eigen::Vector3d next = StepUnwrapped(s.AsVector(), u, params);
  next(2) = NormalizeAngle(next(2));
  return VehicleState::FromVector(next);
}

LinearizedDynamics Linearize(const VehicleState& s_ref, const ControlInput& u_ref,
                             const VehicleParams& params) {
  CheckSteering(u_ref.psi);
  const double dt = params.dt;
  const double ct = std::cos(s_ref.theta);
  const double st = std::sin(s_ref.theta);
  const double cp = std::cos(u_ref.psi);
  LinearizedDynamics lin;
  lin.A = Eigen::Matrix3d::Identity();
  lin.A(0, 2) = -u_ref.v * st * dt;
  lin.A(1, 2) = u_ref.v * ct * dt;
  lin.B.setZero();
  lin.B(0, 0) = ct * dt;
  lin.B(1, 0) = st * dt;
  lin.B(2, 0) = std::tan(u_ref.psi) / params.wheelbase * dt;
  lin.B(2, 1) = u_ref.v / (params.wheelbase * cp * cp) * dt;
  const Eigen::Vector3d s = s_ref.AsVector();
  const Eigen::Vector2d u = u_ref.AsVector();
  lin.c = StepUnwrapped(s, u_ref, params) - lin.A * s - lin.B * u;
  return lin;
}

bool CheckBounds(std::span<const ControlInput> u_seq, const ActionBounds& bounds,
                 const ControlInput* prev) {
  const ControlInput* last = prev;
  for (const auto& u : u_seq) {
    if (!Within(u.v, bounds.u_min.v, bounds.u_max.v) ||
        !Within(u.psi, bounds.u_min.psi, bounds.u_max.psi)) {
      return false;
    }
    if (last != nullptr && (!Within(u.v - last->v, bounds.a_min.v, bounds.a_max.v) ||
                            !Within(u.psi - last->psi, bounds.a_min.psi, bounds.a_max.psi))) {
      return false;
    }
    last = &u;
  }
  return true;
}

ConvexPolytope Footprint(const VehicleParams& params) {
  return RectanglePolytope(params.length, params.width);
}

}  // namespace adaplan
