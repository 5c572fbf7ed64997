#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "adaplan/qp.hpp"
#include "adaplan/reference.hpp"
#include "adaplan/vehicle.hpp"

namespace adaplan {

/// Predicted obstacle centers, indexed [obstacle][h] for h = 0..H.
using PointPredictions = std::vector<std::vector<Vec2>>;
/// Predicted obstacle sets in the world frame, indexed [obstacle][h].
using ShapePredictions = std::vector<std::vector<ConvexPolytope>>;

/// Observed obstacle: current world-frame shape and velocity.
struct ObstacleForecast {
  ConvexPolytope shape;
  Vec2 velocity = Vec2::Zero();
};

/// Constant-velocity translation, orientation held fixed.
ShapePredictions PredictShapes(const std::vector<ObstacleForecast>& obstacles, int horizon,
                               double dt);
/// Same prediction reduced to shape centroids.
PointPredictions PredictCenters(const std::vector<ObstacleForecast>& obstacles, int horizon,
                                double dt);

/// Weights of the tracking cost. The defaults are the unit weights of the
/// plain tracking objective; `steer` and `steer_rate` are small regularizers
/// that keep the condensed Hessian positive definite at low speed.
struct TrackingWeights {
  double position = 1.0;
  double heading = 1.0;
  double speed = 1.0;
  double steer = 1e-3;
  double steer_rate = 1e-2;
};

/// Output shared by both planning modes.
struct PlanResult {
  std::vector<VehicleState> states;   // h = 0..H
  std::vector<ControlInput> inputs;   // h = 0..H-1
  bool feasible = false;
  int selected_id = -1;               // FD candidate id, -1 otherwise
  double selected_offset = 0.0;
  double deviation_cost = 0.0;
  double min_clearance = 0.0;
  // SA diagnostics.
  int am_iterations = 0;
  double residual = 0.0;
  double max_slack = 0.0;
  std::vector<double> objective_at_reference;
  std::vector<double> objective_at_solution;
  int qp_iterations = 0;
  double solve_ms = 0.0;
};

/// Stacked prediction s_{1..H} = s_bar + G (U - U_bar) of the dynamics
/// linearized along the rollout of nominal inputs from s_0.
class CondensedModel {
 public:
  CondensedModel(const VehicleState& s0, const std::vector<ControlInput>& nominal,
                 const VehicleParams& params);

  int horizon() const { return horizon_; }
  /// Nominal rollout h = 0..H, heading unwrapped.
  const std::vector<Eigen::Vector3d>& nominal_states() const { return nominal_states_; }
  const Eigen::VectorXd& nominal_inputs() const { return nominal_inputs_; }
  /// 3H x 2H sensitivity of s_{1..H} to U.
  const Eigen::MatrixXd& G() const { return G_; }
  Eigen::VectorXd Predict(const Eigen::VectorXd& U) const;

 private:
  int horizon_;
  std::vector<Eigen::Vector3d> nominal_states_;
  Eigen::VectorXd nominal_stack_;  // s_bar_{1..H}
  Eigen::VectorXd nominal_inputs_;
  Eigen::MatrixXd G_;
};

/// Dense constraint rows l <= a x <= u, assembled into a QpProblem.
class ConstraintRows {
 public:
  explicit ConstraintRows(int num_variables) : n_(num_variables) {}
  void Add(const Eigen::RowVectorXd& row, double lo, double hi);
  int size() const { return static_cast<int>(lo_.size()); }
  int width() const { return n_; }
  void Fill(QpProblem& qp) const;

 private:
  int n_;
  std::vector<Eigen::RowVectorXd> rows_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

struct TrackingTargets {
  std::vector<VehicleState> states;  // h = 0..H (entry 0 is not penalized)
  std::vector<double> speeds;        // h = 0..H-1
};

/// Quadratic tracking cost 1/2 U^T P U + q^T U + const on the first 2H
/// variables of an n-variable problem.
struct QuadraticCost {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double constant = 0.0;
};
QuadraticCost TrackingCost(const CondensedModel& model, const TrackingTargets& targets,
                           const TrackingWeights& weights, int num_variables);

/// Box and rate rows for U (first 2H variables); the first rate row is taken
/// against `prev`.
void AddInputRows(ConstraintRows& rows, int horizon, const ActionBounds& bounds,
                  const ControlInput& prev);

/// Projects an input sequence onto box and rate bounds sequentially from
/// `prev`, so the result satisfies them exactly.
std::vector<ControlInput> ClampSequence(const std::vector<ControlInput>& inputs,
                                        const ActionBounds& bounds, const ControlInput& prev);

/// Nonlinear rollout h = 0..H; headings normalized.
std::vector<VehicleState> Rollout(const VehicleState& s0, const std::vector<ControlInput>& inputs,
                                  const VehicleParams& params);

/// Tracking cost of a plan against targets, headings compared mod 2 pi.
double TrackingCostOf(const std::vector<VehicleState>& states,
                      const std::vector<ControlInput>& inputs, const TrackingTargets& targets,
                      const TrackingWeights& weights);

/// Nominal inputs for a cold start: target speeds, steering from the
/// reference curvature.
std::vector<ControlInput> NominalInputs(const ReferenceSlice& slice, const ActionBounds& bounds,
                                        const VehicleParams& params, const ControlInput& prev);

/// Nominal inputs for a cold start from targets: target speeds, steering
/// from the heading change between consecutive targets.
std::vector<ControlInput> NominalFromTargets(const TrackingTargets& targets,
                                             const ActionBounds& bounds,
                                             const VehicleParams& params,
                                             const ControlInput& prev);

std::vector<ControlInput> ShiftInputs(const std::vector<ControlInput>& previous, int horizon);

Eigen::VectorXd StackInputs(const std::vector<ControlInput>& inputs);
std::vector<ControlInput> UnstackInputs(const Eigen::VectorXd& U, int horizon);

struct TrackingResult {
  std::vector<VehicleState> states;
  std::vector<ControlInput> inputs;
  double cost = 0.0;
  int qp_iterations = 0;
};

/// Convex MPC tracking: re-linearizes `passes` times around the rollout of the
/// previous pass, each pass a condensed QP under box and rate bounds.
TrackingResult TrackTargets(const VehicleState& s0, const ControlInput& prev,
                            const TrackingTargets& targets, const ActionBounds& bounds,
                            const VehicleParams& params, const TrackingWeights& weights,
                            std::vector<ControlInput> nominal, int passes,
                            const QpSettings& qp_settings = {});

}  // namespace adaplan
