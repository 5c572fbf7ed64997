#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "adaplan/fd_planner.hpp"
#include "adaplan/geometry.hpp"
#include "adaplan/planning.hpp"
#include "adaplan/reference.hpp"

namespace adaplan {

struct SaConfig {
  int H = 10;
  double d_safe = 0.5;
  int am_iterations = 3;
  double residual_tol = 1e-3;
  double trust_region = 0.2;    // rad, on heading changes per AM step
  double slack_weight = 1e4;
  double inner_buffer = 0.05;   // m added to d_safe inside the motion subproblem
  double active_range = 12.0;   // m; pairs certified farther than this are dropped
  double convergence_tol = 1e-4;
  TrackingWeights weights;
  // Corridor pre-selection.
  bool corridor = true;
  std::vector<double> lane_offsets{-3.5, 0.0, 3.5};
  int preview_steps = 30;
  double lane_margin = 1.0;
  double lane_hysteresis = 0.5;
  // Reference speeds are clipped here (m/s); infinite means no cap.
  double speed_cap = std::numeric_limits<double>::infinity();

  void Validate() const;
};

/// Duals and margins for every (i, h), h = 0..H.
struct DualSet {
  std::vector<std::vector<DualVariables>> duals;
  std::vector<std::vector<double>> margins;
  double residual = 0.0;  // max over pairs of max(0, d_safe - margin)
  int failures = 0;
};

/// Motion block {s, u} of the alternating scheme.
struct Motion {
  std::vector<VehicleState> states;   // h = 0..H
  std::vector<ControlInput> inputs;   // h = 0..H-1
};

struct MotionResult {
  Motion motion;
  double objective_at_reference = 0.0;  // subproblem objective at the linearization point
  double objective_at_solution = 0.0;
  double max_slack = 0.0;
  int qp_iterations = 0;
  int active_pairs = 0;
};

/// Max-margin duals for each pair at the poses of `states`. A pair whose
/// computation fails keeps its entry from `previous` (when given) and is
/// counted in `failures`.
DualSet SolveDualSubproblem(const std::vector<VehicleState>& states,
                            const ShapePredictions& obstacles, const ConvexPolytope& ego_body,
                            double d_safe, const DualSet* previous = nullptr);

/// Convex motion block with duals fixed. The certificate rows are imposed at
/// every body vertex, with the rotation linearized around `reference`
/// headings inside a trust region. Rows carry a slack penalized linearly.
MotionResult SolveMotionSubproblem(const DualSet& duals, const VehicleState& s0,
                                   const ControlInput& prev, const TrackingTargets& targets,
                                   const ShapePredictions& obstacles, const ActionBounds& bounds,
                                   const VehicleParams& params, const Motion& reference,
                                   const SaConfig& config);

struct SaState {
  Motion motion;
  DualSet duals;
  int iterations = 0;
  int iterations_to_tolerance = -1;  // motion solves until residual <= tol, -1 if never
  double residual = 0.0;
};

struct AmOutcome {
  PlanResult plan;
  SaState state;
};

/// Alternating minimization between motion and duals. Starts from the
/// shifted warm start, or from a pure tracking solve on the first frame.
AmOutcome AmSolve(const VehicleState& s0, const ControlInput& prev, const TrackingTargets& targets,
                  const ShapePredictions& obstacles, const ActionBounds& bounds,
                  const VehicleParams& params, const SaConfig& config,
                  const SaState* warm_start = nullptr);

/// Targets from a reference slice (entries 0..H, speeds 0..H-1).
TrackingTargets TargetsFromSlice(const ReferenceSlice& slice);

/// Full-shape clearance of a path of poses against predicted shapes.
double PathShapeClearance(const std::vector<VehicleState>& path, const ShapePredictions& obstacles,
                          const ConvexPolytope& ego_body);

class SaPlanner {
 public:
  SaPlanner(SaConfig config, VehicleParams params, ActionBounds bounds, Track track);

  PlanResult Plan(const VehicleState& s0, const ControlInput& prev, const ReferenceQuery& query,
                  double gamma, const std::vector<ObstacleForecast>& obstacles);
  void Reset();

  const SaConfig& config() const { return config_; }
  const SaState& last_state() const { return state_; }
  const ShapePredictions& last_predictions() const { return predictions_; }
  double lane_offset() const { return lane_offset_; }

 private:
  double SelectLane(const ReferenceSlice& preview, const std::vector<ObstacleForecast>& obstacles);

  SaConfig config_;
  VehicleParams params_;
  ActionBounds bounds_;
  Track track_;
  ConvexPolytope body_;
  SaState state_;
  bool has_state_ = false;
  double lane_offset_ = 0.0;
  ShapePredictions predictions_;
};

}  // namespace adaplan
