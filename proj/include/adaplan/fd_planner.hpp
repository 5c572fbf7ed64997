#pragma once

#include <optional>
#include <vector>

#include "adaplan/planning.hpp"
#include "adaplan/reference.hpp"

namespace adaplan {

struct FdConfig {
  int M = 5;
  int H = 20;
  double epsilon = 0.3;
  double d_safe = 2.0;
  std::vector<double> offsets{-3.5, -1.75, 0.0, 1.75, 3.5};
  int passes = 2;
  TrackingWeights weights;

  void Validate() const;
};

struct CandidatePath {
  int id = 0;
  double offset = 0.0;
  std::vector<VehicleState> waypoints;  // h = 0..H
  std::vector<double> speeds;           // h = 0..H
};

struct CandidateRollout {
  CandidatePath path;
  std::vector<VehicleState> states;
  std::vector<ControlInput> inputs;
  double adherence = 0.0;  // max_h ||s_h - w_h||, position only
  bool within_epsilon = false;
  int qp_iterations = 0;
};

/// The M offsets of the grid closest to zero, in grid order.
std::vector<double> SelectOffsets(const FdConfig& config);

/// Signed lateral position of each slice state relative to the track
/// centerline (left positive).
std::vector<double> SliceLaterals(const ReferenceSlice& slice, const Track& track);

/// The slice shifted sideways by `offset`, with each point clipped to
/// |lateral| <= limit (no clipping when limit <= 0) and headings re-tangented.
CandidatePath OffsetPath(const ReferenceSlice& slice, const std::vector<double>& laterals,
                         double limit, double offset, int id);

/// Laterally offset copies of the slice, clipped so the footprint stays on
/// the track. Headings are recomputed from the offset points. A track too
/// narrow for any offset yields the centerline candidate alone.
std::vector<CandidatePath> SamplePaths(const ReferenceSlice& slice, const Track& track,
                                       const FdConfig& config, const VehicleParams& params);

CandidateRollout TrackCandidate(const CandidatePath& path, const VehicleState& s0,
                                const ControlInput& prev, const ActionBounds& bounds,
                                const VehicleParams& params, const FdConfig& config,
                                const std::vector<ControlInput>* warm = nullptr);

/// Smallest center distance between states and predictions over all i, h.
double PointClearance(const std::vector<VehicleState>& states, const PointPredictions& obstacles);
/// Inclusive: true iff PointClearance >= d_safe.
bool Clearance(const std::vector<VehicleState>& states, const PointPredictions& obstacles,
               double d_safe);

/// Sum over h of ||s_h - ref_h||^2 with headings compared mod 2 pi.
double DeviationCost(const std::vector<VehicleState>& states, const ReferenceSlice& slice);

/// One-hot enumeration over alpha: the cheapest clear candidate, ties by
/// |offset| then id. Empty feasible set gives feasible=false and the
/// candidate with the most clearance.
PlanResult TreeSearchSelect(const std::vector<CandidateRollout>& candidates,
                            const PointPredictions& obstacles, const ReferenceSlice& slice,
                            double d_safe);

class FdPlanner {
 public:
  FdPlanner(FdConfig config, VehicleParams params, ActionBounds bounds, Track track);

  PlanResult Plan(const VehicleState& s0, const ControlInput& prev, const ReferenceSlice& slice,
                  const PointPredictions& obstacles);
  void Reset() { warm_.clear(); }
  const FdConfig& config() const { return config_; }
  const std::vector<CandidateRollout>& last_candidates() const { return last_; }

 private:
  FdConfig config_;
  VehicleParams params_;
  ActionBounds bounds_;
  Track track_;
  std::vector<std::vector<ControlInput>> warm_;  // per candidate id
  std::vector<CandidateRollout> last_;
};

}  // namespace adaplan
