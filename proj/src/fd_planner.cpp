#include "adaplan/fd_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace adaplan {

namespace {

constexpr double kTieTol = 1e-9;

bool NearlyEqual(double a, double b) {
  return std::abs(a - b) <= kTieTol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

void FdConfig::Validate() const {
  if (M < 1) throw std::invalid_argument("fd.M must be at least 1");
  if (H < 1) throw std::invalid_argument("fd.H must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("fd.epsilon must be positive");
  if (!(d_safe > 0.0)) throw std::invalid_argument("fd.d_safe must be positive");
  if (static_cast<size_t>(M) > offsets.size()) {
    throw std::invalid_argument("fd.M exceeds the offset grid size");
  }
  if (std::find(offsets.begin(), offsets.end(), 0.0) == offsets.end()) {
    throw std::invalid_argument("fd.offsets must contain 0");
  }
  if (passes < 1) throw std::invalid_argument("fd.passes must be at least 1");
}

std::vector<double> SelectOffsets(const FdConfig& config) {
  std::vector<size_t> idx(config.offsets.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return std::abs(config.offsets[a]) < std::abs(config.offsets[b]);
  });
  idx.resize(std::min<size_t>(idx.size(), static_cast<size_t>(config.M)));
  std::sort(idx.begin(), idx.end());
  std::vector<double> out;
  for (size_t i : idx) out.push_back(config.offsets[i]);
  return out;
}

std::vector<double> SliceLaterals(const ReferenceSlice& slice, const Track& track) {
  const Polyline centerline = track.Centerline();
  std::vector<double> lateral;
  lateral.reserve(slice.states.size());
  for (const auto& st : slice.states) lateral.push_back(centerline.Project(st.position()).lateral);
  return lateral;
}

CandidatePath OffsetPath(const ReferenceSlice& slice, const std::vector<double>& laterals,
                         double limit, double offset, int id) {
  const int n = static_cast<int>(slice.states.size());
  CandidatePath path;
  path.id = id;
  path.offset = offset;
  path.speeds = slice.speeds;
  for (int h = 0; h < n; ++h) {
    const VehicleState& r = slice.states[h];
    double shift = offset;
    if (limit > 0.0) shift = std::clamp(laterals[h] + offset, -limit, limit) - laterals[h];
    const Vec2 normal(-std::sin(r.theta), std::cos(r.theta));
    const Vec2 p = r.position() + shift * normal;
    path.waypoints.push_back({p.x(), p.y(), r.theta});
  }
  // Re-tangent headings from the offset points.
  for (int h = 0; h < n; ++h) {
    const int a = std::max(0, h - 1);
    const int b = std::min(n - 1, h + 1);
    const Vec2 d = path.waypoints[b].position() - path.waypoints[a].position();
    if (d.norm() > 1e-6) path.waypoints[h].theta = std::atan2(d.y(), d.x());
  }
  return path;
}

std::vector<CandidatePath> SamplePaths(const ReferenceSlice& slice, const Track& track,
                                       const FdConfig& config, const VehicleParams& params) {
  const double limit = track.half_width - 0.5 * params.width;
  std::vector<double> offsets = SelectOffsets(config);
  if (limit <= 0.0) offsets = {0.0};
  const std::vector<double> laterals = SliceLaterals(slice, track);
  std::vector<CandidatePath> paths;
  for (size_t m = 0; m < offsets.size(); ++m) {
    paths.push_back(OffsetPath(slice, laterals, limit, offsets[m], static_cast<int>(m)));
  }
  return paths;
}

CandidateRollout TrackCandidate(const CandidatePath& path, const VehicleState& s0,
                                const ControlInput& prev, const ActionBounds& bounds,
                                const VehicleParams& params, const FdConfig& config,
                                const std::vector<ControlInput>* warm) {
  const int H = static_cast<int>(path.waypoints.size()) - 1;
  if (H < 1) throw std::invalid_argument("candidate path needs at least two waypoints");
  TrackingTargets targets;
  targets.states = path.waypoints;
  targets.speeds.assign(path.speeds.begin(), path.speeds.begin() + H);

  const std::vector<ControlInput> nominal =
      (warm != nullptr && static_cast<int>(warm->size()) == H)
          ? *warm
          : NominalFromTargets(targets, bounds, params, prev);
  const TrackingResult tr = TrackTargets(s0, prev, targets, bounds, params, config.weights,
                                         nominal, config.passes);
  CandidateRollout out;
  out.path = path;
  out.states = tr.states;
  out.inputs = tr.inputs;
  out.qp_iterations = tr.qp_iterations;
  for (int h = 0; h <= H; ++h) {
    out.adherence = std::max(
        out.adherence, (tr.states[h].position() - path.waypoints[h].position()).norm());
  }
  out.within_epsilon = out.adherence <= config.epsilon;
  return out;
}

double PointClearance(const std::vector<VehicleState>& states, const PointPredictions& obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& track : obstacles) {
    const size_t n = std::min(track.size(), states.size());
    for (size_t h = 0; h < n; ++h) {
      best = std::min(best, (states[h].position() - track[h]).norm());
    }
  }
  return best;
}

bool Clearance(const std::vector<VehicleState>& states, const PointPredictions& obstacles,
               double d_safe) {
  return PointClearance(states, obstacles) >= d_safe;
}

double DeviationCost(const std::vector<VehicleState>& states, const ReferenceSlice& slice) {
  double cost = 0.0;
  const size_t n = std::min(states.size(), slice.states.size());
  for (size_t h = 0; h < n; ++h) {
    const VehicleState& s = states[h];
    const VehicleState& r = slice.states[h];
    const double dth = NormalizeAngle(s.theta - r.theta);
    cost += (s.x - r.x) * (s.x - r.x) + (s.y - r.y) * (s.y - r.y) + dth * dth;
  }
  return cost;
}

PlanResult TreeSearchSelect(const std::vector<CandidateRollout>& candidates,
                            const PointPredictions& obstacles, const ReferenceSlice& slice,
                            double d_safe) {
  if (candidates.empty()) throw std::invalid_argument("tree search needs a candidate");
  const size_t M = candidates.size();
  std::vector<double> cost(M);
  std::vector<double> clear(M);
  for (size_t m = 0; m < M; ++m) {
    cost[m] = DeviationCost(candidates[m].states, slice);
    clear[m] = PointClearance(candidates[m].states, obstacles);
  }
  // Leaves of the alpha tree: alpha = e_m for each m.
  int best = -1;
  for (size_t m = 0; m < M; ++m) {
    if (!(clear[m] >= d_safe)) continue;
    if (best < 0) {
      best = static_cast<int>(m);
      continue;
    }
    const size_t b = static_cast<size_t>(best);
    const double om = std::abs(candidates[m].path.offset);
    const double ob = std::abs(candidates[b].path.offset);
    const bool better = NearlyEqual(cost[m], cost[b]) ? (om < ob) : (cost[m] < cost[b]);
    if (better) best = static_cast<int>(m);
  }
  PlanResult result;
  result.feasible = best >= 0;
  if (best < 0) {
    best = 0;
    for (size_t m = 1; m < M; ++m) {
      const size_t b = static_cast<size_t>(best);
      if (clear[m] > clear[b] || (clear[m] == clear[b] && cost[m] < cost[b])) {
        best = static_cast<int>(m);
      }
    }
  }
  const CandidateRollout& sel = candidates[static_cast<size_t>(best)];
  result.states = sel.states;
  result.inputs = sel.inputs;
  result.selected_id = sel.path.id;
  result.selected_offset = sel.path.offset;
  result.deviation_cost = cost[static_cast<size_t>(best)];
  result.min_clearance = clear[static_cast<size_t>(best)];
  return result;
}

FdPlanner::FdPlanner(FdConfig config, VehicleParams params, ActionBounds bounds, Track track)
    : config_(std::move(config)), params_(params), bounds_(bounds), track_(std::move(track)) {
  config_.Validate();
  params_.Validate();
  bounds_.Validate();
}

PlanResult FdPlanner::Plan(const VehicleState& s0, const ControlInput& prev,
                           const ReferenceSlice& slice, const PointPredictions& obstacles) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<CandidatePath> paths = SamplePaths(slice, track_, config_, params_);
  warm_.resize(paths.size());
  last_.clear();
  int iterations = 0;
  for (const auto& path : paths) {
    const auto& w = warm_[static_cast<size_t>(path.id)];
    last_.push_back(
        TrackCandidate(path, s0, prev, bounds_, params_, config_, w.empty() ? nullptr : &w));
    iterations += last_.back().qp_iterations;
  }
  PlanResult result = TreeSearchSelect(last_, obstacles, slice, config_.d_safe);
  for (const auto& c : last_) {
    warm_[static_cast<size_t>(c.path.id)] = ShiftInputs(c.inputs, slice.horizon());
  }
  result.qp_iterations = iterations;
  result.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace adaplan
