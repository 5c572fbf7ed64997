#include "adaplan/sa_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adaplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec2 RotationDerivativeTimes(double theta, const Vec2& z) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {-s * z.x() - c * z.y(), c * z.x() - s * z.y()};
}

double MaxInputChange(const std::vector<ControlInput>& a, const std::vector<ControlInput>& b) {
  double d = 0.0;
  for (size_t h = 0; h < a.size() && h < b.size(); ++h) {
    d = std::max({d, std::abs(a[h].v - b[h].v), std::abs(a[h].psi - b[h].psi)});
  }
  return d;
}

double MinMargin(const DualSet& duals) {
  double m = kInf;
  for (const auto& row : duals.margins) {
    for (double v : row) m = std::min(m, v);
  }
  return m;
}

}  // namespace

void SaConfig::Validate() const {
  if (H < 1) throw std::invalid_argument("sa.H must be at least 1");
  if (!(d_safe > 0.0)) throw std::invalid_argument("sa.d_safe must be positive");
  if (am_iterations < 2 || am_iterations > 10) {
    throw std::invalid_argument("sa.am_iterations must lie in [2, 10]");
  }
  if (!(residual_tol > 0.0)) throw std::invalid_argument("sa.residual_tol must be positive");
  if (!(trust_region > 0.0)) throw std::invalid_argument("sa.trust_region must be positive");
  if (!(slack_weight > 0.0)) throw std::invalid_argument("sa.slack_weight must be positive");
  if (inner_buffer < 0.0) throw std::invalid_argument("sa.inner_buffer must be >= 0");
  if (!(active_range > d_safe)) throw std::invalid_argument("sa.active_range must exceed d_safe");
  if (corridor && lane_offsets.empty()) {
    throw std::invalid_argument("sa.lane_offsets must not be empty");
  }
  if (preview_steps < H) throw std::invalid_argument("sa.preview_steps must be >= sa.H");
  if (!(speed_cap > 0.0)) throw std::invalid_argument("sa.speed_cap must be positive");
}

DualSet SolveDualSubproblem(const std::vector<VehicleState>& states,
                            const ShapePredictions& obstacles, const ConvexPolytope& ego_body,
                            double d_safe, const DualSet* previous) {
  DualSet out;
  const size_t n = states.size();
  out.duals.resize(obstacles.size());
  out.margins.resize(obstacles.size());
  for (size_t i = 0; i < obstacles.size(); ++i) {
    if (obstacles[i].size() < n) throw std::invalid_argument("obstacle prediction too short");
    out.duals[i].resize(n);
    out.margins[i].resize(n);
    for (size_t h = 0; h < n; ++h) {
      try {
        const MaxMarginDuals mm =
            ComputeMaxMarginDuals(ego_body, states[h].pose(), obstacles[i][h]);
        out.duals[i][h] = mm.duals;
        out.margins[i][h] = mm.margin;
      } catch (const std::exception&) {
        ++out.failures;
        if (previous != nullptr && i < previous->duals.size() && h < previous->duals[i].size()) {
          out.duals[i][h] = previous->duals[i][h];
          out.margins[i][h] =
              CertifiedMargin(ego_body, states[h].pose(), obstacles[i][h], out.duals[i][h]);
        } else {
          out.duals[i][h] = {Eigen::VectorXd::Zero(obstacles[i][h].num_facets()),
                             Eigen::VectorXd::Zero(ego_body.num_facets())};
          out.margins[i][h] = 0.0;
        }
      }
      out.residual = std::max(out.residual, d_safe - out.margins[i][h]);
    }
  }
  return out;
}

MotionResult SolveMotionSubproblem(const DualSet& duals, const VehicleState& s0,
                                   const ControlInput& prev, const TrackingTargets& targets,
                                   const ShapePredictions& obstacles, const ActionBounds& bounds,
                                   const VehicleParams& params, const Motion& reference,
                                   const SaConfig& config) {
  const int H = static_cast<int>(targets.speeds.size());
  if (static_cast<int>(reference.inputs.size()) != H) {
    throw std::invalid_argument("reference motion does not match the horizon");
  }
  const CondensedModel model(s0, reference.inputs, params);
  const Eigen::VectorXd& Ubar = model.nominal_inputs();
  const Eigen::MatrixXd& G = model.G();

  struct Pair {
    size_t i;
    int h;
  };
  std::vector<Pair> pairs;
  for (size_t i = 0; i < duals.margins.size(); ++i) {
    for (int h = 1; h <= H; ++h) {
      if (duals.margins[i][h] <= config.active_range) pairs.push_back({i, h});
    }
  }
  const int P = static_cast<int>(pairs.size());
  const int n = 2 * H + P;

  const QuadraticCost cost = TrackingCost(model, targets, config.weights, n);
  QpProblem qp;
  qp.P = cost.P;
  qp.q = cost.q;
  for (int j = 0; j < P; ++j) {
    qp.q(2 * H + j) = config.slack_weight;
    qp.P(2 * H + j, 2 * H + j) = 2e-4;
  }

  ConstraintRows rows(n);
  AddInputRows(rows, H, bounds, prev);
  for (int h = 1; h <= H; ++h) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    r.head(2 * H) = G.row(3 * (h - 1) + 2);
    const double center = r.head(2 * H).dot(Ubar);
    rows.Add(r, center - config.trust_region, center + config.trust_region);
  }
  Eigen::VectorXd x_ref = Eigen::VectorXd::Zero(n);
  x_ref.head(2 * H) = Ubar;
  const ConvexPolytope footprint = Footprint(params);
  const std::vector<Vec2>& body = footprint.vertices();
  const double target = config.d_safe + config.inner_buffer;
  std::vector<Eigen::RowVectorXd> pair_rows;
  std::vector<double> pair_lo;
  for (int j = 0; j < P; ++j) {
    const auto [i, h] = pairs[j];
    const ConvexPolytope& obs = obstacles[i][h];
    const Eigen::VectorXd& lambda = duals.duals[i][h].lambda;
    const Vec2 w = obs.normals().transpose() * lambda;
    const double c = lambda.dot(obs.offsets());
    const Eigen::Vector3d& sbar = model.nominal_states()[h];
    const Vec2 pbar = sbar.head<2>();
    const double thbar = sbar(2);
    const auto Gp = G.block(3 * (h - 1), 0, 2, 2 * H);
    const auto Gt = G.row(3 * (h - 1) + 2);
    for (const Vec2& z : body) {
      const double a = w.dot(RotationDerivativeTimes(thbar, z));
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r.head(2 * H) = w.transpose() * Gp + a * Gt;
      const double affine_at_ref = r.head(2 * H).dot(Ubar);
      const double value_at_ref = w.dot(pbar + Rotation(thbar) * z) - c;
      // row . U + slack >= target - value_at_ref + row . Ubar
      const double lo = target - value_at_ref + affine_at_ref;
      r(2 * H + j) = 1.0;
      pair_rows.push_back(r);
      pair_lo.push_back(lo);
      x_ref(2 * H + j) = std::max(x_ref(2 * H + j), lo - affine_at_ref);
    }
  }
  for (int j = 0; j < P; ++j) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    r(2 * H + j) = 1.0;
    rows.Add(r, 0.0, kQpInfinity);
  }
  for (size_t k = 0; k < pair_rows.size(); ++k) rows.Add(pair_rows[k], pair_lo[k], kQpInfinity);
  rows.Fill(qp);

  MotionResult out;
  out.active_pairs = P;
  out.objective_at_reference = QpObjective(qp, x_ref) + cost.constant;
  const QpWarmStart warm{x_ref, Eigen::VectorXd::Zero(rows.size())};
  const QpSolution sol = SolveQp(qp, {}, &warm);
  if (!sol.x.allFinite()) {
    throw NumericFailure("motion subproblem produced a non-finite iterate", kInf);
  }
  out.objective_at_solution = QpObjective(qp, sol.x) + cost.constant;
  out.qp_iterations = sol.iterations;
  for (int j = 0; j < P; ++j) out.max_slack = std::max(out.max_slack, sol.x(2 * H + j));
  out.motion.inputs = ClampSequence(UnstackInputs(sol.x.head(2 * H), H), bounds, prev);
  out.motion.states = Rollout(s0, out.motion.inputs, params);
  return out;
}

TrackingTargets TargetsFromSlice(const ReferenceSlice& slice) {
  TrackingTargets t;
  t.states = slice.states;
  t.speeds.assign(slice.speeds.begin(), slice.speeds.end() - 1);
  return t;
}

AmOutcome AmSolve(const VehicleState& s0, const ControlInput& prev, const TrackingTargets& targets,
                  const ShapePredictions& obstacles, const ActionBounds& bounds,
                  const VehicleParams& params, const SaConfig& config,
                  const SaState* warm_start) {
  const auto start = std::chrono::steady_clock::now();
  const int H = static_cast<int>(targets.speeds.size());
  const ConvexPolytope body = Footprint(params);
  AmOutcome out;
  PlanResult& plan = out.plan;
  SaState& state = out.state;

  Motion motion;
  if (warm_start != nullptr && !warm_start->motion.inputs.empty()) {
    motion.inputs = ClampSequence(ShiftInputs(warm_start->motion.inputs, H), bounds, prev);
  } else {
    const TrackingResult tr =
        TrackTargets(s0, prev, targets, bounds, params, config.weights,
                     NominalFromTargets(targets, bounds, params, prev), 1);
    motion.inputs = tr.inputs;
    plan.qp_iterations += tr.qp_iterations;
  }
  motion.states = Rollout(s0, motion.inputs, params);
  DualSet duals = SolveDualSubproblem(motion.states, obstacles, body, config.d_safe);
  state.iterations_to_tolerance = duals.residual <= config.residual_tol ? 0 : -1;

  for (int k = 0; k < config.am_iterations; ++k) {
    const MotionResult mr = SolveMotionSubproblem(duals, s0, prev, targets, obstacles, bounds,
                                                  params, motion, config);
    plan.objective_at_reference.push_back(mr.objective_at_reference);
    plan.objective_at_solution.push_back(mr.objective_at_solution);
    plan.qp_iterations += mr.qp_iterations;
    plan.max_slack = mr.max_slack;
    const double change = MaxInputChange(mr.motion.inputs, motion.inputs);
    motion = mr.motion;
    duals = SolveDualSubproblem(motion.states, obstacles, body, config.d_safe, &duals);
    ++state.iterations;
    if (state.iterations_to_tolerance < 0 && duals.residual <= config.residual_tol) {
      state.iterations_to_tolerance = state.iterations;
    }
    if (change < config.convergence_tol && duals.residual <= config.residual_tol) break;
  }

  state.motion = motion;
  state.duals = duals;
  state.residual = duals.residual;
  plan.states = motion.states;
  plan.inputs = motion.inputs;
  plan.residual = duals.residual;
  plan.feasible = duals.residual <= config.residual_tol;
  plan.am_iterations = state.iterations;
  plan.min_clearance = MinMargin(duals);
  plan.deviation_cost = TrackingCostOf(motion.states, motion.inputs, targets, config.weights);
  plan.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double PathShapeClearance(const std::vector<VehicleState>& path, const ShapePredictions& obstacles,
                          const ConvexPolytope& ego_body) {
  double best = kInf;
  const double r_ego = ego_body.Radius();
  for (size_t h = 0; h < path.size(); ++h) {
    std::optional<ConvexPolytope> ego;
    for (const auto& track : obstacles) {
      if (h >= track.size()) continue;
      const ConvexPolytope& obs = track[h];
      const double bound = (path[h].position() - obs.Centroid()).norm() - r_ego - obs.Radius();
      if (bound > best) continue;
      if (!ego) ego = TransformToWorld(ego_body, path[h].pose());
      best = std::min(best, MinDistance(*ego, obs));
    }
  }
  return best;
}

SaPlanner::SaPlanner(SaConfig config, VehicleParams params, ActionBounds bounds, Track track)
    : config_(std::move(config)),
      params_(params),
      bounds_(bounds),
      track_(std::move(track)),
      body_(Footprint(params)) {
  config_.Validate();
  params_.Validate();
  bounds_.Validate();
}

void SaPlanner::Reset() {
  state_ = SaState{};
  has_state_ = false;
  lane_offset_ = 0.0;
}

double SaPlanner::SelectLane(const ReferenceSlice& preview,
                             const std::vector<ObstacleForecast>& obstacles) {
  const double limit = track_.half_width - 0.5 * params_.width;
  if (limit <= 0.0) return 0.0;
  const std::vector<double> laterals = SliceLaterals(preview, track_);
  const ShapePredictions preds = PredictShapes(obstacles, preview.horizon(), params_.dt);
  const size_t L = config_.lane_offsets.size();
  std::vector<double> score(L);
  for (size_t j = 0; j < L; ++j) {
    const CandidatePath path =
        OffsetPath(preview, laterals, limit, config_.lane_offsets[j], static_cast<int>(j));
    score[j] = PathShapeClearance(path.waypoints, preds, body_);
  }
  auto is_current = [&](size_t j) { return config_.lane_offsets[j] == lane_offset_; };
  int best = -1;
  for (size_t j = 0; j < L; ++j) {
    const double need =
        config_.d_safe + config_.lane_margin + (is_current(j) ? 0.0 : config_.lane_hysteresis);
    if (score[j] < need) continue;
    if (best < 0) {
      best = static_cast<int>(j);
      continue;
    }
    const double oj = config_.lane_offsets[j];
    const double ob = config_.lane_offsets[static_cast<size_t>(best)];
    if (std::abs(oj) < std::abs(ob) ||
        (std::abs(oj) == std::abs(ob) && std::abs(oj - lane_offset_) < std::abs(ob - lane_offset_))) {
      best = static_cast<int>(j);
    }
  }
  if (best >= 0) return config_.lane_offsets[static_cast<size_t>(best)];
  // Nothing clear: most clearance, with the current lane kept unless clearly worse.
  size_t arg = 0;
  double current = -kInf;
  for (size_t j = 0; j < L; ++j) {
    if (score[j] > score[arg]) arg = j;
    if (is_current(j)) current = score[j];
  }
  if (current >= score[arg] - config_.lane_hysteresis) return lane_offset_;
  return config_.lane_offsets[arg];
}

PlanResult SaPlanner::Plan(const VehicleState& s0, const ControlInput& prev,
                           const ReferenceQuery& query, double gamma,
                           const std::vector<ObstacleForecast>& obstacles) {
  const auto start = std::chrono::steady_clock::now();
  const int H = config_.H;
  const ReferenceSlice preview =
      query.Query(s0, gamma, std::max(H, config_.preview_steps), params_.dt, config_.speed_cap);
  ReferenceSlice slice = preview;
  slice.states.resize(H + 1);
  slice.speeds.resize(H + 1);
  slice.arcs.resize(H + 1);
  slice.curvatures.resize(H + 1);

  TrackingTargets targets;
  if (config_.corridor) {
    lane_offset_ = SelectLane(preview, obstacles);
    const double limit = track_.half_width - 0.5 * params_.width;
    const CandidatePath path = OffsetPath(slice, SliceLaterals(slice, track_), limit,
                                          limit > 0.0 ? lane_offset_ : 0.0, 0);
    targets.states = path.waypoints;
    targets.speeds.assign(path.speeds.begin(), path.speeds.begin() + H);
  } else {
    targets = TargetsFromSlice(slice);
  }
  predictions_ = PredictShapes(obstacles, H, params_.dt);
  AmOutcome outcome = AmSolve(s0, prev, targets, predictions_, bounds_, params_, config_,
                              has_state_ ? &state_ : nullptr);
  state_ = std::move(outcome.state);
  has_state_ = true;
  PlanResult plan = std::move(outcome.plan);
  plan.selected_offset = lane_offset_;
  plan.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return plan;
}

}  // namespace adaplan
