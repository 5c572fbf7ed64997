#include "adaplan/planning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaplan {

ShapePredictions PredictShapes(const std::vector<ObstacleForecast>& obstacles, int horizon,
                               double dt) {
  ShapePredictions out;
  for (const auto& o : obstacles) {
    std::vector<ConvexPolytope> track;
    track.reserve(horizon + 1);
    for (int h = 0; h <= horizon; ++h) {
      track.push_back(TransformToWorld(o.shape, RigidPose2(o.velocity * (h * dt), 0.0)));
    }
    out.push_back(std::move(track));
  }
  return out;
}

PointPredictions PredictCenters(const std::vector<ObstacleForecast>& obstacles, int horizon,
                                double dt) {
  PointPredictions out;
  for (const auto& o : obstacles) {
    const Vec2 c = o.shape.Centroid();
    std::vector<Vec2> track;
    for (int h = 0; h <= horizon; ++h) track.push_back(c + o.velocity * (h * dt));
    out.push_back(std::move(track));
  }
  return out;
}

CondensedModel::CondensedModel(const VehicleState& s0, const std::vector<ControlInput>& nominal,
                               const VehicleParams& params)
    : horizon_(static_cast<int>(nominal.size())) {
  if (horizon_ < 1) throw std::invalid_argument("horizon must be at least 1");
  const int H = horizon_;
  nominal_states_.reserve(H + 1);
  nominal_states_.push_back(s0.AsVector());
  for (const auto& u : nominal) {
    nominal_states_.push_back(StepUnwrapped(nominal_states_.back(), u, params));
  }
  nominal_stack_.resize(3 * H);
  for (int h = 0; h < H; ++h) nominal_stack_.segment<3>(3 * h) = nominal_states_[h + 1];
  nominal_inputs_ = StackInputs(nominal);

  G_ = Eigen::MatrixXd::Zero(3 * H, 2 * H);
  for (int h = 0; h < H; ++h) {
    const LinearizedDynamics lin =
        Linearize(VehicleState::FromVector(nominal_states_[h]), nominal[h], params);
    if (h > 0) {
      G_.block(3 * h, 0, 3, 2 * h) = lin.A * G_.block(3 * (h - 1), 0, 3, 2 * h);
    }
    G_.block<3, 2>(3 * h, 2 * h) = lin.B;
  }
}

Eigen::VectorXd CondensedModel::Predict(const Eigen::VectorXd& U) const {
  return nominal_stack_ + G_ * (U - nominal_inputs_);
}

void ConstraintRows::Add(const Eigen::RowVectorXd& row, double lo, double hi) {
  if (row.size() != n_) throw std::invalid_argument("constraint row has wrong width");
  rows_.push_back(row);
  lo_.push_back(lo);
  hi_.push_back(hi);
}

void ConstraintRows::Fill(QpProblem& qp) const {
  const int m = size();
  qp.A.resize(m, n_);
  qp.l.resize(m);
  qp.u.resize(m);
  for (int i = 0; i < m; ++i) {
    qp.A.row(i) = rows_[i];
    qp.l(i) = lo_[i];
    qp.u(i) = hi_[i];
  }
}

QuadraticCost TrackingCost(const CondensedModel& model, const TrackingTargets& targets,
                           const TrackingWeights& weights, int num_variables) {
  const int H = model.horizon();
  if (static_cast<int>(targets.states.size()) != H + 1 ||
      static_cast<int>(targets.speeds.size()) != H) {
    throw std::invalid_argument("tracking targets do not match the horizon");
  }
  Eigen::VectorXd target(3 * H);
  Eigen::VectorXd w(3 * H);
  for (int h = 1; h <= H; ++h) {
    const VehicleState& t = targets.states[h];
    const double theta_bar = model.nominal_states()[h](2);
    target.segment<3>(3 * (h - 1)) << t.x, t.y, theta_bar + NormalizeAngle(t.theta - theta_bar);
    w.segment<3>(3 * (h - 1)) << weights.position, weights.position, weights.heading;
  }
  const Eigen::MatrixXd& G = model.G();
  const Eigen::VectorXd f = model.Predict(Eigen::VectorXd::Zero(2 * H)) - target;

  QuadraticCost cost;
  cost.P = Eigen::MatrixXd::Zero(num_variables, num_variables);
  cost.q = Eigen::VectorXd::Zero(num_variables);
  cost.P.topLeftCorner(2 * H, 2 * H) = 2.0 * G.transpose() * w.asDiagonal() * G;
  cost.q.head(2 * H) = 2.0 * G.transpose() * (w.asDiagonal() * f);
  cost.constant = f.dot(w.asDiagonal() * f);
  for (int h = 0; h < H; ++h) {
    const int iv = 2 * h;
    const int ip = 2 * h + 1;
    cost.P(iv, iv) += 2.0 * weights.speed;
    cost.q(iv) -= 2.0 * weights.speed * targets.speeds[h];
    cost.constant += weights.speed * targets.speeds[h] * targets.speeds[h];
    cost.P(ip, ip) += 2.0 * weights.steer;
    if (h > 0) {
      const int jp = ip - 2;
      cost.P(ip, ip) += 2.0 * weights.steer_rate;
      cost.P(jp, jp) += 2.0 * weights.steer_rate;
      cost.P(ip, jp) -= 2.0 * weights.steer_rate;
      cost.P(jp, ip) -= 2.0 * weights.steer_rate;
    }
  }
  return cost;
}

void AddInputRows(ConstraintRows& rows, int horizon, const ActionBounds& bounds,
                  const ControlInput& prev) {
  for (int h = 0; h < horizon; ++h) {
    for (int c = 0; c < 2; ++c) {
      const int i = 2 * h + c;
      const double lo = c == 0 ? bounds.u_min.v : bounds.u_min.psi;
      const double hi = c == 0 ? bounds.u_max.v : bounds.u_max.psi;
      const double rlo = c == 0 ? bounds.a_min.v : bounds.a_min.psi;
      const double rhi = c == 0 ? bounds.a_max.v : bounds.a_max.psi;
      Eigen::RowVectorXd box = Eigen::RowVectorXd::Zero(rows.width());
      box(i) = 1.0;
      rows.Add(box, lo, hi);
      Eigen::RowVectorXd rate = Eigen::RowVectorXd::Zero(rows.width());
      rate(i) = 1.0;
      if (h == 0) {
        const double p = c == 0 ? prev.v : prev.psi;
        rows.Add(rate, p + rlo, p + rhi);
      } else {
        rate(i - 2) = -1.0;
        rows.Add(rate, rlo, rhi);
      }
    }
  }
}

std::vector<ControlInput> ClampSequence(const std::vector<ControlInput>& inputs,
                                        const ActionBounds& bounds, const ControlInput& prev) {
  std::vector<ControlInput> out;
  out.reserve(inputs.size());
  ControlInput last = prev;
  for (const auto& u : inputs) {
    last = bounds.ClampStep(u, last);
    out.push_back(last);
  }
  return out;
}

std::vector<VehicleState> Rollout(const VehicleState& s0, const std::vector<ControlInput>& inputs,
                                  const VehicleParams& params) {
  std::vector<VehicleState> states{s0};
  states.front().theta = NormalizeAngle(s0.theta);
  for (const auto& u : inputs) states.push_back(StepNonlinear(states.back(), u, params));
  return states;
}

double TrackingCostOf(const std::vector<VehicleState>& states,
                      const std::vector<ControlInput>& inputs, const TrackingTargets& targets,
                      const TrackingWeights& weights) {
  double cost = 0.0;
  for (size_t h = 1; h < states.size(); ++h) {
    const VehicleState& s = states[h];
    const VehicleState& t = targets.states[h];
    const double dth = NormalizeAngle(s.theta - t.theta);
    cost += weights.position * ((s.x - t.x) * (s.x - t.x) + (s.y - t.y) * (s.y - t.y)) +
            weights.heading * dth * dth;
  }
  for (size_t h = 0; h < inputs.size(); ++h) {
    const double dv = inputs[h].v - targets.speeds[h];
    cost += weights.speed * dv * dv + weights.steer * inputs[h].psi * inputs[h].psi;
    if (h > 0) {
      const double dp = inputs[h].psi - inputs[h - 1].psi;
      cost += weights.steer_rate * dp * dp;
    }
  }
  return cost;
}

std::vector<ControlInput> NominalInputs(const ReferenceSlice& slice, const ActionBounds& bounds,
                                        const VehicleParams& params, const ControlInput& prev) {
  std::vector<ControlInput> u;
  for (int h = 0; h < slice.horizon(); ++h) {
    u.push_back({slice.speeds[h], std::atan(params.wheelbase * slice.curvatures[h])});
  }
  return ClampSequence(u, bounds, prev);
}

std::vector<ControlInput> NominalFromTargets(const TrackingTargets& targets,
                                             const ActionBounds& bounds,
                                             const VehicleParams& params,
                                             const ControlInput& prev) {
  std::vector<ControlInput> u;
  const size_t H = targets.speeds.size();
  for (size_t h = 0; h < H; ++h) {
    const double dtheta = NormalizeAngle(targets.states[h + 1].theta - targets.states[h].theta);
    const double v = std::max(targets.speeds[h], 0.1);
    u.push_back({targets.speeds[h], std::atan(params.wheelbase * dtheta / (v * params.dt))});
  }
  return ClampSequence(u, bounds, prev);
}

std::vector<ControlInput> ShiftInputs(const std::vector<ControlInput>& previous, int horizon) {
  std::vector<ControlInput> out;
  for (size_t i = 1; i < previous.size() && static_cast<int>(out.size()) < horizon; ++i) {
    out.push_back(previous[i]);
  }
  while (!out.empty() && static_cast<int>(out.size()) < horizon) out.push_back(out.back());
  return out;
}

Eigen::VectorXd StackInputs(const std::vector<ControlInput>& inputs) {
  Eigen::VectorXd U(2 * inputs.size());
  for (size_t h = 0; h < inputs.size(); ++h) U.segment<2>(2 * h) = inputs[h].AsVector();
  return U;
}

std::vector<ControlInput> UnstackInputs(const Eigen::VectorXd& U, int horizon) {
  std::vector<ControlInput> out;
  for (int h = 0; h < horizon; ++h) out.push_back({U(2 * h), U(2 * h + 1)});
  return out;
}

TrackingResult TrackTargets(const VehicleState& s0, const ControlInput& prev,
                            const TrackingTargets& targets, const ActionBounds& bounds,
                            const VehicleParams& params, const TrackingWeights& weights,
                            std::vector<ControlInput> nominal, int passes,
                            const QpSettings& qp_settings) {
  const int H = static_cast<int>(targets.speeds.size());
  if (static_cast<int>(nominal.size()) != H) throw std::invalid_argument("nominal size != H");
  TrackingResult result;
  nominal = ClampSequence(nominal, bounds, prev);
  for (int pass = 0; pass < std::max(1, passes); ++pass) {
    const CondensedModel model(s0, nominal, params);
    const QuadraticCost cost = TrackingCost(model, targets, weights, 2 * H);
    QpProblem qp;
    qp.P = cost.P;
    qp.q = cost.q;
    ConstraintRows rows(2 * H);
    AddInputRows(rows, H, bounds, prev);
    rows.Fill(qp);
    const QpWarmStart warm{model.nominal_inputs(), Eigen::VectorXd::Zero(rows.size())};
    const QpSolution sol = SolveQp(qp, qp_settings, &warm);
    result.qp_iterations += sol.iterations;
    nominal = ClampSequence(UnstackInputs(sol.x, H), bounds, prev);
  }
  result.inputs = nominal;
  result.states = Rollout(s0, result.inputs, params);
  result.cost = TrackingCostOf(result.states, result.inputs, targets, weights);
  return result;
}

}  // namespace adaplan
