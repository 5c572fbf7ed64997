#include "adaplan/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

namespace adaplan {

namespace {

double Cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Resamples a polyline at `count` uniformly spaced arc positions.
std::vector<Vec2> Resample(const Polyline& line, size_t count) {
  std::vector<Vec2> out;
  out.reserve(count);
  const double step = line.closed() ? line.Length() / static_cast<double>(count)
                                    : line.Length() / static_cast<double>(count - 1);
  for (size_t i = 0; i < count; ++i) out.push_back(line.PointAt(step * static_cast<double>(i)));
  return out;
}

}  // namespace

Polyline::Polyline(std::vector<Vec2> points, bool closed)
    : points_(std::move(points)), closed_(closed) {
  if (points_.size() < 2) throw std::invalid_argument("polyline needs at least two points");
  arc_.push_back(0.0);
  const size_t n = points_.size();
  const size_t segments = closed_ ? n : n - 1;
  for (size_t i = 0; i < segments; ++i) {
    arc_.push_back(arc_.back() + (points_[(i + 1) % n] - points_[i]).norm());
  }
}

double Polyline::Wrap(double s) const {
  const double length = Length();
  if (closed_) {
    double w = std::fmod(s, length);
    if (w < 0.0) w += length;
    return w;
  }
  return std::clamp(s, 0.0, length);
}

size_t Polyline::SegmentIndex(double s) const {
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  const size_t segments = arc_.size() - 1;
  size_t idx = it == arc_.begin() ? 0 : static_cast<size_t>(it - arc_.begin()) - 1;
  return std::min(idx, segments - 1);
}

Vec2 Polyline::PointAt(double s) const {
  s = Wrap(s);
  const size_t i = SegmentIndex(s);
  const Vec2& a = points_[i];
  const Vec2& b = points_[(i + 1) % points_.size()];
  const double len = arc_[i + 1] - arc_[i];
  const double t = len > 0.0 ? (s - arc_[i]) / len : 0.0;
  return a + t * (b - a);
}

double Polyline::HeadingAt(double s) const {
  const size_t i = SegmentIndex(Wrap(s));
  const Vec2 d = points_[(i + 1) % points_.size()] - points_[i];
  return std::atan2(d.y(), d.x());
}

Vec2 Polyline::LeftNormalAt(double s) const {
  const double h = HeadingAt(s);
  return {-std::sin(h), std::cos(h)};
}

Polyline::Projection Polyline::ProjectOnSegment(const Vec2& p, size_t seg) const {
  const Vec2& a = points_[seg];
  const Vec2& b = points_[(seg + 1) % points_.size()];
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  const Vec2 q = a + t * ab;
  Projection out;
  out.s = arc_[seg] + t * std::sqrt(len2);
  out.segment = seg;
  out.t = t;
  out.distance = (p - q).norm();
  const double side = len2 > 0.0 ? Cross(ab, p - a) / std::sqrt(len2) : 0.0;
  out.lateral = side >= 0.0 ? out.distance : -out.distance;
  // Beyond the ends of an open path the lateral offset is measured against
  // the extended end segment.
  if (!closed_ && (t == 0.0 || t == 1.0) && len2 > 0.0) out.lateral = side;
  return out;
}

Polyline::Projection Polyline::Project(const Vec2& p) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (size_t seg = 0; seg + 1 < arc_.size(); ++seg) {
    const Projection cand = ProjectOnSegment(p, seg);
    if (cand.distance < best.distance) best = cand;
  }
  return best;
}

Polyline::Projection Polyline::ProjectNear(const Vec2& p, double s_hint, double window) const {
  const size_t segments = arc_.size() - 1;
  if (2.0 * window >= Length()) return Project(p);
  size_t seg = SegmentIndex(Wrap(s_hint - window));
  if (!closed_ && s_hint - window < 0.0) seg = 0;
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  double covered = 0.0;
  for (size_t count = 0; count < segments; ++count) {
    const Projection cand = ProjectOnSegment(p, seg);
    if (cand.distance < best.distance) best = cand;
    covered += arc_[seg + 1] - arc_[seg];
    if (covered > 2.0 * window + (arc_[seg + 1] - arc_[seg])) break;
    ++seg;
    if (seg == segments) {
      if (!closed_) break;
      seg = 0;
    }
  }
  return best;
}

void Track::Validate() const {
  if (centerline.size() < 3) throw std::invalid_argument("track needs at least 3 centerline points");
  if (!(half_width > 0.0)) throw std::invalid_argument("track half_width must be positive");
  for (size_t i = 0; i < centerline.size(); ++i) {
    if (!centerline[i].allFinite()) {
      throw std::invalid_argument("centerline point " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && (centerline[i] - centerline[i - 1]).norm() < 1e-9) {
      throw std::invalid_argument("centerline points " + std::to_string(i - 1) + " and " +
                                  std::to_string(i) + " coincide");
    }
  }
  if (closed && (centerline.front() - centerline.back()).norm() < 1e-9) {
    throw std::invalid_argument("closed track must not repeat its first point");
  }
}

double CircumcircleCurvature(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double ab = (b - a).norm();
  const double bc = (c - b).norm();
  const double ca = (a - c).norm();
  const double denom = ab * bc * ca;
  if (denom < 1e-12) return 0.0;
  const double cross = Cross(b - a, c - b);
  if (std::abs(cross) < 1e-12 * (ab + bc) * (ab + bc)) return 0.0;
  return 2.0 * cross / denom;
}

std::vector<TrackSegment> SegmentTrack(const Track& track, double curvature_threshold) {
  track.Validate();
  if (!(curvature_threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  const auto& pts = track.centerline;
  const size_t n = pts.size();
  std::vector<double> kappa(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    if (!track.closed && (i == 0 || i + 1 == n)) continue;
    kappa[i] = CircumcircleCurvature(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
  }
  if (!track.closed) {
    kappa[0] = kappa[1];
    kappa[n - 1] = kappa[n - 2];
  }
  auto kind_of = [&](size_t i) {
    return std::abs(kappa[i]) < curvature_threshold ? SegmentKind::kStraight : SegmentKind::kCurve;
  };

  std::vector<TrackSegment> segments;
  size_t start = 0;
  for (size_t i = 1; i <= n; ++i) {
    if (i == n || kind_of(i) != kind_of(start)) {
      segments.push_back({start, i, kind_of(start), 0.0});
      start = i;
    }
  }
  if (track.closed && segments.size() > 1 && segments.front().kind == segments.back().kind) {
    TrackSegment merged = segments.back();
    merged.end = segments.front().end + n;
    segments.pop_back();
    segments.front() = merged;
    std::rotate(segments.begin(), segments.begin() + 1, segments.end());
  }
  for (auto& seg : segments) {
    double sum = 0.0;
    for (size_t i = seg.begin; i < seg.end; ++i) sum += kappa[i % n];
    seg.mean_curvature = sum / static_cast<double>(seg.end - seg.begin);
  }
  return segments;
}

double SpeedEnvelope(double curvature, double a_lat_max, double v_max) {
  if (!(a_lat_max > 0.0) || !(v_max > 0.0)) {
    throw std::invalid_argument("a_lat_max and v_max must be positive");
  }
  return std::min(v_max, std::sqrt(a_lat_max / std::max(std::abs(curvature), kCurvatureFloor)));
}

double ReferencePlan::Length() const { return Path().Length(); }

Polyline ReferencePlan::Path() const {
  std::vector<Vec2> pts;
  pts.reserve(waypoints.size());
  for (const auto& w : waypoints) pts.push_back(w.position());
  return Polyline(std::move(pts), closed);
}

ReferencePlan GenerateReference(const Track& track, const VehicleParams& params,
                                const ActionBounds& bounds, const ReferenceOptions& options) {
  track.Validate();
  params.Validate();
  if (!(options.lookahead > 0.0) || !(options.spacing > 0.0)) {
    throw std::invalid_argument("lookahead and spacing must be positive");
  }
  const Polyline center = track.Centerline();
  const double length = center.Length();
  VehicleParams follower = params;
  follower.dt = options.follower_dt;
  const double speed = std::min(options.follower_speed, bounds.u_max.v);
  const double step = speed * follower.dt;

  VehicleState state{center.points()[0].x(), center.points()[0].y(), center.HeadingAt(0.0)};
  double progress = 0.0;  // unwrapped arc position
  double last_s = 0.0;
  const double target_progress = track.closed ? 2.0 * length : length;
  std::vector<Vec2> trace{state.position()};
  std::vector<double> trace_progress{0.0};
  const size_t max_steps = static_cast<size_t>(4.0 * target_progress / step) + 1000;

  for (size_t k = 0; k < max_steps; ++k) {
    const auto proj = center.ProjectNear(state.position(), last_s, 4.0 * options.lookahead + step);
    double ds = proj.s - last_s;
    if (track.closed) {
      if (ds < -0.5 * length) ds += length;
      if (ds > 0.5 * length) ds -= length;
    }
    progress += ds;
    last_s = proj.s;
    if (std::abs(proj.lateral) > track.half_width) {
      throw GenerationFailure("pure-pursuit follower left the track at arc " +
                              std::to_string(proj.s));
    }
    if (progress >= target_progress - (track.closed ? 0.0 : 0.5 * step)) break;
    const Vec2 target = center.PointAt(track.closed ? last_s + options.lookahead
                                                    : std::min(length, last_s + options.lookahead));
    const Vec2 delta = target - state.position();
    const double ld = delta.norm();
    if (ld < 1e-9) break;
    const double alpha = NormalizeAngle(std::atan2(delta.y(), delta.x()) - state.theta);
    double steer = std::atan2(2.0 * params.wheelbase * std::sin(alpha), ld);
    steer = std::clamp(steer, bounds.u_min.psi, bounds.u_max.psi);
    state = StepNonlinear(state, {speed, steer}, follower);
    trace.push_back(state.position());
    trace_progress.push_back(progress + step);
  }

  std::vector<Vec2> path_points;
  if (track.closed) {
    // Keep the second lap, where the follower has settled onto its periodic path.
    for (size_t i = 0; i < trace.size(); ++i) {
      if (trace_progress[i] >= length && trace_progress[i] < 2.0 * length) {
        path_points.push_back(trace[i]);
      }
    }
  } else {
    path_points = trace;
  }
  if (path_points.size() < 3) throw GenerationFailure("pure-pursuit trace is too short");
  path_points.erase(std::unique(path_points.begin(), path_points.end(),
                                [](const Vec2& a, const Vec2& b) { return (a - b).norm() < 1e-9; }),
                    path_points.end());
  const Polyline traced(path_points, track.closed);
  const size_t count =
      std::max<size_t>(3, static_cast<size_t>(std::llround(traced.Length() / options.spacing)) +
                              (track.closed ? 0 : 1));
  const std::vector<Vec2> pts = Resample(traced, count);

  ReferencePlan plan;
  plan.closed = track.closed;
  plan.v_max = bounds.u_max.v;
  plan.spacing = track.closed ? traced.Length() / static_cast<double>(count)
                              : traced.Length() / static_cast<double>(count - 1);
  const size_t n = pts.size();
  const size_t k = std::max<size_t>(1, static_cast<size_t>(std::llround(2.0 / plan.spacing)));
  for (size_t i = 0; i < n; ++i) {
    size_t prev = i;
    size_t next = i;
    if (track.closed) {
      prev = (i + n - 1) % n;
      next = (i + 1) % n;
    } else {
      prev = i == 0 ? 0 : i - 1;
      next = i + 1 == n ? i : i + 1;
    }
    const Vec2 tangent = pts[next] - pts[prev];
    plan.waypoints.push_back({pts[i].x(), pts[i].y(), std::atan2(tangent.y(), tangent.x())});

    double kappa = 0.0;
    if (track.closed) {
      kappa = CircumcircleCurvature(pts[(i + n - k) % n], pts[i], pts[(i + k) % n]);
    } else if (i >= k && i + k < n) {
      kappa = CircumcircleCurvature(pts[i - k], pts[i], pts[i + k]);
    } else if (n > 2 * k) {
      const size_t c = std::clamp(i, k, n - 1 - k);
      kappa = CircumcircleCurvature(pts[c - k], pts[c], pts[c + k]);
    }
    plan.curvatures.push_back(kappa);
    plan.speeds.push_back(SpeedEnvelope(kappa, options.a_lat_max, plan.v_max));
  }
  return plan;
}

ReferenceQuery::ReferenceQuery(const ReferencePlan& plan) : plan_(&plan), path_(plan.Path()) {}

namespace {

struct Bracket {
  size_t i0 = 0;
  size_t i1 = 0;
  double t = 0.0;
};

Bracket BracketArc(const ReferencePlan& plan, double s) {
  const size_t n = plan.size();
  // Waypoints are uniformly spaced, so the bracket is index arithmetic.
  const double pos = s / plan.spacing;
  size_t i0 = static_cast<size_t>(std::floor(pos));
  double t = pos - static_cast<double>(i0);
  if (plan.closed) {
    i0 %= n;
    return {i0, (i0 + 1) % n, t};
  }
  if (i0 + 1 >= n) return {n - 1, n - 1, 0.0};
  return {i0, i0 + 1, t};
}

}  // namespace

double ReferenceQuery::ArcLength() const {
  const size_t n = plan_->size();
  return plan_->spacing * static_cast<double>(plan_->closed ? n : n - 1);
}

double ReferenceQuery::WrapArc(double arc) const {
  const double length = ArcLength();
  if (plan_->closed) {
    double w = std::fmod(arc, length);
    if (w < 0.0) w += length;
    return w;
  }
  return std::clamp(arc, 0.0, length);
}

double ReferenceQuery::ArcOf(const Vec2& position) const {
  const auto proj = path_.Project(position);
  return (static_cast<double>(proj.segment) + proj.t) * plan_->spacing;
}

double ReferenceQuery::SpeedAt(double arc) const {
  const Bracket b = BracketArc(*plan_, WrapArc(arc));
  return (1.0 - b.t) * plan_->speeds[b.i0] + b.t * plan_->speeds[b.i1];
}

double ReferenceQuery::CurvatureAt(double arc) const {
  const Bracket b = BracketArc(*plan_, WrapArc(arc));
  return (1.0 - b.t) * plan_->curvatures[b.i0] + b.t * plan_->curvatures[b.i1];
}

VehicleState ReferenceQuery::StateAt(double arc) const {
  const Bracket b = BracketArc(*plan_, WrapArc(arc));
  const VehicleState& a = plan_->waypoints[b.i0];
  const VehicleState& c = plan_->waypoints[b.i1];
  return {a.x + b.t * (c.x - a.x), a.y + b.t * (c.y - a.y),
          NormalizeAngle(a.theta + b.t * NormalizeAngle(c.theta - a.theta))};
}

ReferenceSlice ReferenceQuery::QueryAt(double arc, double gamma, int horizon, double dt,
                                       double speed_cap) const {
  ReferenceSlice slice;
  double s = arc;
  const double top = std::min(plan_->v_max, speed_cap);
  for (int h = 0; h <= horizon; ++h) {
    const double v = std::clamp(SpeedAt(s) + gamma, 0.0, std::max(top, 0.0));
    slice.states.push_back(StateAt(s));
    slice.speeds.push_back(v);
    slice.arcs.push_back(s);
    slice.curvatures.push_back(CurvatureAt(s));
    s += v * dt;
    if (!plan_->closed) s = std::min(s, ArcLength());
  }
  return slice;
}

ReferenceSlice ReferenceQuery::Query(const VehicleState& pose, double gamma, int horizon,
                                     double dt, double speed_cap) const {
  if (plan_->size() == 0) throw std::invalid_argument("reference plan is empty");
  return QueryAt(ArcOf(pose.position()), gamma, horizon, dt, speed_cap);
}

ReferenceSlice QueryReference(const ReferencePlan& plan, const VehicleState& pose, double gamma,
                              int horizon, double dt) {
  return ReferenceQuery(plan).Query(pose, gamma, horizon, dt);
}

nlohmann::json TrackToJson(const Track& track) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : track.centerline) pts.push_back({p.x(), p.y()});
  return {{"half_width", track.half_width}, {"closed", track.closed}, {"centerline", pts}};
}

Track TrackFromJson(const nlohmann::json& j) {
  Track track;
  if (!j.is_object()) throw std::invalid_argument("track must be an object");
  if (!j.contains("half_width") || !j.at("half_width").is_number()) {
    throw std::invalid_argument("track.half_width: missing or not a number");
  }
  track.half_width = j.at("half_width").get<double>();
  track.closed = j.value("closed", false);
  if (!j.contains("centerline") || !j.at("centerline").is_array()) {
    throw std::invalid_argument("track.centerline: missing or not a list");
  }
  const auto& cl = j.at("centerline");
  for (size_t i = 0; i < cl.size(); ++i) {
    if (!cl[i].is_array() || cl[i].size() != 2 || !cl[i][0].is_number() ||
        !cl[i][1].is_number()) {
      throw std::invalid_argument("track.centerline[" + std::to_string(i) +
                                  "]: expected [x, y]");
    }
    track.centerline.emplace_back(cl[i][0].get<double>(), cl[i][1].get<double>());
  }
  track.Validate();
  return track;
}

nlohmann::json ReferenceToJson(const ReferencePlan& plan) {
  nlohmann::json wps = nlohmann::json::array();
  for (size_t i = 0; i < plan.size(); ++i) {
    const auto& w = plan.waypoints[i];
    wps.push_back({w.x, w.y, w.theta, plan.speeds[i], plan.curvatures[i]});
  }
  return {{"spacing", plan.spacing},
          {"v_max", plan.v_max},
          {"closed", plan.closed},
          {"waypoints", wps}};
}

ReferencePlan ReferenceFromJson(const nlohmann::json& j) {
  ReferencePlan plan;
  plan.spacing = j.at("spacing").get<double>();
  plan.v_max = j.at("v_max").get<double>();
  plan.closed = j.at("closed").get<bool>();
  for (const auto& w : j.at("waypoints")) {
    if (w.size() != 5) throw std::invalid_argument("reference waypoint must have 5 fields");
    plan.waypoints.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
    plan.speeds.push_back(w[3].get<double>());
    plan.curvatures.push_back(w[4].get<double>());
  }
  if (plan.size() < 2) throw std::invalid_argument("reference plan needs at least two waypoints");
  return plan;
}

Track MakeStraightTrack(double length, double half_width, double spacing) {
  Track t;
  t.half_width = half_width;
  const int n = std::max(3, static_cast<int>(std::llround(length / spacing)) + 1);
  for (int i = 0; i < n; ++i) t.centerline.emplace_back(length * i / (n - 1), 0.0);
  return t;
}

Track MakeCircleTrack(double radius, double half_width, int points) {
  Track t;
  t.half_width = half_width;
  t.closed = true;
  for (int i = 0; i < points; ++i) {
    const double a = 2.0 * std::numbers::pi * i / points - 0.5 * std::numbers::pi;
    t.centerline.emplace_back(radius * std::cos(a), radius * (1.0 + std::sin(a)));
  }
  return t;
}

Track MakeStadiumTrack(double straight_length, double radius, double half_width,
                       double spacing) {
  Track t;
  t.half_width = half_width;
  t.closed = true;
  const int ns = std::max(2, static_cast<int>(std::llround(straight_length / spacing)));
  const int nc = std::max(4, static_cast<int>(std::llround(std::numbers::pi * radius / spacing)));
  for (int i = 0; i < ns; ++i) t.centerline.emplace_back(straight_length * i / ns, 0.0);
  for (int i = 0; i < nc; ++i) {
    const double a = -0.5 * std::numbers::pi + std::numbers::pi * i / nc;
    t.centerline.emplace_back(straight_length + radius * std::cos(a), radius + radius * std::sin(a));
  }
  for (int i = 0; i < ns; ++i) {
    t.centerline.emplace_back(straight_length - straight_length * i / ns, 2.0 * radius);
  }
  for (int i = 0; i < nc; ++i) {
    const double a = 0.5 * std::numbers::pi + std::numbers::pi * i / nc;
    t.centerline.emplace_back(radius * std::cos(a), radius + radius * std::sin(a));
  }
  return t;
}

}  // namespace adaplan
