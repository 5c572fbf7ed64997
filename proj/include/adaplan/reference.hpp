#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adaplan/geometry.hpp"
#include "adaplan/vehicle.hpp"

namespace adaplan {

class GenerationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Piecewise-linear path with cumulative arc length. Closed polylines wrap.
class Polyline {
 public:
  Polyline() = default;
  Polyline(std::vector<Vec2> points, bool closed);

  double Length() const { return arc_.back(); }
  bool closed() const { return closed_; }
  const std::vector<Vec2>& points() const { return points_; }
  /// Arc length of vertex i.
  double ArcAt(size_t i) const { return arc_[i]; }

  /// Wraps (closed) or clamps (open) an arc length into [0, Length()].
  double Wrap(double s) const;
  Vec2 PointAt(double s) const;
  double HeadingAt(double s) const;
  /// Unit normal pointing to the left of the direction of travel.
  Vec2 LeftNormalAt(double s) const;

  struct Projection {
    double s = 0.0;
    double lateral = 0.0;  // signed, left positive
    double distance = 0.0;
    size_t segment = 0;
    double t = 0.0;  // fraction along `segment`
  };
  Projection Project(const Vec2& p) const;
  /// Projection restricted to segments within `window` of `s_hint`.
  Projection ProjectNear(const Vec2& p, double s_hint, double window) const;

 private:
  size_t SegmentIndex(double s) const;
  Projection ProjectOnSegment(const Vec2& p, size_t seg) const;

  std::vector<Vec2> points_;
  std::vector<double> arc_;  // size points_.size() (+1 when closed)
  bool closed_ = false;
};

struct Track {
  std::vector<Vec2> centerline;
  double half_width = 0.0;
  bool closed = false;

  void Validate() const;
  Polyline Centerline() const { return Polyline(centerline, closed); }
};

enum class SegmentKind { kStraight, kCurve };

/// Centerline index range [begin, end); indices are taken modulo the point
/// count, so a closed-track segment may run past the last point.
struct TrackSegment {
  size_t begin = 0;
  size_t end = 0;
  SegmentKind kind = SegmentKind::kStraight;
  double mean_curvature = 0.0;
};

/// Signed curvature of the circle through three points; zero when collinear.
double CircumcircleCurvature(const Vec2& a, const Vec2& b, const Vec2& c);

std::vector<TrackSegment> SegmentTrack(const Track& track, double curvature_threshold);

inline constexpr double kCurvatureFloor = 1e-4;

/// min(v_max, sqrt(a_lat_max / max(|kappa|, kappa_floor))).
double SpeedEnvelope(double curvature, double a_lat_max, double v_max);

struct ReferencePlan {
  std::vector<VehicleState> waypoints;
  std::vector<double> speeds;
  std::vector<double> curvatures;
  double spacing = 0.5;
  double v_max = 0.0;
  bool closed = false;

  size_t size() const { return waypoints.size(); }
  double Length() const;
  Polyline Path() const;
};

struct ReferenceOptions {
  double lookahead = 5.0;
  double a_lat_max = 5.0;
  double spacing = 0.5;
  double follower_speed = 5.0;
  double follower_dt = 0.02;
};

/// Pure-pursuit follower simulated on StepNonlinear along the centerline,
/// resampled at uniform arc spacing, with envelope speeds.
/// Throws GenerationFailure when the follower leaves the track.
ReferencePlan GenerateReference(const Track& track, const VehicleParams& params,
                                const ActionBounds& bounds, const ReferenceOptions& options);

/// Horizon reference {s_h, v_h + gamma}, h = 0..H.
struct ReferenceSlice {
  std::vector<VehicleState> states;
  std::vector<double> speeds;
  std::vector<double> arcs;  // arc position of each entry along the plan
  std::vector<double> curvatures;

  int horizon() const { return static_cast<int>(states.size()) - 1; }
};

class ReferenceQuery {
 public:
  explicit ReferenceQuery(const ReferencePlan& plan);

  const ReferencePlan& plan() const { return *plan_; }
  const Polyline& path() const { return path_; }

  /// Anchors at the projection of `pose` on the plan, then advances the arc
  /// position by the shifted speed each step. Speeds are v + gamma clipped to
  /// [0, min(v_max, speed_cap)].
  ReferenceSlice Query(const VehicleState& pose, double gamma, int horizon, double dt,
                       double speed_cap = std::numeric_limits<double>::infinity()) const;
  ReferenceSlice QueryAt(double arc, double gamma, int horizon, double dt,
                         double speed_cap = std::numeric_limits<double>::infinity()) const;

  /// Arc positions used by the query are index-based: waypoint i sits at
  /// i * spacing.
  double ArcLength() const;
  double WrapArc(double arc) const;
  double ArcOf(const Vec2& position) const;

  double SpeedAt(double arc) const;
  double CurvatureAt(double arc) const;
  VehicleState StateAt(double arc) const;

 private:
  const ReferencePlan* plan_;
  Polyline path_;
};

ReferenceSlice QueryReference(const ReferencePlan& plan, const VehicleState& pose,
                              double gamma, int horizon, double dt);

nlohmann::json TrackToJson(const Track& track);
Track TrackFromJson(const nlohmann::json& j);
nlohmann::json ReferenceToJson(const ReferencePlan& plan);
ReferencePlan ReferenceFromJson(const nlohmann::json& j);

Track MakeStraightTrack(double length, double half_width, double spacing = 1.0);
Track MakeCircleTrack(double radius, double half_width, int points = 360);
/// Two straights of `straight_length` joined by semicircles of `radius`,
/// traversed counter-clockwise starting at the beginning of the lower straight.
Track MakeStadiumTrack(double straight_length, double radius, double half_width,
                       double spacing = 1.0);

}  // namespace adaplan
