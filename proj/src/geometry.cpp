#include "adaplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

namespace adaplan {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kMinArea = 1e-12;

double Cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

std::vector<Vec2> ConvexHullCcw(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return (a - b).norm() < 1e-12;
                        }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  // Andrew's monotone chain; collinear points are dropped.
  for (const auto& p : pts) {
    while (k >= 2 && Cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 1e-14) --k;
    hull[k++] = p;
  }
  for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= t && Cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 1e-14) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double PolygonArea(const std::vector<Vec2>& v) {
  double area = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    area += Cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * area;
}

Vec2 ClosestOnSegment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

}  // namespace

double NormalizeAngle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

Mat2 Rotation(double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

RigidPose2::RigidPose2(Vec2 position, double heading)
    : position(std::move(position)), heading(NormalizeAngle(heading)) {}

ConvexPolytope::ConvexPolytope(Eigen::MatrixX2d normals, Eigen::VectorXd offsets,
                               std::vector<Vec2> vertices)
    : normals_(std::move(normals)),
      offsets_(std::move(offsets)),
      vertices_(std::move(vertices)) {}

ConvexPolytope ConvexPolytope::FromCcwHull(std::vector<Vec2> hull) {
  if (hull.size() < 3 || PolygonArea(hull) < kMinArea) {
    throw std::invalid_argument("polytope is empty or has zero area");
  }
  const int n = static_cast<int>(hull.size());
  Eigen::MatrixX2d normals(n, 2);
  Eigen::VectorXd offsets(n);
  for (int j = 0; j < n; ++j) {
    const Vec2 edge = hull[(j + 1) % n] - hull[j];
    const Vec2 normal = Vec2(edge.y(), -edge.x()).normalized();
    normals.row(j) = normal.transpose();
    offsets(j) = normal.dot(hull[j]);
  }
  return ConvexPolytope(std::move(normals), std::move(offsets), std::move(hull));
}

ConvexPolytope ConvexPolytope::FromPoints(std::span<const Vec2> points) {
  for (const auto& p : points) {
    if (!p.allFinite()) throw std::invalid_argument("non-finite point");
  }
  return FromCcwHull(ConvexHullCcw({points.begin(), points.end()}));
}

ConvexPolytope ConvexPolytope::FromHalfspaces(const Eigen::MatrixX2d& normals,
                                              const Eigen::VectorXd& offsets) {
  const int m = static_cast<int>(normals.rows());
  if (offsets.size() != m || m < 3) {
    throw std::invalid_argument("need at least three halfspaces with matching offsets");
  }
  Eigen::MatrixX2d unit(m, 2);
  Eigen::VectorXd b(m);
  std::vector<double> angles;
  for (int i = 0; i < m; ++i) {
    const double norm = normals.row(i).norm();
    if (!(norm > 1e-12) || !std::isfinite(offsets(i))) {
      throw std::invalid_argument("halfspace row " + std::to_string(i) +
                                  " has a zero or non-finite normal");
    }
    unit.row(i) = normals.row(i) / norm;
    b(i) = offsets(i) / norm;
    angles.push_back(std::atan2(unit(i, 1), unit(i, 0)));
  }
  // Bounded iff the normals positively span the plane.
  std::sort(angles.begin(), angles.end());
  double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (size_t i = 1; i < angles.size(); ++i) {
    max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
  }
  if (max_gap >= std::numbers::pi - 1e-12) {
    throw std::invalid_argument("halfspaces describe an unbounded set");
  }

  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  std::vector<Vec2> candidates;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      Mat2 a;
      a.row(0) = unit.row(i);
      a.row(1) = unit.row(j);
      const double det = a.determinant();
      if (std::abs(det) < 1e-12) continue;
      const Vec2 x = a.inverse() * Vec2(b(i), b(j));
      if (((unit * x - b).array() <= kFeasTol * scale).all()) candidates.push_back(x);
    }
  }
  return FromCcwHull(ConvexHullCcw(std::move(candidates)));
}

bool ConvexPolytope::Contains(const Vec2& point, double tol) const {
  return ((normals_ * point - offsets_).array() <= tol).all();
}

double ConvexPolytope::Area() const { return PolygonArea(vertices_); }

Vec2 ConvexPolytope::Centroid() const {
  Vec2 c = Vec2::Zero();
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

double ConvexPolytope::Radius() const {
  double r = 0.0;
  for (const auto& v : vertices_) r = std::max(r, v.norm());
  return r;
}

double ConvexPolytope::Support(const Vec2& direction) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) best = std::max(best, direction.dot(v));
  return best;
}

Eigen::VectorXd ConvexPolytope::SupportMultipliers(const Vec2& direction) const {
  const int n = num_facets();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (direction.norm() < 1e-15) return c;
  // Vertex j sits between facet j-1 and facet j; pick the normal cone that
  // contains `direction` most centrally.
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const Vec2 prev = normals_.row((j + n - 1) % n).transpose();
    const Vec2 next = normals_.row(j).transpose();
    const double score = std::min(Cross(prev, direction), Cross(direction, next));
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  const int jp = (best + n - 1) % n;
  const Vec2 prev = normals_.row(jp).transpose();
  const Vec2 next = normals_.row(best).transpose();
  const double det = Cross(prev, next);
  c(jp) = std::max(0.0, Cross(direction, next) / det);
  c(best) = std::max(0.0, Cross(prev, direction) / det);
  return c;
}

ConvexPolytope RectanglePolytope(double length, double width) {
  if (!(length > 0.0) || !(width > 0.0)) {
    throw std::invalid_argument("rectangle dimensions must be positive");
  }
  const double hx = 0.5 * length;
  const double hy = 0.5 * width;
  const std::vector<Vec2> pts = {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
  return ConvexPolytope::FromPoints(pts);
}

ConvexPolytope TransformToWorld(const ConvexPolytope& body, const RigidPose2& pose) {
  const Mat2 r = Rotation(pose.heading);
  Eigen::MatrixX2d normals = body.normals_ * r.transpose();
  Eigen::VectorXd offsets = body.offsets_ + normals * pose.position;
  std::vector<Vec2> vertices;
  vertices.reserve(body.vertices_.size());
  for (const auto& v : body.vertices_) vertices.push_back(r * v + pose.position);
  return ConvexPolytope(std::move(normals), std::move(offsets), std::move(vertices));
}

SeparatingAxis BestSeparatingAxis(const ConvexPolytope& a, const ConvexPolytope& b) {
  SeparatingAxis best{-std::numeric_limits<double>::infinity(), Vec2::UnitX()};
  for (int j = 0; j < b.num_facets(); ++j) {
    const Vec2 n = b.normals().row(j).transpose();
    const double gap = -a.Support(-n) - b.offsets()(j);
    if (gap > best.gap) best = {gap, n};
  }
  for (int j = 0; j < a.num_facets(); ++j) {
    const Vec2 m = a.normals().row(j).transpose();
    const double gap = -b.Support(-m) - a.offsets()(j);
    if (gap > best.gap) best = {gap, -m};
  }
  return best;
}

ClosestPoints MinDistanceWitness(const ConvexPolytope& a, const ConvexPolytope& b) {
  const SeparatingAxis axis = BestSeparatingAxis(a, b);
  if (axis.gap <= 0.0) {
    const Vec2 c = 0.5 * (a.Centroid() + b.Centroid());
    return {0.0, c, c};
  }
  ClosestPoints best{std::numeric_limits<double>::infinity(), Vec2::Zero(), Vec2::Zero()};
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  for (size_t i = 0; i < va.size(); ++i) {
    for (size_t j = 0; j < vb.size(); ++j) {
      const Vec2 on_b = ClosestOnSegment(va[i], vb[j], vb[(j + 1) % vb.size()]);
      const double d1 = (va[i] - on_b).norm();
      if (d1 < best.distance) best = {d1, va[i], on_b};
      const Vec2 on_a = ClosestOnSegment(vb[j], va[i], va[(i + 1) % va.size()]);
      const double d2 = (vb[j] - on_a).norm();
      if (d2 < best.distance) best = {d2, on_a, vb[j]};
    }
  }
  return best;
}

double MinDistance(const ConvexPolytope& a, const ConvexPolytope& b) {
  return MinDistanceWitness(a, b).distance;
}

double CertifiedMargin(const ConvexPolytope& ego_body, const RigidPose2& pose,
                       const ConvexPolytope& obstacle, const DualVariables& duals) {
  return duals.lambda.dot(obstacle.normals() * pose.position - obstacle.offsets()) -
         duals.mu.dot(ego_body.offsets());
}

MaxMarginDuals ComputeMaxMarginDuals(const ConvexPolytope& ego_body,
                                     const RigidPose2& pose,
                                     const ConvexPolytope& obstacle) {
  const ConvexPolytope ego = TransformToWorld(ego_body, pose);
  const ClosestPoints witness = MinDistanceWitness(ego, obstacle);
  Vec2 direction;
  if (witness.distance > 0.0) {
    direction = (witness.on_a - witness.on_b) / witness.distance;
  } else {
    direction = BestSeparatingAxis(ego, obstacle).direction;
  }
  if (!direction.allFinite()) {
    throw NumericFailure("non-finite separating direction", witness.distance);
  }
  MaxMarginDuals out;
  out.duals.lambda = obstacle.SupportMultipliers(direction);
  out.duals.mu = ego_body.SupportMultipliers(-Rotation(pose.heading).transpose() * direction);
  out.margin = CertifiedMargin(ego_body, pose, obstacle, out.duals);
  return out;
}

double CertificateViolation(const ConvexPolytope& ego_body, const RigidPose2& pose,
                            const ConvexPolytope& obstacle, const DualVariables& duals,
                            double d_safe) {
  if (duals.lambda.size() != obstacle.num_facets() ||
      duals.mu.size() != ego_body.num_facets()) {
    throw std::invalid_argument("dual dimensions do not match the polytopes");
  }
  double v = 0.0;
  if (duals.lambda.size() > 0) v = std::max(v, -duals.lambda.minCoeff());
  if (duals.mu.size() > 0) v = std::max(v, -duals.mu.minCoeff());
  v = std::max(v, d_safe - CertifiedMargin(ego_body, pose, obstacle, duals));
  const Vec2 w = obstacle.normals().transpose() * duals.lambda;
  v = std::max(v, w.norm() - 1.0);
  const Vec2 eq = ego_body.normals().transpose() * duals.mu +
                  Rotation(pose.heading).transpose() * w;
  v = std::max(v, eq.cwiseAbs().maxCoeff());
  return v;
}

bool DualCertificateFeasible(const ConvexPolytope& ego_body, const RigidPose2& pose,
                             const ConvexPolytope& obstacle, const DualVariables& duals,
                             double d_safe, double tol) {
  if (tol < 0.0) throw std::invalid_argument("tolerance must be nonnegative");
  return CertificateViolation(ego_body, pose, obstacle, duals, d_safe) <= tol;
}

nlohmann::json PolytopeToJson(const ConvexPolytope& polytope) {
  auto out = nlohmann::json::array();
  for (int j = 0; j < polytope.num_facets(); ++j) {
    out.push_back({polytope.normals()(j, 0), polytope.normals()(j, 1),
                   polytope.offsets()(j)});
  }
  return out;
}

ConvexPolytope PolytopeFromJson(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("polytope must be a list of triples");
  Eigen::MatrixX2d normals(j.size(), 2);
  Eigen::VectorXd offsets(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != 3) {
      throw std::invalid_argument("polytope row " + std::to_string(i) + " is not a triple");
    }
    normals(i, 0) = row[0].get<double>();
    normals(i, 1) = row[1].get<double>();
    offsets(i) = row[2].get<double>();
  }
  return ConvexPolytope::FromHalfspaces(normals, offsets);
}

}  // namespace adaplan
