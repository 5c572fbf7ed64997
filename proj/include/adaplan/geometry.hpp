#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace adaplan {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Raised when an iterative or closed-form solver cannot produce a usable
/// answer. Carries the residual observed at the point of failure.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Wraps an angle into (-pi, pi].
double NormalizeAngle(double angle);

Mat2 Rotation(double heading);

struct RigidPose2 {
  RigidPose2() = default;
  RigidPose2(Vec2 position, double heading);

  Vec2 position = Vec2::Zero();
  double heading = 0.0;
};

/// Bounded 2-D convex polygon in halfspace form {x : D x <= b}.
///
/// Rows of D are unit outward normals stored in counter-clockwise order, so
/// facet j is the edge from vertex j to vertex j+1. Redundant halfspaces are
/// dropped at construction and the vertex list is kept alongside the
/// halfspaces. Degenerate (zero-area), empty and unbounded inputs are
/// rejected with std::invalid_argument.
class ConvexPolytope {
 public:
  static ConvexPolytope FromHalfspaces(const Eigen::MatrixX2d& normals,
                                       const Eigen::VectorXd& offsets);
  /// Convex hull of the given points.
  static ConvexPolytope FromPoints(std::span<const Vec2> points);

  const Eigen::MatrixX2d& normals() const { return normals_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  int num_facets() const { return static_cast<int>(offsets_.size()); }

  bool Contains(const Vec2& point, double tol = 1e-12) const;
  double Area() const;
  Vec2 Centroid() const;
  /// Largest vertex norm; bounds how far any point moves under a unit rotation.
  double Radius() const;
  /// max_{x in P} direction . x
  double Support(const Vec2& direction) const;

  /// Coefficients c >= 0 (one per facet, at most two nonzero) with
  /// normals()^T c = direction. These are the optimal multipliers of the
  /// support LP, so offsets() . c == Support(direction).
  Eigen::VectorXd SupportMultipliers(const Vec2& direction) const;

 private:
  ConvexPolytope(Eigen::MatrixX2d normals, Eigen::VectorXd offsets,
                 std::vector<Vec2> vertices);
  static ConvexPolytope FromCcwHull(std::vector<Vec2> hull);

  friend ConvexPolytope TransformToWorld(const ConvexPolytope&,
                                         const RigidPose2&);

  Eigen::MatrixX2d normals_;
  Eigen::VectorXd offsets_;
  std::vector<Vec2> vertices_;
};

/// Origin-centered, axis-aligned box.
ConvexPolytope RectanglePolytope(double length, double width);

/// Image of a body-frame set under x = R(theta) z + p:
/// {x : G R^T x <= h + G R^T p}.
ConvexPolytope TransformToWorld(const ConvexPolytope& body,
                                const RigidPose2& pose);

struct ClosestPoints {
  double distance = 0.0;
  Vec2 on_a = Vec2::Zero();
  Vec2 on_b = Vec2::Zero();
};

/// Exact Euclidean distance between two convex polygons; zero when they
/// intersect or touch.
double MinDistance(const ConvexPolytope& a, const ConvexPolytope& b);
ClosestPoints MinDistanceWitness(const ConvexPolytope& a,
                                 const ConvexPolytope& b);

/// Best separating-axis gap over the facet normals of both sets. Positive
/// gaps lower-bound the distance; non-positive means the sets intersect.
/// `direction` points from b towards a.
struct SeparatingAxis {
  double gap = 0.0;
  Vec2 direction = Vec2::UnitX();
};
SeparatingAxis BestSeparatingAxis(const ConvexPolytope& a,
                                  const ConvexPolytope& b);

struct DualVariables {
  Eigen::VectorXd lambda;  // one per obstacle facet
  Eigen::VectorXd mu;      // one per ego (body) facet
};

struct MaxMarginDuals {
  DualVariables duals;
  double margin = 0.0;
};

/// Duals maximizing lambda^T (D p - b) - mu^T h subject to the equality row
/// G^T mu + R^T D^T lambda = 0, ||D^T lambda||_2 <= 1 and nonnegativity.
/// For disjoint sets the margin equals MinDistance. For intersecting sets
/// the returned certificate has unit-norm D^T lambda along the axis of least
/// penetration, so the margin is the (non-positive) best separation along a
/// facet normal.
MaxMarginDuals ComputeMaxMarginDuals(const ConvexPolytope& ego_body,
                                     const RigidPose2& pose,
                                     const ConvexPolytope& obstacle);

/// Largest violation over the stacked rows of the collision certificate
/// (nonnegativity of lambda and mu, clearance, dual-norm bound, equality).
double CertificateViolation(const ConvexPolytope& ego_body,
                            const RigidPose2& pose,
                            const ConvexPolytope& obstacle,
                            const DualVariables& duals, double d_safe);

/// lambda^T (D p - b) - mu^T h, the clearance certified by `duals`.
double CertifiedMargin(const ConvexPolytope& ego_body, const RigidPose2& pose,
                       const ConvexPolytope& obstacle,
                       const DualVariables& duals);

bool DualCertificateFeasible(const ConvexPolytope& ego_body,
                             const RigidPose2& pose,
                             const ConvexPolytope& obstacle,
                             const DualVariables& duals, double d_safe,
                             double tol);

/// Structured-text form: [[nx, ny, offset], ...].
nlohmann::json PolytopeToJson(const ConvexPolytope& polytope);
ConvexPolytope PolytopeFromJson(const nlohmann::json& j);

}  // namespace adaplan
