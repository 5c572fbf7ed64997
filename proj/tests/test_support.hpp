#pragma once

// Test-only oracles. These deliberately avoid the library's closest-point
// and dual machinery so they can check it independently.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace adaplan::testing {

using Pts = std::vector<Eigen::Vector2d>;

inline double SupportOf(const Pts& pts, const Eigen::Vector2d& w) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::max(best, w.dot(p));
  return best;
}

// Separation of `a` beyond `b` along direction angle t:
// min_{x in a} w.x - max_{y in b} w.y.
inline double SeparationAlong(const Pts& a, const Pts& b, double t) {
  const Eigen::Vector2d w(std::cos(t), std::sin(t));
  return -SupportOf(a, -w) - SupportOf(b, w);
}

// Distance between the convex hulls of `a` and `b` by dense sampling of the
// separating direction followed by golden-section refinement. Returns the
// best separation, which is the distance when positive.
inline double SupportSamplingSeparation(const Pts& a, const Pts& b, int samples = 7200) {
  const double step = 2.0 * std::numbers::pi / samples;
  int best_i = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double f = SeparationAlong(a, b, i * step);
    if (f > best) {
      best = f;
      best_i = i;
    }
  }
  double lo = best_i * step - step;
  double hi = best_i * step + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = SeparationAlong(a, b, x1);
  double f2 = SeparationAlong(a, b, x2);
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = SeparationAlong(a, b, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = SeparationAlong(a, b, x1);
    }
  }
  return std::max({best, f1, f2});
}

inline double SupportSamplingDistance(const Pts& a, const Pts& b) {
  return std::max(0.0, SupportSamplingSeparation(a, b));
}

// Gift-wrapping hull, counter-clockwise.
inline Pts JarvisHull(const Pts& pts) {
  const size_t n = pts.size();
  size_t start = 0;
  for (size_t i = 1; i < n; ++i) {
    if (pts[i].x() < pts[start].x() ||
        (pts[i].x() == pts[start].x() && pts[i].y() < pts[start].y())) {
      start = i;
    }
  }
  Pts hull;
  size_t p = start;
  do {
    hull.push_back(pts[p]);
    size_t q = (p + 1) % n;
    for (size_t r = 0; r < n; ++r) {
      const Eigen::Vector2d a = pts[q] - pts[p];
      const Eigen::Vector2d b = pts[r] - pts[p];
      const double cross = a.x() * b.y() - a.y() * b.x();
      if (cross < 0 || (cross == 0 && b.norm() > a.norm())) q = r;
    }
    p = q;
  } while (p != start && hull.size() <= n);
  return hull;
}

inline bool InsideCcwHull(const Pts& hull, const Eigen::Vector2d& x, double tol = 1e-9) {
  for (size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d a = hull[(i + 1) % hull.size()] - hull[i];
    const Eigen::Vector2d b = x - hull[i];
    if (a.x() * b.y() - a.y() * b.x() < -tol * a.norm()) return false;
  }
  return true;
}

inline Pts RandomPointCloud(std::mt19937_64& rng, const Eigen::Vector2d& center,
                            double radius, int count) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> rad(0.3, 1.0);
  Pts pts;
  for (int i = 0; i < count; ++i) {
    const double t = ang(rng);
    const double r = radius * rad(rng);
    pts.emplace_back(center.x() + r * std::cos(t), center.y() + r * std::sin(t));
  }
  return pts;
}

}  // namespace adaplan::testing
