#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

namespace drivelab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z component of the planar cross product
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }

// Rotates v counter-clockwise by the angle whose cosine/sine are given.
constexpr Vec2 rotate(Vec2 v, double c, double s) {
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}
inline Vec2 rotate(Vec2 v, double angle) {
  return rotate(v, std::cos(angle), std::sin(angle));
}

/// Wraps an angle into [-pi, pi).
inline double normalize_angle(double a) {
  if (a >= -std::numbers::pi && a < std::numbers::pi) return a;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r < 0.0) r += two_pi;
  r -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi
  if (r >= std::numbers::pi) r -= two_pi;
  return r;
}

struct Pose {
  Vec2 position{};
  double heading = 0.0;  // radians, [-pi, pi)
};

/// Closest point on segment [a, b] to p, as the clamped parameter t in [0, 1].
inline double project_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return 0.0;
  double t = dot(p - a, ab) / len2;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  return t;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double t = project_on_segment(p, a, b);
  return distance(p, a + (b - a) * t);
}

/// Oriented rectangle: center, heading of the long axis, full length and width.
struct OrientedRect {
  Vec2 center{};
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  Vec2 axis_u() const { return unit_from_angle(heading); }
  Vec2 axis_v() const { return unit_from_angle(heading + std::numbers::pi / 2.0); }

  /// Corners in counter-clockwise order starting at front-right.
  std::array<Vec2, 4> corners() const {
    const Vec2 u = axis_u() * (length / 2.0);
    const Vec2 v = axis_v() * (width / 2.0);
    return {center + u - v, center + u + v, center - u + v, center - u - v};
  }
};

// Tolerance under which two rectangles are considered touching.
inline constexpr double kTouchTolerance = 1e-9;

/// Largest gap between the projections of a and b over the four edge
/// normals. Positive means separated; <= 0 means overlapping, with the
/// magnitude being the shallowest penetration.
inline double obb_separation(const OrientedRect& a, const OrientedRect& b) {
  const std::array<Vec2, 4> axes = {a.axis_u(), a.axis_v(), b.axis_u(), b.axis_v()};
  const Vec2 d = b.center - a.center;
  const Vec2 au = a.axis_u(), av = a.axis_v(), bu = b.axis_u(), bv = b.axis_v();
  double best = -INFINITY;
  for (const Vec2& n : axes) {
    const double ra = a.length / 2.0 * std::abs(dot(au, n)) + a.width / 2.0 * std::abs(dot(av, n));
    const double rb = b.length / 2.0 * std::abs(dot(bu, n)) + b.width / 2.0 * std::abs(dot(bv, n));
    const double gap = std::abs(dot(d, n)) - (ra + rb);
    if (gap > best) best = gap;
  }
  return best;
}

/// Separating-axis overlap test. Touching rectangles overlap.
inline bool obb_overlap(const OrientedRect& a, const OrientedRect& b) {
  return obb_separation(a, b) <= kTouchTolerance;
}

inline bool point_in_rect(Vec2 p, const OrientedRect& r, double tol = 0.0) {
  const Vec2 d = p - r.center;
  return std::abs(dot(d, r.axis_u())) <= r.length / 2.0 + tol &&
         std::abs(dot(d, r.axis_v())) <= r.width / 2.0 + tol;
}

/// Ray parameter of the first hit of origin + t*dir (dir unit) with segment
/// [a, b], or nullopt.
inline std::optional<double> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double denom = cross(dir, e);
  const Vec2 w = a - origin;
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

/// Interval [t0, t1] (t0 <= t1) of the ray line inside a convex shape.
struct RayInterval {
  double enter = 0.0;
  double exit = 0.0;
};

/// Ray-line vs oriented rectangle via the slab method on the rectangle axes.
inline std::optional<RayInterval> ray_rect_interval(Vec2 origin, Vec2 dir, const OrientedRect& r) {
  const Vec2 d = origin - r.center;
  double lo = -INFINITY, hi = INFINITY;
  const std::array<std::pair<Vec2, double>, 2> slabs = {
      std::pair{r.axis_u(), r.length / 2.0}, std::pair{r.axis_v(), r.width / 2.0}};
  for (const auto& [axis, half] : slabs) {
    const double o = dot(d, axis);
    const double k = dot(dir, axis);
    if (std::abs(k) < 1e-15) {
      if (std::abs(o) > half) return std::nullopt;
      continue;
    }
    double t0 = (-half - o) / k;
    double t1 = (half - o) / k;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return std::nullopt;
  }
  return RayInterval{lo, hi};
}

/// Ray-line vs disc.
inline std::optional<RayInterval> ray_disc_interval(Vec2 origin, Vec2 dir, Vec2 c, double radius) {
  const Vec2 m = origin - c;
  const double b = dot(m, dir);
  const double q = dot(m, m) - radius * radius;
  const double disc = b * b - q;
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  return RayInterval{-b - s, -b + s};
}

/// Ray-line vs capsule (points within radius of segment [a, b]).
inline std::optional<RayInterval> ray_capsule_interval(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b,
                                                       double radius) {
  std::optional<RayInterval> out;
  auto merge = [&out](std::optional<RayInterval> in) {
    if (!in) return;
    if (!out) {
      out = in;
    } else {
      out->enter = std::min(out->enter, in->enter);
      out->exit = std::max(out->exit, in->exit);
    }
  };
  const double len = distance(a, b);
  if (len > 0.0) {
    const Vec2 mid = (a + b) * 0.5;
    merge(ray_rect_interval(origin, dir,
                            OrientedRect{mid, std::atan2(b.y - a.y, b.x - a.x), len, 2.0 * radius}));
  }
  merge(ray_disc_interval(origin, dir, a, radius));
  merge(ray_disc_interval(origin, dir, b, radius));
  return out;
}

}  // namespace drivelab
