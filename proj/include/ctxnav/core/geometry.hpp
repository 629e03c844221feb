#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace ctxnav {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr Vec2 ground() const { return {x, y}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const Vec2 r = p2 - p1;
  const Vec2 s = q2 - q1;
  const double denom = cross(r, s);
  const Vec2 qp = q1 - p1;
  if (std::abs(denom) < 1e-15) return false;  // parallel; distance test covers touching
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

inline double segment_segment_distance(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  if (segments_intersect(p1, p2, q1, q2)) return 0.0;
  return std::min({point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2),
                   point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)});
}

/// Distance along a ray (origin + t*dir, |dir| = 1) to a segment, if it is hit.
inline std::optional<double> ray_segment_hit(const Vec2& origin, const Vec2& dir, const Vec2& a, const Vec2& b) {
  const Vec2 s = b - a;
  const double denom = cross(dir, s);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const Vec2 ao = a - origin;
  const double t = cross(ao, s) / denom;
  const double u = cross(ao, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

/// Convex polygon in the ground plane, counter-clockwise or clockwise.
struct Polygon {
  std::vector<Vec2> vertices;

  bool operator==(const Polygon&) const = default;

  /// Area-weighted centroid; falls back to the vertex mean for degenerate shapes.
  Vec2 centroid() const {
    double a2 = 0.0;
    Vec2 acc;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = vertices[i];
      const Vec2& q = vertices[(i + 1) % n];
      const double c = cross(p, q);
      a2 += c;
      acc += (p + q) * c;
    }
    if (std::abs(a2) < 1e-12) {
      Vec2 m;
      for (const auto& v : vertices) m += v;
      return n ? m / static_cast<double>(n) : m;
    }
    return acc / (3.0 * a2);
  }

  bool contains(const Vec2& p) const {
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = cross(vertices[(i + 1) % n] - vertices[i], p - vertices[i]);
      if (std::abs(c) < 1e-12) continue;
      const int s = c > 0 ? 1 : -1;
      if (sign == 0) sign = s;
      else if (s != sign) return false;
    }
    return true;
  }

  /// Zero inside, distance to the boundary outside.
  double distance_to(const Vec2& p) const {
    if (contains(p)) return 0.0;
    return boundary_distance(p);
  }

  double boundary_distance(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      best = std::min(best, point_segment_distance(p, vertices[i], vertices[(i + 1) % n]));
    }
    return best;
  }

  /// Minimum distance between a segment and the polygon (zero when they touch or overlap).
  double segment_distance(const Vec2& a, const Vec2& b) const {
    if (contains(a) || contains(b)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      best = std::min(best, segment_segment_distance(a, b, vertices[i], vertices[(i + 1) % n]));
    }
    return best;
  }

  /// Entry and exit distances of a ray through the (convex) polygon.
  std::optional<std::pair<double, double>> ray_interval(const Vec2& origin, const Vec2& dir) const {
    const std::size_t n = vertices.size();
    if (n < 3) return std::nullopt;
    double t_in = -std::numeric_limits<double>::infinity();
    double t_out = std::numeric_limits<double>::infinity();
    // Orientation-independent Cyrus-Beck clipping.
    double orient = 0.0;
    for (std::size_t i = 0; i < n; ++i) orient += cross(vertices[i], vertices[(i + 1) % n]);
    const double sgn = orient >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e = vertices[(i + 1) % n] - vertices[i];
      const Vec2 outward{sgn * e.y, -sgn * e.x};
      const double num = dot(vertices[i] - origin, outward);
      const double den = dot(dir, outward);
      if (std::abs(den) < 1e-15) {
        if (num < 0.0) return std::nullopt;
        continue;
      }
      const double t = num / den;
      if (den < 0.0) t_in = std::max(t_in, t);
      else t_out = std::min(t_out, t);
      if (t_in > t_out) return std::nullopt;
    }
    if (t_out < 0.0) return std::nullopt;
    return std::make_pair(std::max(t_in, 0.0), t_out);
  }

  static Polygon rectangle(const Vec2& lo, const Vec2& hi) {
    return Polygon{{{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}}};
  }
};

}  // namespace ctxnav
