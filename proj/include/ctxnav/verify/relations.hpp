#pragma once

#include <cmath>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/geometry.hpp"
#include "ctxnav/goal/types.hpp"

namespace ctxnav::verify {

struct Tolerances {
  double eps_m = 0.15;
  double eps_theta = deg_to_rad(25.0);
  double d_near = 2.0;
  double eps_z = 0.15;
};

/// Observer frame at v whose +x axis points at the reference center.
struct LocalFrame {
  Vec2 origin;
  double yaw = 0.0;
  Vec2 ux;
  Vec2 uy;
};

inline LocalFrame align_frame(Vec2 v, Vec2 c_r) {
  const Vec2 d = c_r - v;
  if (d.x == 0.0 && d.y == 0.0) throw DomainError("align_frame: viewpoint coincides with the reference");
  const double yaw = std::atan2(d.y, d.x);
  return {v, yaw, {std::cos(yaw), std::sin(yaw)}, {-std::sin(yaw), std::cos(yaw)}};
}

struct LocalCoords {
  double x = 0.0;
  double y = 0.0;
  double bearing = 0.0;
  /// False when q coincides with the frame origin.
  bool bearing_defined = true;
};

inline LocalCoords to_local(const LocalFrame& f, Vec2 q) {
  const Vec2 d = q - f.origin;
  if (d.x == 0.0 && d.y == 0.0) return {0.0, 0.0, 0.0, false};
  const double x = dot(d, f.ux);
  const double y = dot(d, f.uy);
  return {x, y, std::atan2(y, x), true};
}

/// The seven binary spatial predicates "target is rho of reference",
/// evaluated in the frame aligned to the reference. Above/below compare
/// height estimates only.
inline bool eval_predicate(goal::Relation rho, const LocalFrame& f, Vec2 c_r, Vec2 c_t, double z_r, double z_t,
                           const Tolerances& tol = {}) {
  using goal::Relation;
  switch (rho) {
    case Relation::left: return to_local(f, c_t).y - to_local(f, c_r).y >= tol.eps_m;
    case Relation::right: return to_local(f, c_r).y - to_local(f, c_t).y >= tol.eps_m;
    case Relation::front: {
      const LocalCoords t = to_local(f, c_t);
      return t.bearing_defined && std::abs(t.bearing) <= tol.eps_theta && t.x <= to_local(f, c_r).x - tol.eps_m;
    }
    case Relation::behind: {
      const LocalCoords t = to_local(f, c_t);
      return t.bearing_defined && std::abs(t.bearing) <= tol.eps_theta && t.x >= to_local(f, c_r).x + tol.eps_m;
    }
    case Relation::near: return distance(c_t, c_r) <= tol.d_near;
    case Relation::above: return z_t - z_r >= tol.eps_z;
    case Relation::below: return z_r - z_t >= tol.eps_z;
  }
  throw VocabularyError("eval_predicate: unknown relation");
}

}  // namespace ctxnav::verify
