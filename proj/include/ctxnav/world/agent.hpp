#pragma once

#include <string_view>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/geometry.hpp"
#include "ctxnav/world/scene.hpp"

namespace ctxnav::world {

enum class Action { forward, turn_left, turn_right, stop };

inline constexpr std::string_view to_string(Action a) {
  switch (a) {
    case Action::forward: return "forward";
    case Action::turn_left: return "turn-left";
    case Action::turn_right: return "turn-right";
    case Action::stop: return "stop";
  }
  return "stop";
}

/// Embodiment constants: discrete forward step, turn increment, collision disc.
struct AgentConfig {
  double forward_step = 0.25;
  double turn_angle = deg_to_rad(30.0);
  double radius = 0.18;
};

struct AgentState {
  Vec2 position;
  double heading = 0.0;  // (-pi, pi]
  int step_count = 0;
  double path_length = 0.0;
  bool stopped = false;
  /// Set when the last forward action was refused by the collision check.
  bool last_blocked = false;

  bool operator==(const AgentState&) const = default;

  Pose2 pose() const { return {position, heading}; }
  static AgentState at(const Pose2& p) { return AgentState{p.position, wrap_angle(p.heading)}; }
};

/// True if a disc of the given radius swept from a to b touches a wall,
/// an instance footprint, or leaves the scene bounds.
inline bool sweep_collides(const Scene& scene, const Vec2& a, const Vec2& b, double radius) {
  const Bounds& bd = scene.bounds;
  if (b.x - radius < bd.min.x || b.x + radius > bd.max.x || b.y - radius < bd.min.y || b.y + radius > bd.max.y) {
    return true;
  }
  for (const auto& w : scene.walls) {
    if (segment_segment_distance(a, b, w.a, w.b) < radius) return true;
  }
  for (const auto& inst : scene.instances) {
    if (inst.footprint.segment_distance(a, b) < radius) return true;
  }
  return false;
}

/// Applies one action. Forward moves fail atomically when blocked; the step
/// is still counted. Stop freezes the state.
inline AgentState step_agent(const Scene& scene, const AgentState& state, Action action,
                             const AgentConfig& cfg = {}) {
  AgentState next = state;
  if (state.stopped) return next;
  next.step_count += 1;
  next.last_blocked = false;
  switch (action) {
    case Action::forward: {
      const Vec2 target = state.position + unit_from_angle(state.heading) * cfg.forward_step;
      if (sweep_collides(scene, state.position, target, cfg.radius)) {
        next.last_blocked = true;
      } else {
        next.path_length += distance(state.position, target);
        next.position = target;
      }
      break;
    }
    case Action::turn_left: next.heading = wrap_angle(state.heading + cfg.turn_angle); break;
    case Action::turn_right: next.heading = wrap_angle(state.heading - cfg.turn_angle); break;
    case Action::stop: next.stopped = true; break;
  }
  return next;
}

}  // namespace ctxnav::world
