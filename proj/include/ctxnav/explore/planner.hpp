#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/world/agent.hpp"

namespace ctxnav::explore {

struct PlannerConfig {
  /// Multiplier on the step cost of unknown cells.
  double unknown_cost = 2.0;
  /// Cells closer than this to an occupied cell are impassable (except near
  /// the start, where the agent may already be).
  double hard_clearance = 0.2;
  /// Extra cost ramps up linearly inside this clearance.
  double soft_clearance = 0.45;
  double soft_weight = 3.0;
  double start_escape = 0.3;
  /// A path ending within this distance of the waypoint reaches it.
  double goal_radius = 0.15;
  double lookahead = 0.4;
  double turn_angle = deg_to_rad(30.0);
  double arrive_radius = 0.2;
  /// Used to refuse forward moves the map already shows as blocked.
  double agent_radius = 0.18;
  double forward_step = 0.25;
};

enum class PlanStatus { moving, arrived, unreachable };

struct PlanResult {
  world::Action action = world::Action::stop;
  PlanStatus status = PlanStatus::unreachable;
  std::vector<mapping::Cell> path;
  double cost = 0.0;
};

/// A* over the occupancy grid (8-connected, no corner cutting) with
/// clearance-shaped costs, to the first cell satisfying `is_goal`. `h` must
/// not overestimate the remaining cost. Empty if no goal cell is reachable.
template <class IsGoal, class Heuristic>
std::vector<mapping::Cell> plan_path_to(const mapping::GridStack& g, Vec2 start, IsGoal is_goal, Heuristic h,
                                        const PlannerConfig& cfg = {}, double* cost_out = nullptr) {
  using mapping::Cell;
  using mapping::Occupancy;
  const Cell s = g.cell_of(start);
  if (!g.in_bounds(s)) return {};
  const double res = g.resolution();
  const auto clearance = mapping::chamfer_distance(
      g, [&](std::size_t i) { return g.occupancy[i] == Occupancy::occupied; });

  const double start_clearance = clearance[g.index(s)];
  auto passable = [&](Cell c) {
    if (!g.in_bounds(c)) return false;
    const std::size_t i = g.index(c);
    if (g.occupancy[i] == Occupancy::occupied) return false;
    if (clearance[i] < cfg.hard_clearance) {
      // Near the start the agent may already be inside the margin; it may
      // move there but not closer to an obstacle.
      return distance(g.center_of(c), start) <= cfg.start_escape && clearance[i] >= start_clearance - 1e-9;
    }
    return true;
  };
  auto cell_cost = [&](Cell c) {
    const std::size_t i = g.index(c);
    double k = g.occupancy[i] == Occupancy::unknown ? cfg.unknown_cost : 1.0;
    const double cl = clearance[i];
    if (cl < cfg.soft_clearance) {
      const double t = (cfg.soft_clearance - std::max(cl, cfg.hard_clearance)) / (cfg.soft_clearance - cfg.hard_clearance);
      k += cfg.soft_weight * std::clamp(t, 0.0, 1.0);
    }
    return k;
  };

  const std::size_t n = g.size();
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> parent(n, -1);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  cost[g.index(s)] = 0.0;
  open.push({h(s), g.index(s)});
  std::size_t found = n;
  while (!open.empty()) {
    const auto [f, i] = open.top();
    open.pop();
    const Cell c = g.cell_at(i);
    if (f - h(c) > cost[i] + 1e-6) continue;
    if (is_goal(c)) {
      found = i;
      break;
    }
    for (const Cell d : mapping::kNeighbors8) {
      const Cell nb = c + d;
      if (!passable(nb)) continue;
      const bool diag = d.x != 0 && d.y != 0;
      if (diag && !(passable({c.x + d.x, c.y}) && passable({c.x, c.y + d.y}))) continue;
      const double step = (diag ? std::sqrt(2.0) : 1.0) * res * cell_cost(nb);
      const std::size_t j = g.index(nb);
      const double nc = cost[i] + step;
      if (nc < cost[j]) {
        cost[j] = nc;
        parent[j] = static_cast<std::int32_t>(i);
        open.push({nc + h(nb), j});
      }
    }
  }
  if (found == n) return {};
  std::vector<Cell> path;
  for (auto i = static_cast<std::int64_t>(found); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    path.push_back(g.cell_at(static_cast<std::size_t>(i)));
  }
  std::reverse(path.begin(), path.end());
  if (cost_out) *cost_out = cost[found];
  return path;
}

/// Path to a cell within goal_radius of `goal`.
inline std::vector<mapping::Cell> plan_path(const mapping::GridStack& g, Vec2 start, Vec2 goal,
                                            const PlannerConfig& cfg = {}, double* cost_out = nullptr) {
  const double slack = 0.5 * g.resolution();
  return plan_path_to(
      g, start, [&](mapping::Cell c) { return distance(g.center_of(c), goal) <= cfg.goal_radius + slack; },
      [&](mapping::Cell c) { return std::max(0.0, distance(g.center_of(c), goal) - cfg.goal_radius); }, cfg,
      cost_out);
}

/// Turn toward a bearing error: positive (counter-clockwise) turns left; an
/// exact reversal turns left too.
inline world::Action turn_toward(double error) {
  return error >= 0.0 || std::abs(std::abs(error) - kPi) < 1e-9 ? world::Action::turn_left : world::Action::turn_right;
}

/// Smallest distance from a point on the forward sweep to an occupied cell
/// center, over the cells within reach.
inline double sweep_clearance(const mapping::GridStack& g, Vec2 from, Vec2 to, double reach) {
  const double res = g.resolution();
  const int k = static_cast<int>(std::ceil(reach / res)) + 1;
  const mapping::Cell a = g.cell_of({std::min(from.x, to.x), std::min(from.y, to.y)});
  const mapping::Cell b = g.cell_of({std::max(from.x, to.x), std::max(from.y, to.y)});
  double best = std::numeric_limits<double>::infinity();
  for (int y = a.y - k; y <= b.y + k; ++y) {
    for (int x = a.x - k; x <= b.x + k; ++x) {
      const mapping::Cell c{x, y};
      if (!g.in_bounds(c) || g.occupancy[g.index(c)] != mapping::Occupancy::occupied) continue;
      best = std::min(best, point_segment_distance(g.center_of(c), from, to));
    }
  }
  return best;
}

/// True when a forward step along `heading` would bring the agent closer
/// than its radius to a mapped obstacle it is not already touching.
inline bool forward_blocked_on_map(const mapping::GridStack& g, Vec2 position, double heading,
                                   const PlannerConfig& cfg) {
  const Vec2 dir = unit_from_angle(heading);
  const double ahead = sweep_clearance(g, position + dir * 1e-3, position + dir * cfg.forward_step, cfg.agent_radius);
  if (ahead >= cfg.agent_radius) return false;
  return ahead < sweep_clearance(g, position, position, cfg.agent_radius) - 1e-9;
}

/// Next discrete action toward `waypoint`, replanned against the current
/// map. `arrived` (action stop) within arrive_radius; `unreachable` when no
/// path exists, leaving the choice of a new waypoint to the caller.
inline PlanResult plan_local(const mapping::GridStack& g, const world::AgentState& state, Vec2 waypoint,
                             const PlannerConfig& cfg = {}) {
  PlanResult out;
  if (distance(state.position, waypoint) <= cfg.arrive_radius) {
    out.status = PlanStatus::arrived;
    out.action = world::Action::stop;
    return out;
  }
  out.path = plan_path(g, state.position, waypoint, cfg, &out.cost);
  if (out.path.empty()) {
    out.status = PlanStatus::unreachable;
    out.action = world::Action::stop;
    return out;
  }
  // Farthest path cell within the lookahead distance; the waypoint itself at
  // the end of the path.
  Vec2 aim = g.center_of(out.path.back());
  if (distance(aim, waypoint) <= cfg.goal_radius + g.resolution()) aim = waypoint;
  for (const auto& c : out.path) {
    const Vec2 p = g.center_of(c);
    if (distance(p, state.position) > cfg.lookahead) {
      aim = p;
      break;
    }
  }
  out.status = PlanStatus::moving;
  if (distance(aim, state.position) < 1e-9) {
    out.action = world::Action::forward;
    return out;
  }
  // Headings reachable by turning form a fixed lattice around the current
  // one. Prefer the lattice heading closest to the aim; if the map blocks it,
  // take the clear heading whose step ends farthest along the path. The
  // choice does not depend on the current heading, so turning toward it
  // never oscillates.
  const int n = std::max(1, static_cast<int>(std::lround(2.0 * kPi / cfg.turn_angle)));
  auto wrap_k = [n](int k) {
    k = ((k % n) + n) % n;
    return k > n / 2 ? k - n : k;
  };
  const Vec2 d = aim - state.position;
  int best_k = wrap_k(static_cast<int>(std::lround(wrap_angle(std::atan2(d.y, d.x) - state.heading) / cfg.turn_angle)));
  if (forward_blocked_on_map(g, state.position, state.heading + best_k * cfg.turn_angle, cfg)) {
    // Score: furthest path index near the step's end point, then smallest
    // angular deviation from the aim.
    const int aim_k = best_k;
    int best_progress = -2;
    int best_dev = n;
    for (int i = 0; i < n; ++i) {
      const int k = wrap_k(i);
      const double h = state.heading + k * cfg.turn_angle;
      if (forward_blocked_on_map(g, state.position, h, cfg)) continue;
      const Vec2 end = state.position + unit_from_angle(h) * cfg.forward_step;
      int progress = -1;
      for (std::size_t j = 0; j < out.path.size(); ++j) {
        if (distance(g.center_of(out.path[j]), end) <= 0.2) progress = static_cast<int>(j);
      }
      const int dev = std::abs(wrap_k(k - aim_k));
      if (progress > best_progress || (progress == best_progress && dev < best_dev)) {
        best_progress = progress;
        best_dev = dev;
        best_k = k;
      }
    }
  }
  out.action = best_k == 0 ? world::Action::forward : turn_toward(best_k * cfg.turn_angle);
  return out;
}

}  // namespace ctxnav::explore
