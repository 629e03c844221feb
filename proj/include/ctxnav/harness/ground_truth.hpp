#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "ctxnav/goal/types.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/mapping/instances.hpp"
#include "ctxnav/mapping/rooms.hpp"
#include "ctxnav/mapping/walls.hpp"
#include "ctxnav/verify/extrinsic.hpp"
#include "ctxnav/world/scene.hpp"

namespace ctxnav::harness {

/// Fully explored map of a scene: wall segments rasterized into the wall
/// layer, instance footprints occupied (optional), everything else free.
inline mapping::GridStack gt_grid(const world::Scene& scene, bool furniture = true, double resolution = 0.05,
                                  const mapping::RoomConfig& rooms = {}) {
  const Vec2 pad{2.0 * resolution, 2.0 * resolution};
  auto g = mapping::GridStack::covering(scene.bounds.min - pad, scene.bounds.max + pad, resolution);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec2 p = g.center_of(g.cell_at(i));
    if (scene.bounds.contains(p)) g.occupancy[i] = mapping::Occupancy::free;
  }
  for (const auto& w : scene.walls) mapping::rasterize_segment(g, w.a, w.b);
  if (furniture) {
    for (const auto& inst : scene.instances) {
      const auto& vs = inst.footprint.vertices;
      Vec2 lo = vs.front(), hi = lo;
      for (const Vec2& v : vs) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
      }
      const mapping::Cell a = g.cell_of(lo), b = g.cell_of(hi);
      for (int y = a.y; y <= b.y; ++y) {
        for (int x = a.x; x <= b.x; ++x) {
          const mapping::Cell c{x, y};
          if (!g.in_bounds(c)) continue;
          if (inst.footprint.distance_to(g.center_of(c)) <= 0.5 * resolution) g.mark_occupied(c);
        }
      }
    }
  }
  mapping::segment_rooms(g, rooms);
  return g;
}

/// Instance records built from ground truth: points on a lattice over each
/// footprint at three heights, exact center and mid height. The lattice
/// always includes both edges, so thin wall-mounted objects get points on
/// their free face too.
inline std::vector<mapping::InstanceRecord> gt_records(const world::Scene& scene, double spacing = 0.1) {
  std::vector<mapping::InstanceRecord> out;
  for (std::size_t i = 0; i < scene.instances.size(); ++i) {
    const auto& inst = scene.instances[i];
    mapping::InstanceRecord r;
    r.id = static_cast<int>(i);
    r.category = inst.category;
    r.source_id = inst.id;
    const auto& vs = inst.footprint.vertices;
    Vec2 lo = vs.front(), hi = lo;
    for (const Vec2& v : vs) {
      lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
      hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    const int nx = static_cast<int>(std::ceil((hi.x - lo.x) / spacing - 1e-9)) + 1;
    const int ny = static_cast<int>(std::ceil((hi.y - lo.y) / spacing - 1e-9)) + 1;
    for (int ix = 0; ix < nx; ++ix) {
      const double x = nx == 1 ? lo.x : lo.x + (hi.x - lo.x) * ix / (nx - 1);
      for (int iy = 0; iy < ny; ++iy) {
        const double y = ny == 1 ? lo.y : lo.y + (hi.y - lo.y) * iy / (ny - 1);
        if (!inst.footprint.contains({x, y}) && inst.footprint.distance_to({x, y}) > 1e-6) continue;
        for (double z : {inst.base_z, inst.mid_height(), inst.top_z}) r.points.push_back({x, y, z});
      }
    }
    const Vec2 c = inst.center();
    if (r.points.empty()) {
      for (double z : {inst.base_z, inst.mid_height(), inst.top_z}) r.points.push_back({c.x, c.y, z});
    }
    r.center = c;
    r.z_hat = inst.mid_height();
    r.observations = 1;
    r.bbox_min = lo;
    r.bbox_max = hi;
    out.push_back(std::move(r));
  }
  return out;
}

/// Exact distance from p to the nearest wall, footprint or scene boundary.
inline double clearance(const world::Scene& scene, Vec2 p) {
  const auto& b = scene.bounds;
  double d = std::min({p.x - b.min.x, b.max.x - p.x, p.y - b.min.y, b.max.y - p.y});
  for (const auto& w : scene.walls) d = std::min(d, point_segment_distance(p, w.a, w.b));
  for (const auto& inst : scene.instances) {
    if (inst.footprint.contains(p)) return 0.0;
    d = std::min(d, inst.footprint.distance_to(p));
  }
  return d;
}

/// Ground-truth shortest path length from `from` to any position whose
/// distance to the goal footprint is at most `success_radius`, for a disc
/// agent of radius `agent_radius` (Dijkstra on a lattice of collision-free
/// points). With `same_side`, band points must see the footprint centroid
/// without crossing a wall. nullopt when the band is unreachable.
inline std::optional<double> gt_shortest_path(const world::Scene& scene, Vec2 from, const Polygon& goal,
                                              double success_radius, double agent_radius = 0.18,
                                              double resolution = 0.05, bool same_side = false) {
  const Vec2 centroid = goal.centroid();
  auto visible = [&](Vec2 p) {
    for (const auto& w : scene.walls) {
      if (segments_intersect(p, centroid, w.a, w.b)) return false;
    }
    return true;
  };
  auto g = mapping::GridStack::covering(scene.bounds.min, scene.bounds.max, resolution);
  const std::size_t n = g.size();
  std::vector<std::uint8_t> ok(n, 0), target(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = g.center_of(g.cell_at(i));
    if (clearance(scene, p) < agent_radius) continue;
    ok[i] = 1;
    target[i] = goal.distance_to(p) <= success_radius && (!same_side || visible(p));
  }
  if (goal.distance_to(from) <= success_radius && (!same_side || visible(from))) return 0.0;
  const mapping::Cell s = g.cell_of(from);
  if (!g.in_bounds(s)) return std::nullopt;
  // The start cell center may sit a little closer to an obstacle than the
  // agent itself; seed from the nearest valid cells around it.
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const mapping::Cell c{s.x + dx, s.y + dy};
      if (!g.in_bounds(c) || !ok[g.index(c)]) continue;
      const double d = distance(from, g.center_of(c));
      if (d < dist[g.index(c)]) {
        dist[g.index(c)] = d;
        pq.push({d, g.index(c)});
      }
    }
  }
  const double a = resolution, b = resolution * std::sqrt(2.0);
  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    if (target[i]) return d;
    const mapping::Cell c = g.cell_at(i);
    for (const mapping::Cell dd : mapping::kNeighbors8) {
      const mapping::Cell nb = c + dd;
      if (!g.in_bounds(nb) || !ok[g.index(nb)]) continue;
      const bool diag = dd.x != 0 && dd.y != 0;
      if (diag && !(ok[g.index({c.x + dd.x, c.y})] && ok[g.index({c.x, c.y + dd.y})])) continue;
      const double nd = d + (diag ? b : a);
      if (nd < dist[g.index(nb)]) {
        dist[g.index(nb)] = nd;
        pq.push({nd, g.index(nb)});
      }
    }
  }
  return std::nullopt;
}

/// True when the instance's ground-truth attributes answer every intrinsic
/// attribute of the goal.
inline bool gt_intrinsic_match(const world::GroundTruthInstance& inst, const goal::GoalSpec& goal) {
  for (const auto& [atype, value] : goal.intrinsic) {
    auto it = inst.attributes.find(atype);
    if (it == inst.attributes.end() || goal::normalize_phrase(it->second) != goal::normalize_phrase(value)) return false;
  }
  return true;
}

/// Ids of the target-category instances that pass both checks on the fully
/// explored ground-truth map.
inline std::vector<std::string> gt_matching_instances(const world::Scene& scene, const goal::GoalSpec& goal,
                                                      const mapping::GridStack& grid,
                                                      const std::vector<mapping::InstanceRecord>& records) {
  std::vector<int> rooms;
  rooms.reserve(records.size());
  for (const auto& r : records) rooms.push_back(mapping::instance_room(grid, r));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scene.instances.size(); ++i) {
    const auto& inst = scene.instances[i];
    if (inst.category != goal.target_category || !gt_intrinsic_match(inst, goal)) continue;
    const auto rf = verify::room_filter(records[i], records, grid, goal, {}, &rooms);
    if (rf.status != verify::FilterStatus::ok || !rf.complete()) continue;
    if (verify::verify_extrinsic(records[i], rf, grid, goal).confirmed) out.push_back(inst.id);
  }
  return out;
}

inline std::vector<std::string> gt_matching_instances(const world::Scene& scene, const goal::GoalSpec& goal) {
  const auto grid = gt_grid(scene);
  return gt_matching_instances(scene, goal, grid, gt_records(scene));
}

}  // namespace ctxnav::harness
