#pragma once

#include <cmath>
#include <vector>

#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/world/sensor.hpp"

namespace ctxnav::mapping {

/// Grows the grid so the sensor footprint of `depth` fits.
inline void ensure_view_covered(GridStack& g, const world::DepthImage& depth) {
  const Vec2 p = depth.pose.position;
  const double r = depth.max_range + g.resolution();
  g.ensure_contains({p.x - r, p.y - r}, {p.x + r, p.y + r});
}

/// Occupancy update from one frame. Per column, cells along the ray up to the
/// nearest obstacle (or max range) become free; every obstacle pixel marks the
/// cell under its ground projection occupied; floor pixels mark their cell
/// free. Occupied is absorbing, so integrating a frame twice changes nothing.
inline void integrate_depth(GridStack& g, const world::DepthImage& depth) {
  ensure_view_covered(g, depth);
  const Vec2 origin = depth.pose.position;
  const double eps = 1e-6;
  bool changed = false;
  std::vector<Vec2> dirs(static_cast<std::size_t>(depth.width));
  for (int c = 0; c < depth.width; ++c) dirs[static_cast<std::size_t>(c)] = depth.ray_direction(c);

  for (int c = 0; c < depth.width; ++c) {
    const Vec2 dir = dirs[static_cast<std::size_t>(c)];
    const float hit = depth.column_range(c);
    const double reach = std::isfinite(hit) ? static_cast<double>(hit) : depth.max_range;
    const Vec2 end = origin + dir * reach;
    const Cell hit_cell = g.cell_of(end);
    traverse_cells(g, origin, end - dir * eps, [&](Cell cell) {
      if (!g.in_bounds(cell)) return false;
      if (std::isfinite(hit) && cell == hit_cell) return false;
      if (g.occ(cell) == Occupancy::unknown) {
        g.mark_free(cell);
        changed = true;
      }
      return true;
    });
  }

  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      const std::size_t p = depth.pixel(c, r);
      const auto kind = depth.kind[p];
      if (kind == world::HitKind::none) continue;
      const Cell cell = g.cell_of(origin + dirs[static_cast<std::size_t>(c)] * static_cast<double>(depth.range[p]));
      if (!g.in_bounds(cell)) continue;
      if (kind == world::HitKind::floor) {
        if (g.occ(cell) == Occupancy::unknown) {
          g.mark_free(cell);
          changed = true;
        }
      } else if (g.occ(cell) != Occupancy::occupied) {
        g.mark_occupied(cell);
        changed = true;
      }
    }
  }
  if (changed) g.rooms_dirty = true;
}

/// The agent's own disc is known to be traversable.
inline void mark_disc_free(GridStack& g, Vec2 center, double radius) {
  g.ensure_contains({center.x - radius, center.y - radius}, {center.x + radius, center.y + radius});
  const Cell lo = g.cell_of({center.x - radius, center.y - radius});
  const Cell hi = g.cell_of({center.x + radius, center.y + radius});
  for (int y = lo.y; y <= hi.y; ++y) {
    for (int x = lo.x; x <= hi.x; ++x) {
      const Cell c{x, y};
      if (g.in_bounds(c) && distance(g.center_of(c), center) <= radius && g.occ(c) == Occupancy::unknown) {
        g.mark_free(c);
        g.rooms_dirty = true;
      }
    }
  }
}

}  // namespace ctxnav::mapping
