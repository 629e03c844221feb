#pragma once

#include <cmath>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/explore/similarity.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/mapping/occupancy.hpp"
#include "ctxnav/world/sensor.hpp"

namespace ctxnav::explore {

/// Confidence of a column at bearing theta from the optical axis:
/// cos^2(theta / (fov / 2) * pi / 2).
inline double view_confidence(double theta, double hfov) {
  const double c = std::cos(std::abs(theta) / (0.5 * hfov) * (0.5 * kPi));
  return c * c;
}

/// Fuses one (value, confidence) sample into a cell.
inline void fuse_value(float& value, float& confidence, double v_new, double c_new) {
  const double c_old = confidence;
  const double sum = c_old + c_new;
  if (sum <= 0.0) return;
  value = static_cast<float>((c_old * value + c_new * v_new) / sum);
  confidence = static_cast<float>((c_old * c_old + c_new * c_new) / sum);
}

/// Splats each column's similarity onto the free cells its ray traverses (up
/// to the nearest obstacle or max range). Within one frame a cell takes the
/// sample of its most confident column; frames are then fused by
/// confidence-weighted averaging.
inline void update_value_map(mapping::GridStack& g, const SimilarityField& sim, const world::DepthImage& depth) {
  if (sim.values.size() != static_cast<std::size_t>(depth.width)) {
    throw DomainError("update_value_map: similarity width does not match the depth frame");
  }
  mapping::ensure_view_covered(g, depth);
  const Vec2 origin = depth.pose.position;
  std::vector<float> frame_v(g.size(), 0.0f);
  std::vector<float> frame_c(g.size(), -1.0f);
  std::vector<std::size_t> touched;
  for (int c = 0; c < depth.width; ++c) {
    const double conf = view_confidence(depth.column_angle(c), depth.hfov);
    const double v = sim.values[static_cast<std::size_t>(c)];
    const Vec2 dir = depth.ray_direction(c);
    const float hit = depth.column_range(c);
    const double reach = std::isfinite(hit) ? static_cast<double>(hit) : depth.max_range;
    mapping::traverse_cells(g, origin, origin + dir * (reach - 1e-6), [&](mapping::Cell cell) {
      if (!g.in_bounds(cell)) return false;
      const std::size_t i = g.index(cell);
      if (g.occupancy[i] != mapping::Occupancy::free) return true;
      if (frame_c[i] < 0.0f) touched.push_back(i);
      if (conf > frame_c[i]) {
        frame_c[i] = static_cast<float>(conf);
        frame_v[i] = static_cast<float>(v);
      }
      return true;
    });
  }
  for (std::size_t i : touched) fuse_value(g.value[i], g.confidence[i], frame_v[i], frame_c[i]);
}

}  // namespace ctxnav::explore
