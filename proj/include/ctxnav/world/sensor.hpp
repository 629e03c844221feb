#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ctxnav/core/geometry.hpp"
#include "ctxnav/world/agent.hpp"
#include "ctxnav/world/scene.hpp"

namespace ctxnav::world {

/// Level (gimballed) pinhole depth camera. Pixels are square, so the vertical
/// field of view follows from the aspect ratio.
struct SensorConfig {
  int width = 128;
  int height = 128;
  double hfov = deg_to_rad(79.0);
  double max_range = 5.0;
  double camera_height = 0.88;
};

enum class HitKind : std::uint8_t { none, floor, wall, instance };

/// Depth frame of an extruded 2.5D world. `range` holds the horizontal
/// (ground-plane) distance to the surface seen by each pixel; `index` names
/// the wall or instance that was hit.
struct DepthImage {
  static constexpr float kNoHit = std::numeric_limits<float>::infinity();

  int width = 0;
  int height = 0;
  double hfov = 0.0;
  double camera_height = 0.0;
  double max_range = 0.0;
  Pose2 pose;
  std::vector<float> range;
  std::vector<HitKind> kind;
  std::vector<std::int32_t> index;

  std::size_t pixel(int col, int row) const { return static_cast<std::size_t>(row) * width + col; }
  double focal() const { return 0.5 * width / std::tan(0.5 * hfov); }

  /// Bearing of a column relative to the optical axis (positive to the left).
  double column_angle(int col) const { return std::atan((0.5 * width - (col + 0.5)) / focal()); }
  double row_tangent(int row) const { return (0.5 * height - (row + 0.5)) / focal(); }

  /// Nearest wall/instance range within a column, or kNoHit.
  float column_range(int col) const {
    float best = kNoHit;
    for (int r = 0; r < height; ++r) {
      const std::size_t p = pixel(col, r);
      if (kind[p] == HitKind::wall || kind[p] == HitKind::instance) best = std::min(best, range[p]);
    }
    return best;
  }

  Vec2 ray_direction(int col) const { return unit_from_angle(pose.heading + column_angle(col)); }

  Vec3 back_project(int col, int row) const {
    const double r = range[pixel(col, row)];
    const Vec2 g = pose.position + ray_direction(col) * r;
    return {g.x, g.y, camera_height + r * row_tangent(row)};
  }
};

namespace detail {

struct RayHit {
  double t_in;
  double t_out;
  double base;
  double top;
  HitKind kind;
  std::int32_t index;
};

}  // namespace detail

/// Casts one ray per column against walls and instance prisms, then resolves
/// each pixel against the sorted hits (side faces, top/bottom faces, floor).
inline DepthImage render_depth(const Scene& scene, const AgentState& state, const SensorConfig& sensor = {}) {
  DepthImage img;
  img.width = sensor.width;
  img.height = sensor.height;
  img.hfov = sensor.hfov;
  img.camera_height = sensor.camera_height;
  img.max_range = sensor.max_range;
  img.pose = state.pose();
  const std::size_t n = static_cast<std::size_t>(sensor.width) * sensor.height;
  img.range.assign(n, DepthImage::kNoHit);
  img.kind.assign(n, HitKind::none);
  img.index.assign(n, -1);

  std::vector<detail::RayHit> hits;
  for (int c = 0; c < img.width; ++c) {
    const Vec2 dir = img.ray_direction(c);
    hits.clear();
    for (std::size_t i = 0; i < scene.walls.size(); ++i) {
      const auto& w = scene.walls[i];
      if (auto t = ray_segment_hit(state.position, dir, w.a, w.b); t && *t > 1e-9 && *t <= sensor.max_range) {
        hits.push_back({*t, *t, 0.0, w.height, HitKind::wall, static_cast<std::int32_t>(i)});
      }
    }
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
      const auto& inst = scene.instances[i];
      if (auto iv = inst.footprint.ray_interval(state.position, dir); iv && iv->first <= sensor.max_range) {
        hits.push_back({std::max(iv->first, 1e-9), iv->second, inst.base_z, inst.top_z, HitKind::instance,
                        static_cast<std::int32_t>(i)});
      }
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
      if (a.t_in != b.t_in) return a.t_in < b.t_in;
      return a.kind < b.kind;
    });

    for (int r = 0; r < img.height; ++r) {
      const double tan_e = img.row_tangent(r);
      const double cam = sensor.camera_height;
      const double t_floor = tan_e < 0.0 ? cam / -tan_e : std::numeric_limits<double>::infinity();
      double t_hit = -1.0;
      HitKind k = HitKind::none;
      std::int32_t idx = -1;
      for (const auto& h : hits) {
        if (t_floor < h.t_in) break;
        const double z_in = cam + h.t_in * tan_e;
        if (z_in >= h.base && z_in <= h.top) {
          t_hit = h.t_in;
        } else if (tan_e < 0.0 && z_in > h.top) {
          const double t_top = (h.top - cam) / tan_e;
          if (t_top >= h.t_in && t_top <= h.t_out) t_hit = t_top;
        } else if (tan_e > 0.0 && z_in < h.base) {
          const double t_bot = (h.base - cam) / tan_e;
          if (t_bot >= h.t_in && t_bot <= h.t_out) t_hit = t_bot;
        }
        if (t_hit >= 0.0) {
          k = h.kind;
          idx = h.index;
          break;
        }
      }
      if (t_hit < 0.0 && t_floor <= sensor.max_range) {
        t_hit = t_floor;
        k = HitKind::floor;
      }
      if (t_hit >= 0.0 && t_hit <= sensor.max_range) {
        const std::size_t p = img.pixel(c, r);
        img.range[p] = static_cast<float>(t_hit);
        img.kind[p] = k;
        img.index[p] = idx;
      }
    }
  }
  return img;
}

}  // namespace ctxnav::world
