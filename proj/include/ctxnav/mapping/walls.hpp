#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ctxnav/core/geometry.hpp"
#include "ctxnav/core/rng.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/world/sensor.hpp"

namespace ctxnav::mapping {

/// Plane n . p + d = 0 with ||n|| = 1.
struct PlaneModel {
  Vec3 normal;
  double offset = 0.0;
  std::vector<Vec3> inliers;

  double signed_distance(const Vec3& p) const { return normal.x * p.x + normal.y * p.y + normal.z * p.z + offset; }
};

struct RansacConfig {
  double inlier_threshold = 0.03;
  std::size_t min_inliers = 400;
  int max_iterations = 1500;
  double max_normal_z = 0.3;
  int max_planes = 3;
  double min_vertical_extent = 1.0;
  /// Hypotheses are scored on at most this many points; inliers are then
  /// counted on the full set.
  std::size_t score_sample = 1000;
  /// Early-exit confidence of the adaptive iteration count.
  double success_probability = 0.99;
  /// Bound on fitted-but-rejected planes removed before giving up.
  int max_rejections = 4;
};

struct WallGate {
  double min_range = 0.5;
  double max_range = 5.0;
  double min_height = 0.8;
  double max_height = 3.0;
  /// Pixel stride in both image axes.
  int stride = 1;
};

/// Back-projected depth points passing both the range gate (3D distance from
/// the camera) and the height gate.
inline std::vector<Vec3> wall_candidate_points(const world::DepthImage& depth, const WallGate& gate = {}) {
  std::vector<Vec3> out;
  const int stride = std::max(gate.stride, 1);
  std::vector<Vec2> dirs(static_cast<std::size_t>(depth.width));
  for (int c = 0; c < depth.width; ++c) dirs[static_cast<std::size_t>(c)] = depth.ray_direction(c);
  for (int r = 0; r < depth.height; r += stride) {
    const double tan_e = depth.row_tangent(r);
    for (int c = 0; c < depth.width; c += stride) {
      const std::size_t p = depth.pixel(c, r);
      const double t = depth.range[p];
      if (!std::isfinite(t)) continue;
      const double z = depth.camera_height + t * tan_e;
      const double d3 = t * std::sqrt(1.0 + tan_e * tan_e);
      if (d3 < gate.min_range || d3 > gate.max_range || z < gate.min_height || z > gate.max_height) continue;
      const Vec2 g = depth.pose.position + dirs[static_cast<std::size_t>(c)] * t;
      out.push_back({g.x, g.y, z});
    }
  }
  return out;
}

namespace detail {

inline Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Least-squares plane through the points (smallest principal axis).
inline bool fit_plane_pca(const std::vector<Vec3>& pts, Vec3& normal, double& offset) {
  if (pts.size() < 3) return false;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : pts) mean += Eigen::Vector3d(p.x, p.y, p.z);
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.info() != Eigen::Success) return false;
  const Eigen::Vector3d n = es.eigenvectors().col(0).normalized();
  normal = {n.x(), n.y(), n.z()};
  offset = -n.dot(mean);
  return true;
}

/// Deterministic sign: first non-negligible component positive.
inline void canonical_sign(Vec3& n, double& d) {
  const double lead = std::abs(n.x) > 1e-9 ? n.x : (std::abs(n.y) > 1e-9 ? n.y : n.z);
  if (lead < 0) {
    n = n * -1.0;
    d = -d;
  }
}

}  // namespace detail

/// Sequential RANSAC for vertical planes. Accepted planes satisfy
/// ||n|| = 1, |n_z| <= max_normal_z, |inliers| >= min_inliers with every
/// inlier within the threshold, and a vertical inlier extent of at least
/// min_vertical_extent.
inline std::vector<PlaneModel> extract_wall_planes(const std::vector<Vec3>& points, const RansacConfig& cfg, Rng& rng) {
  std::vector<PlaneModel> planes;
  if (points.size() < 3) return planes;
  std::vector<Vec3> remaining = points;
  int rejections = 0;

  while (static_cast<int>(planes.size()) < cfg.max_planes && remaining.size() >= std::max<std::size_t>(cfg.min_inliers, 3)) {
    std::vector<Vec3> sample = remaining;
    if (sample.size() > cfg.score_sample) {
      for (std::size_t i = 0; i < cfg.score_sample; ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(sample.size() - 1)));
        std::swap(sample[i], sample[j]);
      }
      sample.resize(cfg.score_sample);
    }
    const double scale = static_cast<double>(remaining.size()) / static_cast<double>(sample.size());
    const auto n_s = static_cast<std::int64_t>(sample.size());

    std::size_t best_count = 0;
    Vec3 best_n;
    double best_d = 0.0;
    int budget = cfg.max_iterations;
    for (int it = 0; it < budget; ++it) {
      const auto i0 = static_cast<std::size_t>(rng.uniform_int(0, n_s - 1));
      const auto i1 = static_cast<std::size_t>(rng.uniform_int(0, n_s - 1));
      const auto i2 = static_cast<std::size_t>(rng.uniform_int(0, n_s - 1));
      if (i0 == i1 || i1 == i2 || i0 == i2) continue;
      Vec3 n = detail::cross3(sample[i1] - sample[i0], sample[i2] - sample[i0]);
      const double len = n.norm();
      if (len < 1e-9) continue;
      n = n * (1.0 / len);
      if (std::abs(n.z) > cfg.max_normal_z) continue;
      const double d = -(n.x * sample[i0].x + n.y * sample[i0].y + n.z * sample[i0].z);
      std::size_t count = 0;
      for (const auto& p : sample) {
        if (std::abs(n.x * p.x + n.y * p.y + n.z * p.z + d) <= cfg.inlier_threshold) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best_n = n;
        best_d = d;
        const double w = static_cast<double>(count) / static_cast<double>(sample.size());
        const double denom = std::log(std::max(1e-12, 1.0 - w * w * w));
        if (denom < 0.0) {
          const double need = std::log(1.0 - cfg.success_probability) / denom;
          budget = std::min(cfg.max_iterations, static_cast<int>(std::ceil(need)) + 1);
        }
      }
    }
    // Not enough support anywhere for another plane.
    if (static_cast<double>(best_count) * scale < 0.8 * static_cast<double>(cfg.min_inliers)) break;

    PlaneModel pl;
    pl.normal = best_n;
    pl.offset = best_d;
    auto split = [&](const Vec3& n, double d, std::vector<Vec3>& in, std::vector<Vec3>* out) {
      in.clear();
      if (out) out->clear();
      for (const auto& p : remaining) {
        if (std::abs(n.x * p.x + n.y * p.y + n.z * p.z + d) <= cfg.inlier_threshold) in.push_back(p);
        else if (out) out->push_back(p);
      }
    };
    std::vector<Vec3> inliers, outliers;
    split(pl.normal, pl.offset, inliers, nullptr);
    Vec3 rn;
    double rd = 0.0;
    if (detail::fit_plane_pca(inliers, rn, rd)) {
      std::vector<Vec3> refit;
      split(rn, rd, refit, nullptr);
      if (refit.size() >= inliers.size()) {
        pl.normal = rn;
        pl.offset = rd;
      }
    }
    split(pl.normal, pl.offset, inliers, &outliers);
    remaining = std::move(outliers);

    double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
    for (const auto& p : inliers) {
      zmin = std::min(zmin, p.z);
      zmax = std::max(zmax, p.z);
    }
    const bool ok = inliers.size() >= cfg.min_inliers && std::abs(pl.normal.z) <= cfg.max_normal_z &&
                    zmax - zmin >= cfg.min_vertical_extent;
    if (!ok) {
      if (++rejections > cfg.max_rejections || inliers.empty()) break;
      continue;
    }
    detail::canonical_sign(pl.normal, pl.offset);
    pl.inliers = std::move(inliers);
    planes.push_back(std::move(pl));
  }
  return planes;
}

/// Ground projections of all inliers become wall cells (and occupied).
inline void rasterize_walls(const std::vector<PlaneModel>& planes, GridStack& g) {
  for (const auto& pl : planes) {
    for (const auto& p : pl.inliers) {
      const Vec2 q = p.ground();
      g.ensure_contains(q, q);
      const Cell c = g.cell_of(q);
      const std::size_t i = g.index(c);
      if (!g.wall[i] || g.occupancy[i] != Occupancy::occupied) {
        g.wall[i] = 1;
        g.occupancy[i] = Occupancy::occupied;
        g.rooms_dirty = true;
      }
    }
  }
}

/// Rasterizes a line segment into the wall layer (used for ground-truth maps).
inline void rasterize_segment(GridStack& g, Vec2 a, Vec2 b) {
  g.ensure_contains({std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)});
  traverse_cells(g, a, b, [&](Cell c) {
    if (g.in_bounds(c)) {
      g.wall[g.index(c)] = 1;
      g.occupancy[g.index(c)] = Occupancy::occupied;
    }
    return true;
  });
  g.rooms_dirty = true;
}

}  // namespace ctxnav::mapping
