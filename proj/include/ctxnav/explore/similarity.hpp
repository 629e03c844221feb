#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "ctxnav/core/rng.hpp"
#include "ctxnav/goal/types.hpp"
#include "ctxnav/world/scene.hpp"
#include "ctxnav/world/sensor.hpp"

namespace ctxnav::explore {

/// Per-column goal similarity aligned with a depth frame.
struct SimilarityField {
  std::vector<double> values;
};

struct SimilarityConfig {
  double base = 0.1;
  double context_bonus = 0.3;
  double target_bonus = 0.5;
  /// A context instance within this distance of a column's ray counts as seen.
  double context_radius = 1.0;
  double noise_std = 0.0;
  /// Ablation: score only the target category (plain category prompt).
  bool target_only = false;
};

/// Ground-truth stand-in for text-image similarity: base value, plus a bonus
/// when the column's ray hits or passes near a context-category instance,
/// plus a larger one when it hits a target-category instance.
inline SimilarityField oracle_similarity(const world::Scene& scene, const world::DepthImage& depth,
                                         const goal::GoalSpec& goal, const SimilarityConfig& cfg = {},
                                         Rng* rng = nullptr) {
  SimilarityField out;
  out.values.assign(static_cast<std::size_t>(depth.width), cfg.base);
  std::vector<std::size_t> context_idx;
  if (!cfg.target_only) {
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
      if (goal.context_categories.count(scene.instances[i].category)) context_idx.push_back(i);
    }
  }
  std::set<std::int32_t> hit;
  for (int c = 0; c < depth.width; ++c) {
    hit.clear();
    for (int r = 0; r < depth.height; ++r) {
      const std::size_t p = depth.pixel(c, r);
      if (depth.kind[p] == world::HitKind::instance) hit.insert(depth.index[p]);
    }
    bool target = false;
    bool context = false;
    for (std::int32_t i : hit) {
      const auto& cat = scene.instances[static_cast<std::size_t>(i)].category;
      target = target || cat == goal.target_category;
      context = context || (!cfg.target_only && goal.context_categories.count(cat) > 0);
    }
    if (!context && !context_idx.empty()) {
      const float reach_f = depth.column_range(c);
      const double reach = std::isfinite(reach_f) ? static_cast<double>(reach_f) : depth.max_range;
      const Vec2 a = depth.pose.position;
      const Vec2 b = a + depth.ray_direction(c) * reach;
      for (std::size_t i : context_idx) {
        if (scene.instances[i].footprint.segment_distance(a, b) <= cfg.context_radius) {
          context = true;
          break;
        }
      }
    }
    double v = cfg.base + (context ? cfg.context_bonus : 0.0) + (target ? cfg.target_bonus : 0.0);
    if (rng && cfg.noise_std > 0.0) v += rng->normal(0.0, cfg.noise_std);
    out.values[static_cast<std::size_t>(c)] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

}  // namespace ctxnav::explore
