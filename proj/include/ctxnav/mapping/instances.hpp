#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/geometry.hpp"
#include "ctxnav/core/json.hpp"
#include "ctxnav/core/rng.hpp"

namespace ctxnav::mapping {

using VoxelKey = std::uint64_t;

/// Packs the integer voxel coordinates of p (21 bits per axis, offset-binary).
inline VoxelKey voxel_key(const Vec3& p, double resolution) {
  constexpr std::int64_t kOffset = 1 << 20;
  auto q = [&](double v) {
    const auto i = static_cast<std::int64_t>(std::floor(v / resolution)) + kOffset;
    return static_cast<std::uint64_t>(std::clamp<std::int64_t>(i, 0, (1 << 21) - 1));
  };
  return (q(p.x) << 42) | (q(p.y) << 21) | q(p.z);
}

inline std::unordered_set<VoxelKey> voxelize(const std::vector<Vec3>& pts, double resolution) {
  std::unordered_set<VoxelKey> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.insert(voxel_key(p, resolution));
  return out;
}

/// Up to `max_samples` points drawn uniformly without replacement. Without a
/// random source the draw is a deterministic even stride.
inline std::vector<Vec3> sample_points(const std::vector<Vec3>& pts, std::size_t max_samples, Rng* rng) {
  if (pts.size() <= max_samples) return pts;
  std::vector<Vec3> out;
  out.reserve(max_samples);
  if (rng == nullptr) {
    const double step = static_cast<double>(pts.size()) / static_cast<double>(max_samples);
    for (std::size_t i = 0; i < max_samples; ++i) out.push_back(pts[static_cast<std::size_t>(i * step)]);
    return out;
  }
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < max_samples; ++i) {
    const auto j = static_cast<std::size_t>(rng->uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(idx.size() - 1)));
    std::swap(idx[i], idx[j]);
    out.push_back(pts[idx[i]]);
  }
  return out;
}

/// Voxel intersection normalized by the smaller voxel set.
inline double voxel_overlap(const std::unordered_set<VoxelKey>& a, const std::unordered_set<VoxelKey>& b) {
  if (a.empty() || b.empty()) throw DomainError("voxel_overlap: empty point set");
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::size_t common = 0;
  for (VoxelKey k : small) common += large.count(k);
  return static_cast<double>(common) / static_cast<double>(small.size());
}

inline double voxel_overlap(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double resolution = 0.05,
                            std::size_t max_samples = 5000, Rng* rng = nullptr) {
  if (a.empty() || b.empty()) throw DomainError("voxel_overlap: empty point set");
  if (!(resolution > 0.0)) throw DomainError("voxel_overlap: resolution must be positive");
  return voxel_overlap(voxelize(sample_points(a, max_samples, rng), resolution),
                       voxelize(sample_points(b, max_samples, rng), resolution));
}

enum class VerifyState { unverified, category_verified, rejected, confirmed };

inline constexpr std::string_view to_string(VerifyState s) {
  switch (s) {
    case VerifyState::unverified: return "unverified";
    case VerifyState::category_verified: return "category-verified";
    case VerifyState::rejected: return "rejected";
    case VerifyState::confirmed: return "confirmed";
  }
  return "unverified";
}

struct InstanceRecord {
  int id = -1;
  std::string category;
  std::vector<Vec3> points;
  Vec2 center;
  double z_hat = 0.0;
  VerifyState state = VerifyState::unverified;
  int observations = 0;
  /// Ground-truth instance behind the first detection; never read by the policy.
  std::string source_id;

  Vec2 bbox_min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 bbox_max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
};

/// Vertical centroid of the record's points.
inline double instance_height(const InstanceRecord& r) {
  if (r.points.empty()) throw DomainError("instance_height: record has no points");
  double z = 0.0;
  for (const auto& p : r.points) z += p.z;
  return z / static_cast<double>(r.points.size());
}

inline Vec2 ground_centroid(const std::vector<Vec3>& pts) {
  Vec2 c;
  for (const auto& p : pts) c = c + p.ground();
  return pts.empty() ? c : c / static_cast<double>(pts.size());
}

struct AssociationConfig {
  double proximity = 0.26;
  double overlap_threshold = 0.45;
  double voxel = 0.05;
  std::size_t max_samples = 5000;
  /// Stored clouds are thinned to one point per cube of this size.
  double dedup = 0.02;
};

enum class AssociationPass { proximity, overlap, created };

struct Association {
  int id = -1;
  AssociationPass pass = AssociationPass::created;
};

/// Instance-level map with two-pass association.
class InstanceStore {
 public:
  explicit InstanceStore(AssociationConfig cfg = {}) : cfg_(cfg) {}

  const std::vector<InstanceRecord>& records() const { return records_; }
  std::vector<InstanceRecord>& records() { return records_; }
  const AssociationConfig& config() const { return cfg_; }

  const InstanceRecord* find(int id) const {
    for (const auto& r : records_) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }
  InstanceRecord* find(int id) { return const_cast<InstanceRecord*>(std::as_const(*this).find(id)); }

  const InstanceRecord& at(int id) const {
    if (const auto* r = find(id)) return *r;
    throw LookupError("unknown instance record " + std::to_string(id));
  }

  /// Pass 1 merges with a same-category record whose center lies within the
  /// proximity radius of the observation's center; pass 2 merges with the
  /// same-category record of highest voxel overlap above threshold; otherwise
  /// a new record is created.
  Association associate(const std::vector<Vec3>& obs, const std::string& category, Rng* rng = nullptr,
                        const std::string& source_id = {}) {
    if (obs.empty()) throw DomainError("associate: empty observation");
    const Vec2 c = ground_centroid(obs);

    InstanceRecord* best = nullptr;
    double best_d = cfg_.proximity;
    for (auto& r : records_) {
      if (r.category != category) continue;
      const double d = distance(r.center, c);
      if (d < best_d) {
        best_d = d;
        best = &r;
      }
    }
    if (best) {
      merge(*best, obs);
      return {best->id, AssociationPass::proximity};
    }

    Vec2 lo = obs.front().ground(), hi = lo;
    for (const auto& p : obs) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    std::optional<std::unordered_set<VoxelKey>> obs_vox;
    double best_s = cfg_.overlap_threshold;
    for (auto& r : records_) {
      if (r.category != category) continue;
      // Boxes more than one voxel apart cannot share a voxel.
      if (r.bbox_min.x > hi.x + cfg_.voxel || r.bbox_max.x < lo.x - cfg_.voxel || r.bbox_min.y > hi.y + cfg_.voxel ||
          r.bbox_max.y < lo.y - cfg_.voxel) {
        continue;
      }
      if (!obs_vox) obs_vox = voxelize(sample_points(obs, cfg_.max_samples, rng), cfg_.voxel);
      const auto slot = static_cast<std::size_t>(&r - records_.data());
      const double s = r.points.size() <= cfg_.max_samples
                           ? voxel_overlap(*obs_vox, voxels_[slot])
                           : voxel_overlap(*obs_vox, voxelize(sample_points(r.points, cfg_.max_samples, rng), cfg_.voxel));
      if (s > best_s) {
        best_s = s;
        best = &r;
      }
    }
    if (best) {
      merge(*best, obs);
      return {best->id, AssociationPass::overlap};
    }

    InstanceRecord r;
    r.id = next_id_++;
    r.category = category;
    r.source_id = source_id;
    records_.push_back(std::move(r));
    merge(records_.back(), obs);
    return {records_.back().id, AssociationPass::created};
  }

 private:
  AssociationConfig cfg_;
  std::vector<InstanceRecord> records_;
  std::vector<std::unordered_set<VoxelKey>> dedup_;
  std::vector<std::unordered_set<VoxelKey>> voxels_;
  int next_id_ = 0;

  void merge(InstanceRecord& r, const std::vector<Vec3>& obs) {
    const auto slot = static_cast<std::size_t>(&r - records_.data());
    if (dedup_.size() <= slot) dedup_.resize(slot + 1);
    if (voxels_.size() <= slot) voxels_.resize(slot + 1);
    auto& seen = dedup_[slot];
    for (const auto& p : obs) {
      if (seen.insert(voxel_key(p, cfg_.dedup)).second) {
        r.points.push_back(p);
        voxels_[slot].insert(voxel_key(p, cfg_.voxel));
        r.bbox_min = {std::min(r.bbox_min.x, p.x), std::min(r.bbox_min.y, p.y)};
        r.bbox_max = {std::max(r.bbox_max.x, p.x), std::max(r.bbox_max.y, p.y)};
      }
    }
    r.center = ground_centroid(r.points);
    r.z_hat = instance_height(r);
    r.observations += 1;
  }
};

inline OrderedJson instances_to_json(const InstanceStore& store) {
  OrderedJson out = OrderedJson::array();
  for (const auto& r : store.records()) {
    out.push_back({{"id", r.id},
                   {"category", r.category},
                   {"center", {r.center.x, r.center.y}},
                   {"z_hat", r.z_hat},
                   {"n_points", r.points.size()},
                   {"state", to_string(r.state)}});
  }
  return out;
}

}  // namespace ctxnav::mapping
