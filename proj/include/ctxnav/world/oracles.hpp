#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctxnav/core/rng.hpp"
#include "ctxnav/goal/types.hpp"
#include "ctxnav/world/scene.hpp"
#include "ctxnav/world/sensor.hpp"

namespace ctxnav::world {

/// Categories a closed-set COCO detector would confirm (canonical names).
inline const std::set<std::string>& coco_categories() {
  static const std::set<std::string> kCoco = {
      "bed",  "bench", "book",  "bottle", "bowl",  "chair",    "clock",       "couch",   "cup",
      "laptop", "microwave", "oven", "plant", "potted plant", "refrigerator", "sink", "sofa", "table",
      "dining table", "toilet", "tv", "vase"};
  return kCoco;
}

inline bool is_coco(const std::string& category) { return coco_categories().count(goal::normalize_phrase(category)) > 0; }

struct DetectorNoise {
  double flip_prob = 0.0;
  std::map<std::string, std::string> confusion;  // category -> confusable category
  double confidence_min = 1.0;
  double confidence_max = 1.0;
  double min_pixel_fraction = 0.002;
};

struct Detection {
  std::string instance_id;  // ground truth; hidden from the policy
  std::string proposed_category;
  double confidence = 1.0;
  std::vector<int> mask;  // pixel indices into the DepthImage
  bool is_coco = false;
};

/// One detection per ground-truth instance covering enough of the frame.
/// Acceptance thresholds are the caller's job.
inline std::vector<Detection> oracle_detect(const Scene& scene, const DepthImage& depth, const DetectorNoise& noise,
                                            Rng& rng) {
  std::vector<std::vector<int>> masks(scene.instances.size());
  for (std::size_t p = 0; p < depth.kind.size(); ++p) {
    if (depth.kind[p] == HitKind::instance) masks[static_cast<std::size_t>(depth.index[p])].push_back(static_cast<int>(p));
  }
  const double frame = static_cast<double>(depth.width) * depth.height;
  std::vector<Detection> out;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].empty() || static_cast<double>(masks[i].size()) < noise.min_pixel_fraction * frame) continue;
    const auto& inst = scene.instances[i];
    Detection d;
    d.instance_id = inst.id;
    d.proposed_category = inst.category;
    if (auto it = noise.confusion.find(inst.category); it != noise.confusion.end() && rng.bernoulli(noise.flip_prob)) {
      d.proposed_category = it->second;
    }
    d.confidence = noise.confidence_min >= noise.confidence_max
                       ? noise.confidence_max
                       : rng.uniform(noise.confidence_min, noise.confidence_max);
    d.confidence = std::clamp(d.confidence, 0.0, 1.0);
    d.mask = std::move(masks[i]);
    d.is_coco = is_coco(d.proposed_category);
    out.push_back(std::move(d));
  }
  return out;
}

struct VqaNoise {
  /// Weight pulling category answers toward 0.5.
  double category_blend = 0.0;
  /// Masks smaller than this are too small to judge and answer 0.5.
  std::size_t ambiguous_mask_pixels = 0;
  /// Attribute scores shift by a uniform integer offset in [-bound, bound].
  int attribute_offset_bound = 0;
  /// Probability that an attribute answer is forced to Unknown.
  double unknown_prob = 0.0;

  bool noise_free() const { return category_blend == 0.0 && attribute_offset_bound == 0 && unknown_prob == 0.0; }
};

/// P(instance is of the proposed category).
inline double oracle_vqa_category(const Scene& scene, const std::string& instance_id, const std::string& proposed_category,
                                  const VqaNoise& noise = {}, std::size_t mask_pixels = static_cast<std::size_t>(-1)) {
  const auto& inst = scene.at(instance_id);
  if (mask_pixels < noise.ambiguous_mask_pixels) return 0.5;
  const double truth = goal::normalize_phrase(proposed_category) == goal::normalize_phrase(inst.category) ? 1.0 : 0.0;
  const double w = std::clamp(noise.category_blend, 0.0, 1.0);
  return (1.0 - w) * truth + w * 0.5;
}

inline constexpr int kScoreYes = 13;
inline constexpr int kScoreNo = 2;
inline constexpr int kScoreUnknown = 7;

/// Attribute VQA score in {0..15}: Yes-band when the questioned value matches
/// ground truth, No-band when it contradicts, Unknown when the instance has no
/// such attribute.
inline int oracle_vqa_attribute(const Scene& scene, const std::string& instance_id, const goal::AttributeQuestion& q,
                                const VqaNoise& noise, Rng& rng) {
  if (!goal::is_attribute_type(q.atype)) throw VocabularyError("unknown attribute type '" + q.atype + "'");
  const auto& inst = scene.at(instance_id);
  int score = kScoreUnknown;
  if (auto it = inst.attributes.find(q.atype); it != inst.attributes.end()) {
    const bool match = q.value.empty() ? goal::contains_phrase(q.text, it->second)
                                       : goal::normalize_phrase(q.value) == goal::normalize_phrase(it->second);
    score = match ? kScoreYes : kScoreNo;
  }
  if (rng.bernoulli(noise.unknown_prob)) return kScoreUnknown;
  if (noise.attribute_offset_bound > 0) {
    score += static_cast<int>(rng.uniform_int(-noise.attribute_offset_bound, noise.attribute_offset_bound));
  }
  return std::clamp(score, 0, 15);
}

}  // namespace ctxnav::world
