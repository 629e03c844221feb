#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctxnav/core/errors.hpp"

namespace ctxnav::goal {

enum class Relation { left, right, front, behind, near, above, below };

inline constexpr std::array<Relation, 7> kAllRelations = {Relation::left,   Relation::right, Relation::front,
                                                          Relation::behind, Relation::near,  Relation::above,
                                                          Relation::below};

inline constexpr std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::left: return "left";
    case Relation::right: return "right";
    case Relation::front: return "front";
    case Relation::behind: return "behind";
    case Relation::near: return "near";
    case Relation::above: return "above";
    case Relation::below: return "below";
  }
  return "near";
}

inline Relation parse_relation(std::string_view name) {
  for (Relation r : kAllRelations) {
    if (to_string(r) == name) return r;
  }
  throw VocabularyError("unknown relation type '" + std::string(name) + "'");
}

/// The mutually exclusive partner of a directional relation; near has none.
inline constexpr Relation opposite(Relation r) {
  switch (r) {
    case Relation::left: return Relation::right;
    case Relation::right: return Relation::left;
    case Relation::front: return Relation::behind;
    case Relation::behind: return Relation::front;
    case Relation::above: return Relation::below;
    case Relation::below: return Relation::above;
    case Relation::near: return Relation::near;
  }
  return Relation::near;
}

/// (ref, tgt, rho): "tgt is rho of ref", e.g. a picture above the cabinet is
/// {ref = cabinet, tgt = picture, rho = above}.
struct RelationTriple {
  std::string ref;
  std::string tgt;
  Relation rho = Relation::near;

  auto operator<=>(const RelationTriple&) const = default;
};

inline constexpr std::array<std::string_view, 2> kAttributeTypes = {"color", "shape"};

inline bool is_attribute_type(std::string_view s) {
  return std::find(kAttributeTypes.begin(), kAttributeTypes.end(), s) != kAttributeTypes.end();
}

struct AttributeQuestion {
  std::string atype;
  std::string text;
  /// Attribute value the question asks about; filled from the goal's intrinsic map.
  std::string value;

  bool operator==(const AttributeQuestion&) const = default;
};

struct GoalSpec {
  std::string target_category;
  std::map<std::string, std::string> intrinsic;
  std::vector<AttributeQuestion> questions;
  std::set<std::string> context_categories;
  std::map<std::string, std::string> synonym_map;
  std::vector<RelationTriple> relations;
  std::string raw_caption;

  bool operator==(const GoalSpec&) const = default;

  /// Categories the detector is prompted with: the target plus every context category.
  std::set<std::string> prompt_categories() const {
    std::set<std::string> out = context_categories;
    out.insert(target_category);
    return out;
  }
};

inline constexpr std::size_t kMaxRelations = 6;

/// Lowercase, trimmed, single-spaced.
inline std::string normalize_phrase(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || ch == '_') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline bool contains_phrase(std::string_view haystack, std::string_view needle) {
  return normalize_phrase(haystack).find(normalize_phrase(needle)) != std::string::npos;
}

}  // namespace ctxnav::goal
