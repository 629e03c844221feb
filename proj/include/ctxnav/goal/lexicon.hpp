#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctxnav/core/json.hpp"
#include "ctxnav/goal/types.hpp"

namespace ctxnav::goal {

/// Word lists and phrase tables backing canonicalization and the caption
/// grammar. `builtin()` ships a small indoor vocabulary; `extend` merges a
/// user document of the same shape.
struct Lexicon {
  /// Surface form -> canonical category. Canonical names map to themselves.
  std::map<std::string, std::string> synonyms;
  std::set<std::string> colors;
  std::set<std::string> color_modifiers;
  std::set<std::string> shapes;
  std::set<std::string> materials;
  std::set<std::string> determiners;
  /// Region/direction/generic nouns dropped from context (e.g. "corner").
  std::set<std::string> stop_nouns;
  /// Token sequence -> relation; the object noun phrase follows.
  std::vector<std::pair<std::vector<std::string>, Relation>> relation_phrases;
  /// Tokens allowed between relation clauses.
  std::set<std::string> fillers;

  bool is_category(const std::string& phrase) const { return synonyms.count(phrase) > 0; }

  std::string canonical(const std::string& phrase) const {
    auto it = synonyms.find(phrase);
    return it == synonyms.end() ? phrase : it->second;
  }

  bool is_modifier(const std::string& w) const {
    return colors.count(w) || color_modifiers.count(w) || shapes.count(w) || materials.count(w);
  }

  void add_category(const std::string& canonical_name, std::initializer_list<const char*> variants = {}) {
    synonyms[canonical_name] = canonical_name;
    for (const char* v : variants) synonyms[v] = canonical_name;
  }

  static const Lexicon& builtin() {
    static const Lexicon kLexicon = make_builtin();
    return kLexicon;
  }

  void extend(const Json& doc) {
    if (auto it = doc.find("synonyms"); it != doc.end()) {
      for (const auto& [k, v] : it->items()) {
        const std::string canon = normalize_phrase(v.get<std::string>());
        synonyms[normalize_phrase(k)] = canon;
        synonyms.emplace(canon, canon);
      }
    }
    auto merge = [&](const char* key, std::set<std::string>& dst) {
      if (auto it = doc.find(key); it != doc.end()) {
        for (const auto& w : *it) dst.insert(normalize_phrase(w.get<std::string>()));
      }
    };
    merge("colors", colors);
    merge("shapes", shapes);
    merge("materials", materials);
    merge("stop_nouns", stop_nouns);
  }

 private:
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ' ') {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
  }

  static Lexicon make_builtin() {
    Lexicon lx;
    lx.add_category("sofa", {"couch", "settee", "loveseat"});
    lx.add_category("chair", {"armchair", "stool", "seat"});
    lx.add_category("bed");
    lx.add_category("table", {"dining table", "coffee table", "desk"});
    lx.add_category("cabinet", {"cupboard", "wardrobe", "closet"});
    lx.add_category("dresser", {"chest of drawers", "drawers"});
    lx.add_category("picture", {"painting", "photo", "photograph", "poster", "artwork", "frame"});
    lx.add_category("mirror");
    lx.add_category("plant", {"potted plant", "houseplant", "flowerpot"});
    lx.add_category("lamp", {"floor lamp", "table lamp"});
    lx.add_category("tv", {"television", "tv monitor", "screen"});
    lx.add_category("staircase", {"stairs", "stairway"});
    lx.add_category("toilet");
    lx.add_category("sink", {"basin"});
    lx.add_category("bathtub", {"tub"});
    lx.add_category("shelf", {"bookshelf", "bookcase", "shelves"});
    lx.add_category("nightstand", {"night stand", "bedside table"});
    lx.add_category("refrigerator", {"fridge"});
    lx.add_category("oven", {"stove"});
    lx.add_category("pillow", {"cushion"});
    lx.add_category("rug", {"carpet", "mat"});
    lx.add_category("window");
    lx.add_category("door");
    lx.add_category("fireplace");
    lx.add_category("clock");
    lx.add_category("vase");
    lx.add_category("radiator");
    lx.add_category("counter", {"countertop", "kitchen counter"});

    lx.colors = {"white", "black", "gray", "grey", "brown", "red",   "orange", "yellow", "green",
                 "blue",  "purple", "pink", "beige", "gold",  "silver", "cream", "tan"};
    lx.color_modifiers = {"light", "dark", "pale", "bright"};
    lx.shapes = {"round", "square", "rectangular", "oval", "circular", "tall", "short", "long", "wide",
                 "small", "large", "l-shaped", "triangular", "narrow"};
    lx.materials = {"wooden", "wood", "metal", "metallic", "glass", "leather", "fabric", "marble", "plastic",
                    "wicker", "velvet", "ceramic", "framed"};
    lx.determiners = {"a", "an", "the", "some", "another"};
    lx.stop_nouns = {"corner", "side", "left side", "right side", "wall", "floor", "ceiling", "room", "area",
                     "middle", "center", "centre", "stuff", "things", "thing", "object", "space", "image",
                     "corner of the room", "end"};
    lx.fillers = {"and", "located", "placed", "positioned", "sitting", "standing", "hanging", "mounted",
                  "that", "which", "is", "it", "its", "also", "just", "right", "directly"};

    const std::vector<std::pair<std::string, Relation>> phrases = {
        {"to the left of", Relation::left},   {"on the left of", Relation::left},  {"left of", Relation::left},
        {"to the right of", Relation::right}, {"on the right of", Relation::right}, {"right of", Relation::right},
        {"in front of", Relation::front},     {"behind", Relation::behind},        {"in back of", Relation::behind},
        {"on top of", Relation::above},       {"above", Relation::above},          {"over", Relation::above},
        {"below", Relation::below},           {"under", Relation::below},          {"beneath", Relation::below},
        {"underneath", Relation::below},      {"next to", Relation::near},         {"beside", Relation::near},
        {"near", Relation::near},             {"close to", Relation::near},        {"by", Relation::near},
    };
    for (const auto& [text, rel] : phrases) lx.relation_phrases.emplace_back(split(text), rel);
    // Longest phrases first so "to the left of" wins over "left of".
    std::stable_sort(lx.relation_phrases.begin(), lx.relation_phrases.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    return lx;
  }
};

}  // namespace ctxnav::goal
