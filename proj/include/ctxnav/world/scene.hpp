#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/geometry.hpp"
#include "ctxnav/core/json.hpp"
#include "ctxnav/goal/types.hpp"

namespace ctxnav::world {

struct WallSegment {
  Vec2 a;
  Vec2 b;
  double height = 2.6;

  bool operator==(const WallSegment&) const = default;
};

struct GroundTruthInstance {
  std::string id;
  std::string category;
  std::map<std::string, std::string> attributes;  // keys within {color, shape}
  Polygon footprint;
  double base_z = 0.0;
  double top_z = 1.0;
  std::optional<std::string> room_hint;

  bool operator==(const GroundTruthInstance&) const = default;

  Vec2 center() const { return footprint.centroid(); }
  double mid_height() const { return 0.5 * (base_z + top_z); }
};

struct Bounds {
  Vec2 min;
  Vec2 max;

  bool operator==(const Bounds&) const = default;
  bool contains(const Vec2& p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
};

struct Pose2 {
  Vec2 position;
  double heading = 0.0;  // radians

  bool operator==(const Pose2&) const = default;
};

/// Immutable ground-truth world; safe to share between episodes.
struct Scene {
  Bounds bounds;
  std::vector<WallSegment> walls;
  std::vector<GroundTruthInstance> instances;
  Pose2 spawn;

  bool operator==(const Scene&) const = default;

  const GroundTruthInstance* find(const std::string& id) const {
    for (const auto& inst : instances) {
      if (inst.id == id) return &inst;
    }
    return nullptr;
  }

  const GroundTruthInstance& at(const std::string& id) const {
    if (const auto* p = find(id)) return *p;
    throw LookupError("unknown instance id '" + id + "'");
  }
};

/// Throws ValidationError when a scene invariant does not hold.
inline void validate_scene(const Scene& s) {
  if (!(s.bounds.max.x > s.bounds.min.x && s.bounds.max.y > s.bounds.min.y)) {
    throw ValidationError("bounds: max must exceed min");
  }
  for (std::size_t i = 0; i < s.walls.size(); ++i) {
    if (!(s.walls[i].height > 0.0)) {
      throw ValidationError("walls[" + std::to_string(i) + "].height: must be positive");
    }
  }
  std::set<std::string> ids;
  for (const auto& inst : s.instances) {
    if (!ids.insert(inst.id).second) throw ValidationError("instances: duplicate id '" + inst.id + "'");
    if (!(inst.top_z > inst.base_z)) throw ValidationError("instance '" + inst.id + "': top_z must exceed base_z");
    if (inst.footprint.vertices.size() < 3) {
      throw ValidationError("instance '" + inst.id + "': footprint needs at least 3 vertices");
    }
    for (const auto& v : inst.footprint.vertices) {
      if (!s.bounds.contains(v)) throw ValidationError("instance '" + inst.id + "': footprint outside bounds");
    }
    for (const auto& [k, v] : inst.attributes) {
      if (!goal::is_attribute_type(k)) throw ValidationError("instance '" + inst.id + "': unknown attribute '" + k + "'");
      if (v.empty()) throw ValidationError("instance '" + inst.id + "': empty attribute '" + k + "'");
    }
  }
}

namespace detail {

inline Vec2 parse_point(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Parses and validates a scene document.
inline Scene load_scene(const Json& doc) {
  using ctxnav::detail::require;
  using ctxnav::detail::require_number;
  using ctxnav::detail::require_string;
  Scene s;
  const Json& b = require(doc, "bounds", "scene");
  s.bounds.min = {require_number(b, "xmin", "scene.bounds"), require_number(b, "ymin", "scene.bounds")};
  s.bounds.max = {require_number(b, "xmax", "scene.bounds"), require_number(b, "ymax", "scene.bounds")};

  const Json& walls = require(doc, "walls", "scene");
  if (!walls.is_array()) throw ParseError("scene.walls: expected an array");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const std::string where = "scene.walls[" + std::to_string(i) + "]";
    WallSegment w;
    w.a = {require_number(walls[i], "x1", where), require_number(walls[i], "y1", where)};
    w.b = {require_number(walls[i], "x2", where), require_number(walls[i], "y2", where)};
    w.height = require_number(walls[i], "height", where);
    s.walls.push_back(w);
  }

  const Json& insts = require(doc, "instances", "scene");
  if (!insts.is_array()) throw ParseError("scene.instances: expected an array");
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const std::string where = "scene.instances[" + std::to_string(i) + "]";
    const Json& ji = insts[i];
    GroundTruthInstance inst;
    const Json& id = require(ji, "id", where);
    if (id.is_string()) inst.id = id.get<std::string>();
    else if (id.is_number_integer()) inst.id = std::to_string(id.get<long long>());
    else throw ParseError(where + ".id: expected a string or integer");
    inst.category = goal::normalize_phrase(require_string(ji, "category", where));
    if (auto it = ji.find("attributes"); it != ji.end()) {
      if (!it->is_object()) throw ParseError(where + ".attributes: expected an object");
      for (const auto& [k, v] : it->items()) {
        if (v.is_null()) continue;
        if (!v.is_string()) throw ParseError(where + ".attributes." + k + ": expected a string");
        inst.attributes[k] = v.get<std::string>();
      }
    }
    const Json& fp = require(ji, "footprint", where);
    if (!fp.is_array()) throw ParseError(where + ".footprint: expected an array of points");
    for (std::size_t k = 0; k < fp.size(); ++k) {
      inst.footprint.vertices.push_back(detail::parse_point(fp[k], where + ".footprint[" + std::to_string(k) + "]"));
    }
    inst.base_z = require_number(ji, "base_z", where);
    inst.top_z = require_number(ji, "top_z", where);
    if (auto it = ji.find("room_hint"); it != ji.end() && it->is_string()) inst.room_hint = it->get<std::string>();
    s.instances.push_back(std::move(inst));
  }

  const Json& sp = require(doc, "spawn", "scene");
  s.spawn.position = {require_number(sp, "x", "scene.spawn"), require_number(sp, "y", "scene.spawn")};
  s.spawn.heading = wrap_angle(deg_to_rad(require_number(sp, "heading_deg", "scene.spawn")));

  validate_scene(s);
  return s;
}

inline Scene load_scene_file(const std::string& path) { return load_scene(read_json_file(path)); }

inline OrderedJson save_scene(const Scene& s) {
  OrderedJson doc;
  doc["bounds"] = {{"xmin", s.bounds.min.x}, {"ymin", s.bounds.min.y}, {"xmax", s.bounds.max.x}, {"ymax", s.bounds.max.y}};
  OrderedJson walls = OrderedJson::array();
  for (const auto& w : s.walls) {
    walls.push_back({{"x1", w.a.x}, {"y1", w.a.y}, {"x2", w.b.x}, {"y2", w.b.y}, {"height", w.height}});
  }
  doc["walls"] = std::move(walls);
  OrderedJson insts = OrderedJson::array();
  for (const auto& inst : s.instances) {
    OrderedJson ji;
    ji["id"] = inst.id;
    ji["category"] = inst.category;
    OrderedJson attrs = OrderedJson::object();
    for (const auto& [k, v] : inst.attributes) attrs[k] = v;
    ji["attributes"] = std::move(attrs);
    OrderedJson fp = OrderedJson::array();
    for (const auto& v : inst.footprint.vertices) fp.push_back({v.x, v.y});
    ji["footprint"] = std::move(fp);
    ji["base_z"] = inst.base_z;
    ji["top_z"] = inst.top_z;
    if (inst.room_hint) ji["room_hint"] = *inst.room_hint;
    insts.push_back(std::move(ji));
  }
  doc["instances"] = std::move(insts);
  doc["spawn"] = {{"x", s.spawn.position.x}, {"y", s.spawn.position.y}, {"heading_deg", rad_to_deg(s.spawn.heading)}};
  return doc;
}

}  // namespace ctxnav::world
