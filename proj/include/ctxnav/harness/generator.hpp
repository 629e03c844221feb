#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/json.hpp"
#include "ctxnav/core/rng.hpp"
#include "ctxnav/goal/caption.hpp"
#include "ctxnav/goal/goal_json.hpp"
#include "ctxnav/harness/ground_truth.hpp"
#include "ctxnav/world/scene.hpp"

namespace ctxnav::harness {

enum class Placement { floor_free, floor_wall, wall_mounted };

struct PaletteEntry {
  std::string category;
  Placement placement = Placement::floor_free;
  double w_min = 0.5, w_max = 0.5;
  double d_min = 0.5, d_max = 0.5;
  double base_min = 0.0, base_max = 0.0;
  /// Object height range (top - base).
  double h_min = 0.8, h_max = 0.8;
  std::vector<std::string> shapes;
};

/// Furniture tops stay below 1.75 m and wall-mounted objects are shorter
/// than 1 m, so no furniture face passes the wall-plane extent check.
inline const std::vector<PaletteEntry>& default_palette() {
  static const std::vector<PaletteEntry> kPalette = {
      {"bed", Placement::floor_wall, 1.4, 1.7, 1.9, 2.1, 0.0, 0.0, 0.5, 0.6, {}},
      {"sofa", Placement::floor_wall, 1.6, 2.0, 0.8, 0.95, 0.0, 0.0, 0.8, 0.9, {"l-shaped", "long"}},
      {"chair", Placement::floor_free, 0.45, 0.55, 0.45, 0.55, 0.0, 0.0, 0.85, 1.0, {}},
      {"table", Placement::floor_free, 0.8, 1.3, 0.7, 0.9, 0.0, 0.0, 0.72, 0.78, {"round", "square", "rectangular"}},
      {"cabinet", Placement::floor_wall, 0.8, 1.2, 0.4, 0.5, 0.0, 0.0, 0.8, 1.0, {"tall", "wide"}},
      {"dresser", Placement::floor_wall, 1.0, 1.4, 0.45, 0.55, 0.0, 0.0, 0.8, 0.95, {}},
      {"plant", Placement::floor_free, 0.35, 0.5, 0.35, 0.5, 0.0, 0.0, 0.6, 1.2, {"tall", "small"}},
      {"lamp", Placement::floor_free, 0.3, 0.4, 0.3, 0.4, 0.0, 0.0, 1.2, 1.5, {}},
      {"picture", Placement::wall_mounted, 0.5, 0.9, 0.04, 0.04, 1.25, 1.35, 0.4, 0.55, {"square", "rectangular"}},
      {"mirror", Placement::wall_mounted, 0.5, 0.8, 0.04, 0.04, 1.1, 1.2, 0.6, 0.7, {"oval", "round"}},
      {"tv", Placement::wall_mounted, 0.9, 1.3, 0.06, 0.06, 1.1, 1.2, 0.55, 0.65, {"large", "wide"}},
  };
  return kPalette;
}

inline const std::vector<std::string>& default_colors() {
  static const std::vector<std::string> kColors = {"white", "black", "gray", "brown", "red", "blue", "green", "yellow",
                                                   "beige"};
  return kColors;
}

struct GenConfig {
  int rooms = 2;  // 1..4, laid out 1x1, 2x1, 3x1 or 2x2
  int distractors = 1;
  /// Same-category instances next to the context object but with a
  /// different color (forces a color attribute into the goal).
  int attribute_distractors = 0;
  double room_min = 3.6;
  double room_max = 4.6;
  double door_width = 0.9;
  double wall_height = 2.6;
  int fillers_min = 1;
  int fillers_max = 2;
  double second_relation_prob = 0.5;
  double color_prob = 0.8;
  double shape_prob = 0.3;
  /// Target center to context center distance for the near relation.
  double near_min = 0.7;
  double near_max = 1.3;
  /// Context distractors keep at least this distance from every context
  /// instance.
  double distractor_separation = 3.0;
  /// Radius used for the reachability check of target and distractors.
  double reach_radius = 0.25;
  /// The reachable part of the success band must contain a disc of this
  /// radius, so a discrete action sequence can land in it.
  double reach_slack = 0.02;
  std::vector<std::string> target_categories{"picture", "chair", "table", "cabinet", "plant",
                                             "lamp",    "sofa",  "mirror", "tv",     "dresser"};
  int max_attempts = 80;
};

struct GeneratedEpisode {
  world::Scene scene;
  goal::GoalSpec goal;
  std::string target_id;
  std::vector<std::string> distractor_ids;
  std::vector<std::string> attribute_distractor_ids;
  std::uint64_t seed = 0;

  OrderedJson goal_json() const {
    OrderedJson j = goal::emit_goal_json(goal);
    j["instance_id"] = target_id;
    return j;
  }
};

namespace detail {

struct Rect {
  Vec2 lo, hi;
  bool overlaps(const Rect& o, double gap) const {
    return lo.x < o.hi.x + gap && o.lo.x < hi.x + gap && lo.y < o.hi.y + gap && o.lo.y < hi.y + gap;
  }
  Vec2 center() const { return (lo + hi) * 0.5; }
};

struct Placed {
  std::string category;
  Placement placement;
  Rect box;
  double base = 0.0, top = 0.0;
  int room = 0;
  int side = -1;  // wall side for wall placements
  std::map<std::string, std::string> attributes;
};

struct Layout {
  std::vector<Rect> rooms;
  std::vector<world::WallSegment> walls;
  std::vector<Rect> keep_out;  // doorway clearances
  Rect outer;
};

inline Layout make_layout(const GenConfig& cfg, Rng& rng) {
  int cols = 1, rows = 1;
  switch (cfg.rooms) {
    case 1: break;
    case 2: cols = 2; break;
    case 3: cols = 3; break;
    case 4: cols = 2; rows = 2; break;
    default: throw ConfigError("generator: rooms must be within 1..4");
  }
  std::vector<double> xs{0.0}, ys{0.0};
  for (int i = 0; i < cols; ++i) xs.push_back(xs.back() + rng.uniform(cfg.room_min, cfg.room_max));
  for (int j = 0; j < rows; ++j) ys.push_back(ys.back() + rng.uniform(cfg.room_min, cfg.room_max));
  // Snap to centimeters so saved files stay short.
  for (auto& v : xs) v = std::round(v * 100.0) / 100.0;
  for (auto& v : ys) v = std::round(v * 100.0) / 100.0;

  Layout L;
  L.outer = {{xs.front(), ys.front()}, {xs.back(), ys.back()}};
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) L.rooms.push_back({{xs[i], ys[j]}, {xs[i + 1], ys[j + 1]}});
  }
  const double H = cfg.wall_height;
  const Vec2 a = L.outer.lo, b = L.outer.hi;
  L.walls.push_back({{a.x, a.y}, {b.x, a.y}, H});
  L.walls.push_back({{b.x, a.y}, {b.x, b.y}, H});
  L.walls.push_back({{b.x, b.y}, {a.x, b.y}, H});
  L.walls.push_back({{a.x, b.y}, {a.x, a.y}, H});

  auto door = [&](double lo, double hi) {
    const double t = rng.uniform(lo + 0.6, hi - 0.6 - cfg.door_width);
    return std::round(t * 100.0) / 100.0;
  };
  for (int i = 1; i < cols; ++i) {
    for (int j = 0; j < rows; ++j) {
      const double x = xs[i];
      const double d0 = door(ys[j], ys[j + 1]), d1 = d0 + cfg.door_width;
      L.walls.push_back({{x, ys[j]}, {x, d0}, H});
      L.walls.push_back({{x, d1}, {x, ys[j + 1]}, H});
      L.keep_out.push_back({{x - 0.8, d0 - 0.3}, {x + 0.8, d1 + 0.3}});
    }
  }
  for (int j = 1; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const double y = ys[j];
      const double d0 = door(xs[i], xs[i + 1]), d1 = d0 + cfg.door_width;
      L.walls.push_back({{xs[i], y}, {d0, y}, H});
      L.walls.push_back({{d1, y}, {xs[i + 1], y}, H});
      L.keep_out.push_back({{d0 - 0.3, y - 0.8}, {d1 + 0.3, y + 0.8}});
    }
  }
  return L;
}

inline double round_cm(double v) { return std::round(v * 100.0) / 100.0; }

class Placer {
 public:
  Placer(const Layout& layout, Rng& rng) : L_(layout), rng_(rng) {}

  std::vector<Placed> objects;

  const PaletteEntry& entry(const std::string& cat) const {
    for (const auto& e : default_palette()) {
      if (e.category == cat) return e;
    }
    throw ConfigError("generator: category '" + cat + "' not in palette");
  }

  /// A random candidate for `cat` in `room`; nullopt if it collides.
  std::optional<Placed> sample(const std::string& cat, int room, std::optional<int> side = {}) {
    const PaletteEntry& e = entry(cat);
    const Rect R = L_.rooms[static_cast<std::size_t>(room)];
    Placed p;
    p.category = cat;
    p.placement = e.placement;
    p.room = room;
    const double w = round_cm(rng_.uniform(e.w_min, e.w_max));
    const double d = round_cm(rng_.uniform(e.d_min, e.d_max));
    p.base = round_cm(rng_.uniform(e.base_min, e.base_max));
    p.top = round_cm(p.base + rng_.uniform(e.h_min, e.h_max));
    if (e.placement == Placement::floor_free) {
      const bool rot = rng_.bernoulli(0.5);
      const double hw = 0.5 * (rot ? d : w), hd = 0.5 * (rot ? w : d);
      const double margin = 0.55;
      if (R.hi.x - R.lo.x < 2 * (hw + margin) || R.hi.y - R.lo.y < 2 * (hd + margin)) return std::nullopt;
      const Vec2 c{round_cm(rng_.uniform(R.lo.x + hw + margin, R.hi.x - hw - margin)),
                   round_cm(rng_.uniform(R.lo.y + hd + margin, R.hi.y - hd - margin))};
      p.box = {{c.x - hw, c.y - hd}, {c.x + hw, c.y + hd}};
    } else {
      p.side = side ? *side : static_cast<int>(rng_.uniform_int(0, 3));
      const double gap = 0.02;
      const bool horizontal = p.side == 0 || p.side == 2;
      const double lo = horizontal ? R.lo.x : R.lo.y, hi = horizontal ? R.hi.x : R.hi.y;
      if (hi - lo < w + 0.2) return std::nullopt;
      const double s = round_cm(rng_.uniform(lo + 0.1, hi - 0.1 - w));
      switch (p.side) {
        case 0: p.box = {{s, R.lo.y + gap}, {s + w, R.lo.y + gap + d}}; break;
        case 2: p.box = {{s, R.hi.y - gap - d}, {s + w, R.hi.y - gap}}; break;
        case 1: p.box = {{R.hi.x - gap - d, s}, {R.hi.x - gap, s + w}}; break;
        default: p.box = {{R.lo.x + gap, s}, {R.lo.x + gap + d, s + w}}; break;
      }
    }
    if (!fits(p)) return std::nullopt;
    return p;
  }

  /// Wall-mounted object centered over a wall-placed one.
  std::optional<Placed> sample_above(const std::string& cat, const Placed& below) {
    const PaletteEntry& e = entry(cat);
    Placed p;
    p.category = cat;
    p.placement = e.placement;
    p.room = below.room;
    p.side = below.side;
    const double w = round_cm(rng_.uniform(e.w_min, e.w_max));
    const double d = round_cm(rng_.uniform(e.d_min, e.d_max));
    p.base = round_cm(std::max(rng_.uniform(e.base_min, e.base_max), below.top + 0.2));
    p.top = round_cm(p.base + rng_.uniform(e.h_min, e.h_max));
    const Vec2 c = below.box.center();
    const Rect R = L_.rooms[static_cast<std::size_t>(below.room)];
    const double gap = 0.02;
    switch (p.side) {
      case 0: p.box = {{c.x - 0.5 * w, R.lo.y + gap}, {c.x + 0.5 * w, R.lo.y + gap + d}}; break;
      case 2: p.box = {{c.x - 0.5 * w, R.hi.y - gap - d}, {c.x + 0.5 * w, R.hi.y - gap}}; break;
      case 1: p.box = {{R.hi.x - gap - d, c.y - 0.5 * w}, {R.hi.x - gap, c.y + 0.5 * w}}; break;
      default: p.box = {{R.lo.x + gap, c.y - 0.5 * w}, {R.lo.x + gap + d, c.y + 0.5 * w}}; break;
    }
    if (!fits(p)) return std::nullopt;
    return p;
  }

  bool fits(const Placed& p) const {
    const Rect R = L_.rooms[static_cast<std::size_t>(p.room)];
    if (p.box.lo.x < R.lo.x || p.box.lo.y < R.lo.y || p.box.hi.x > R.hi.x || p.box.hi.y > R.hi.y) return false;
    for (const auto& k : L_.keep_out) {
      if (p.box.overlaps(k, 0.0)) return false;
    }
    for (const auto& o : objects) {
      const bool stacked = p.top + 0.1 <= o.base || o.top + 0.1 <= p.base;
      if (stacked) continue;
      const bool passage = p.placement == Placement::floor_free || o.placement == Placement::floor_free;
      if (p.box.overlaps(o.box, passage ? 0.5 : 0.1)) return false;
    }
    return true;
  }

  Rng& rng() { return rng_; }

 private:
  const Layout& L_;
  Rng& rng_;
};

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
}

struct Attempt {
  world::Scene scene;
  goal::GoalSpec goal;
  std::string target_id;
  std::vector<std::string> distractors, attribute_distractors;
};

inline std::optional<Attempt> try_generate(const GenConfig& cfg, Rng& rng) {
  const Layout L = make_layout(cfg, rng);
  Placer P(L, rng);
  const int n_rooms = static_cast<int>(L.rooms.size());
  auto place = [&](auto&& make, int tries = 200) -> std::optional<Placed> {
    for (int t = 0; t < tries; ++t) {
      if (auto p = make()) return p;
    }
    return std::nullopt;
  };

  const std::string T = pick(cfg.target_categories, rng);
  const PaletteEntry& te = P.entry(T);
  const int room_t = static_cast<int>(rng.uniform_int(0, n_rooms - 1));
  std::vector<goal::RelationTriple> relations;
  std::set<std::string> context;

  std::optional<Placed> target, c1;
  std::optional<Placed> c2;
  std::string c1_cat, c2_cat;
  if (te.placement == Placement::wall_mounted) {
    c1_cat = pick(std::vector<std::string>{"sofa", "cabinet", "dresser", "bed"}, rng);
    c1 = place([&] { return P.sample(c1_cat, room_t); });
    if (!c1) return std::nullopt;
    P.objects.push_back(*c1);
    target = place([&] { return P.sample_above(T, *c1); }, 20);
    if (!target) return std::nullopt;
    relations.push_back({c1_cat, T, goal::Relation::near});
    if (rng.bernoulli(cfg.second_relation_prob)) relations.push_back({c1_cat, T, goal::Relation::above});
  } else {
    std::vector<std::string> options;
    for (const auto& e : default_palette()) {
      if (e.category != T && e.placement != Placement::wall_mounted) options.push_back(e.category);
    }
    c1_cat = pick(options, rng);
    c1 = place([&] { return P.sample(c1_cat, room_t); });
    if (!c1) return std::nullopt;
    P.objects.push_back(*c1);
    target = place([&]() -> std::optional<Placed> {
      auto p = P.sample(T, room_t);
      if (!p) return p;
      const double d = distance(p->box.center(), c1->box.center());
      if (d < cfg.near_min || d > cfg.near_max) return std::nullopt;
      return p;
    }, 400);
    if (!target) return std::nullopt;
    relations.push_back({c1_cat, T, goal::Relation::near});
    if (rng.bernoulli(cfg.second_relation_prob)) {
      if (te.placement == Placement::floor_wall && target->top < 1.0) {
        c2_cat = pick(std::vector<std::string>{"picture", "mirror", "tv"}, rng);
        P.objects.push_back(*target);
        c2 = place([&] { return P.sample_above(c2_cat, *target); }, 20);
        P.objects.pop_back();
        if (c2) relations.push_back({c2_cat, T, goal::Relation::below});
      } else {
        std::vector<std::string> others;
        for (const auto& e : default_palette()) {
          if (e.category != T && e.category != c1_cat && e.placement != Placement::wall_mounted) {
            others.push_back(e.category);
          }
        }
        c2_cat = pick(others, rng);
        P.objects.push_back(*target);
        c2 = place([&]() -> std::optional<Placed> {
          auto p = P.sample(c2_cat, room_t);
          if (!p) return p;
          const double d = distance(p->box.center(), target->box.center());
          if (d < 1.0 || d > 2.2) return std::nullopt;
          return p;
        });
        P.objects.pop_back();
        if (c2) {
          const goal::Relation dirs[] = {goal::Relation::left, goal::Relation::right, goal::Relation::front,
                                         goal::Relation::behind};
          relations.push_back({c2_cat, T, dirs[rng.uniform_int(0, 3)]});
        }
      }
    }
  }
  if (c2) P.objects.push_back(*c2);
  context.insert(c1_cat);
  if (c2) context.insert(c2_cat);

  // Attributes.
  const std::string color = pick(default_colors(), rng);
  target->attributes["color"] = color;
  std::optional<std::string> shape;
  if (!te.shapes.empty() && rng.bernoulli(0.7)) {
    shape = pick(te.shapes, rng);
    target->attributes["shape"] = *shape;
  }
  const std::size_t target_slot = P.objects.size();
  P.objects.push_back(*target);

  // Context distractors: same category and attributes, away from every
  // context instance. Other rooms first.
  std::vector<std::size_t> distractor_slots, attr_slots;
  for (int k = 0; k < cfg.distractors; ++k) {
    std::vector<int> others;
    for (int r = 0; r < n_rooms; ++r) {
      if (r != room_t) others.push_back(r);
    }
    std::vector<int> rooms_order;
    for (std::size_t i = 0; i < others.size(); ++i) rooms_order.push_back(others[(k + i) % others.size()]);
    rooms_order.push_back(room_t);
    std::optional<Placed> d;
    for (int room : rooms_order) {
      d = place([&]() -> std::optional<Placed> {
        auto p = P.sample(T, room);
        if (!p) return p;
        for (const auto& o : P.objects) {
          if (context.count(o.category) && distance(o.box.center(), p->box.center()) < cfg.distractor_separation) {
            return std::nullopt;
          }
        }
        if (distance(p->box.center(), target->box.center()) < 1.0) return std::nullopt;
        return p;
      });
      if (d) break;
    }
    if (!d) return std::nullopt;
    d->attributes = target->attributes;
    distractor_slots.push_back(P.objects.size());
    P.objects.push_back(*d);
  }
  for (int k = 0; k < cfg.attribute_distractors; ++k) {
    auto d = place([&]() -> std::optional<Placed> {
      auto p = P.sample(T, room_t);
      if (!p) return p;
      const double dc = distance(p->box.center(), c1->box.center());
      if (dc > cfg.near_max) return std::nullopt;
      return p;
    }, 600);
    if (!d) return std::nullopt;
    std::string other = color;
    while (other == color) other = pick(default_colors(), rng);
    d->attributes["color"] = other;
    if (shape) d->attributes["shape"] = *shape;
    attr_slots.push_back(P.objects.size());
    P.objects.push_back(*d);
  }

  // Fillers from categories outside the goal.
  std::vector<std::string> filler_cats;
  for (const auto& e : default_palette()) {
    if (e.category != T && !context.count(e.category)) filler_cats.push_back(e.category);
  }
  for (int r = 0; r < n_rooms; ++r) {
    const auto n = rng.uniform_int(cfg.fillers_min, cfg.fillers_max);
    for (std::int64_t k = 0; k < n; ++k) {
      const std::string cat = pick(filler_cats, rng);
      if (auto f = place([&] { return P.sample(cat, r); }, 50)) {
        f->attributes["color"] = pick(default_colors(), rng);
        P.objects.push_back(*f);
      }
    }
  }

  Attempt out;
  world::Scene& s = out.scene;
  s.bounds = {L.outer.lo, L.outer.hi};
  s.walls = L.walls;
  for (std::size_t i = 0; i < P.objects.size(); ++i) {
    const auto& o = P.objects[i];
    world::GroundTruthInstance inst;
    char buf[16];
    std::snprintf(buf, sizeof buf, "obj_%02zu", i);
    inst.id = buf;
    inst.category = o.category;
    inst.attributes = o.attributes;
    inst.footprint = Polygon::rectangle(o.box.lo, o.box.hi);
    inst.base_z = o.base;
    inst.top_z = o.top;
    inst.room_hint = "room_" + std::to_string(o.room);
    s.instances.push_back(std::move(inst));
  }
  out.target_id = s.instances[target_slot].id;
  for (auto i : distractor_slots) out.distractors.push_back(s.instances[i].id);
  for (auto i : attr_slots) out.attribute_distractors.push_back(s.instances[i].id);

  // Spawn: a random clear spot in a random room.
  bool spawned = false;
  for (int t = 0; t < 300 && !spawned; ++t) {
    const Rect R = L.rooms[static_cast<std::size_t>(rng.uniform_int(0, n_rooms - 1))];
    const Vec2 p{round_cm(rng.uniform(R.lo.x + 0.5, R.hi.x - 0.5)), round_cm(rng.uniform(R.lo.y + 0.5, R.hi.y - 0.5))};
    if (clearance(s, p) < 0.45) continue;
    if (s.instances[target_slot].footprint.distance_to(p) < 1.5) continue;
    s.spawn = {p, deg_to_rad(30.0 * static_cast<double>(rng.uniform_int(-5, 6)))};
    spawned = true;
  }
  if (!spawned) return std::nullopt;

  // Goal.
  goal::GoalSpec& g = out.goal;
  g.target_category = T;
  g.synonym_map[T] = T;
  for (const auto& c : context) {
    g.context_categories.insert(c);
    g.synonym_map[c] = c;
  }
  g.relations = relations;
  const bool want_color = cfg.attribute_distractors > 0 || rng.bernoulli(cfg.color_prob);
  if (want_color) g.intrinsic["color"] = color;
  if (shape && rng.bernoulli(cfg.shape_prob)) g.intrinsic["shape"] = *shape;
  g.questions = goal::default_questions(T, g.intrinsic);
  g.raw_caption = goal::render_caption(g);
  goal::validate_goal(g);

  // Self-check: exactly the target passes verification on the ground truth,
  // and target and distractors are reachable from the spawn on their own
  // side of the wall.
  const auto matches = gt_matching_instances(s, g);
  if (matches.size() != 1 || matches.front() != out.target_id) return std::nullopt;
  for (std::size_t i : [&] {
         std::vector<std::size_t> v{target_slot};
         v.insert(v.end(), distractor_slots.begin(), distractor_slots.end());
         v.insert(v.end(), attr_slots.begin(), attr_slots.end());
         return v;
       }()) {
    if (!gt_shortest_path(s, s.spawn.position, s.instances[i].footprint, cfg.reach_radius - cfg.reach_slack,
                          0.18 + cfg.reach_slack, 0.05, true)) {
      return std::nullopt;
    }
  }
  world::validate_scene(s);
  return out;
}

}  // namespace detail

/// Procedural episode: grid of rectangular rooms joined by doorways, a target
/// whose goal relations hold, context distractors that break at least one
/// relation and optional attribute distractors. Deterministic per seed.
inline GeneratedEpisode generate_scene(std::uint64_t seed, const GenConfig& cfg = {}) {
  if (cfg.rooms < 1 || cfg.rooms > 4) throw ConfigError("generator: rooms must be within 1..4");
  if (cfg.distractors < 0 || cfg.attribute_distractors < 0) throw ConfigError("generator: negative distractor count");
  Rng root(seed);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    Rng rng = root.fork(static_cast<std::uint64_t>(attempt));
    if (auto a = detail::try_generate(cfg, rng)) {
      GeneratedEpisode ep;
      ep.scene = std::move(a->scene);
      ep.goal = std::move(a->goal);
      ep.target_id = a->target_id;
      ep.distractor_ids = a->distractors;
      ep.attribute_distractor_ids = a->attribute_distractors;
      ep.seed = seed;
      return ep;
    }
  }
  throw GenerationError("generator: no valid scene for seed " + std::to_string(seed) + " after " +
                        std::to_string(cfg.max_attempts) + " attempts");
}

/// Writes scene.json and goal.json into `dir` (created if missing).
inline void write_generated(const GeneratedEpisode& ep, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  write_text_file(dir + "/scene.json", world::save_scene(ep.scene));
  write_text_file(dir + "/goal.json", ep.goal_json());
}

}  // namespace ctxnav::harness
