#pragma once

#include <map>
#include <string>

#include "ctxnav.hpp"

namespace fixtures {

using ctxnav::Vec2;
using ctxnav::world::GroundTruthInstance;
using ctxnav::world::Scene;
using ctxnav::world::WallSegment;

inline ctxnav::Polygon rect(Vec2 lo, Vec2 hi) { return {{{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}}}; }

/// Closed rectangular room [0,w] x [0,h] with the spawn in the middle.
inline Scene box_room(double w, double h, double wall_height = 2.6) {
  Scene s;
  s.bounds = {{0.0, 0.0}, {w, h}};
  s.walls = {{{0, 0}, {w, 0}, wall_height}, {{w, 0}, {w, h}, wall_height},
             {{w, h}, {0, h}, wall_height}, {{0, h}, {0, 0}, wall_height}};
  s.spawn = {{0.5 * w, 0.5 * h}, 0.0};
  return s;
}

inline GroundTruthInstance& add_box(Scene& s, const std::string& id, const std::string& cat, Vec2 lo, Vec2 hi,
                                    double base, double top, std::map<std::string, std::string> attrs = {}) {
  GroundTruthInstance g;
  g.id = id;
  g.category = cat;
  g.footprint = rect(lo, hi);
  g.base_z = base;
  g.top_z = top;
  g.attributes = std::move(attrs);
  s.instances.push_back(std::move(g));
  return s.instances.back();
}

/// Two rooms [0,4]x[0,4] and [4,8]x[0,4] joined by a 0.9 m door in x = 4.
inline Scene two_rooms() {
  Scene s;
  s.bounds = {{0.0, 0.0}, {8.0, 4.0}};
  s.walls = {{{0, 0}, {8, 0}, 2.6}, {{8, 0}, {8, 4}, 2.6}, {{8, 4}, {0, 4}, 2.6}, {{0, 4}, {0, 0}, 2.6},
             {{4, 0}, {4, 1.55}, 2.6}, {{4, 2.45}, {4, 4}, 2.6}};
  s.spawn = {{2.0, 2.0}, 0.0};
  return s;
}

}  // namespace fixtures
