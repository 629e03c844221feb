#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "ctxnav/core/geometry.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/mapping/instances.hpp"

namespace ctxnav::mapping {

struct RoomConfig {
  /// Wall dilation (cells) closing rasterization pinholes.
  int wall_dilation = 1;
  /// Openings in the wall layer narrower than this are treated as doorways:
  /// room cores keep half this distance from every wall cell, so two rooms
  /// joined by such an opening get separate cores (0 disables).
  double doorway_close = 1.2;
  /// Cores smaller than this (m^2) do not seed a room.
  double min_room_area = 0.5;
};

/// Labels rooms in the wall-only layer. Room cores are 4-connected components
/// of known non-wall space far enough from walls to close doorways; labels
/// then grow (multi-source BFS) over the rest of the known non-wall space,
/// first outside the dilated walls, then into the dilation band. Occupancy is
/// only used to tell known from unknown space, so furniture never splits a
/// room. Returns the number of rooms.
inline int segment_rooms(GridStack& g, const RoomConfig& cfg = {}) {
  const std::size_t n = g.size();
  const double res = g.resolution();

  bool any_wall = false;
  for (std::size_t i = 0; i < n && !any_wall; ++i) any_wall = g.wall[i] != 0;
  std::vector<float> d_wall;
  if (any_wall) d_wall = chamfer_distance(g, [&](std::size_t i) { return g.wall[i] != 0; });
  const double r_dil = cfg.wall_dilation * res * std::sqrt(2.0) + 1e-6;
  const double r_core = std::max(r_dil, 0.5 * cfg.doorway_close);
  auto wall_dist = [&](std::size_t i) { return any_wall ? static_cast<double>(d_wall[i]) : 1e30; };
  auto space = [&](std::size_t i) { return g.occupancy[i] != Occupancy::unknown && !g.wall[i]; };

  std::vector<int> label(n, kNoRoom);
  const auto min_cells = static_cast<std::size_t>(std::ceil(cfg.min_room_area / (res * res)));
  int rooms = 0;
  std::vector<std::size_t> stack;
  std::vector<std::size_t> comp;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != kNoRoom || !space(s) || wall_dist(s) <= r_core) continue;
    comp.clear();
    stack.assign(1, s);
    label[s] = rooms;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      comp.push_back(i);
      const Cell c = g.cell_at(i);
      for (const Cell d : kNeighbors4) {
        const Cell nb = c + d;
        if (!g.in_bounds(nb)) continue;
        const std::size_t j = g.index(nb);
        if (label[j] != kNoRoom || !space(j) || wall_dist(j) <= r_core) continue;
        label[j] = rooms;
        stack.push_back(j);
      }
    }
    if (comp.size() < min_cells) {
      for (std::size_t i : comp) label[i] = -2;  // visited, too small to seed
    } else {
      ++rooms;
    }
  }
  for (auto& l : label) {
    if (l == -2) l = kNoRoom;
  }

  auto grow = [&](auto&& allowed) {
    std::deque<std::size_t> q;
    for (std::size_t i = 0; i < n; ++i) {
      if (label[i] != kNoRoom) q.push_back(i);
    }
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop_front();
      const Cell c = g.cell_at(i);
      for (const Cell d : kNeighbors4) {
        const Cell nb = c + d;
        if (!g.in_bounds(nb)) continue;
        const std::size_t j = g.index(nb);
        if (label[j] != kNoRoom || !space(j) || !allowed(j)) continue;
        label[j] = label[i];
        q.push_back(j);
      }
    }
  };
  grow([&](std::size_t j) { return wall_dist(j) > r_dil; });
  grow([](std::size_t) { return true; });

  for (std::size_t i = 0; i < n; ++i) {
    g.region[i] = label[i];
    g.room[i] = g.occupancy[i] == Occupancy::free ? label[i] : kNoRoom;
  }
  g.rooms_dirty = false;
  return rooms;
}

inline int count_rooms(const GridStack& g) {
  int mx = kNoRoom;
  for (int r : g.region) mx = std::max(mx, r);
  return mx + 1;
}

/// Majority room label over the cells under an instance's points; when none
/// of them is labeled, the label of the nearest labeled cell (BFS over
/// non-wall cells, at most `search` meters).
inline int instance_room(const GridStack& g, const InstanceRecord& r, double search = 1.0) {
  std::map<int, int> votes;
  std::map<std::size_t, int> weight;  // unlabeled point cells and their point counts
  for (const auto& p : r.points) {
    const Cell c = g.cell_of(p.ground());
    if (!g.in_bounds(c)) continue;
    const int l = g.region[g.index(c)];
    if (l != kNoRoom) votes[l] += 1;
    else weight[g.index(c)] += 1;
  }
  auto winner = [&] {
    return std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
             return a.second != b.second ? a.second < b.second : a.first > b.first;
           })->first;
  };
  if (!votes.empty()) return winner();
  // Points on wall or obstacle cells (thin wall-mounted objects): walk out
  // from every point cell and let the first labels reached vote, weighted by
  // how many points started the walk.
  const int max_steps = static_cast<int>(std::ceil(search / g.resolution()));
  std::vector<int> origin(g.size(), -1);
  std::vector<std::size_t> frontier;
  std::vector<int> seed_weight;
  for (const auto& [i, w] : weight) {
    origin[i] = static_cast<int>(seed_weight.size());
    seed_weight.push_back(w);
    frontier.push_back(i);
  }
  for (int step = 0; step <= max_steps && !frontier.empty(); ++step) {
    for (const std::size_t i : frontier) {
      const int l = g.region[i];
      if (l != kNoRoom) votes[l] += seed_weight[static_cast<std::size_t>(origin[i])];
    }
    if (!votes.empty()) return winner();
    std::vector<std::size_t> next;
    for (const std::size_t i : frontier) {
      const Cell c = g.cell_at(i);
      for (const Cell d : kNeighbors4) {
        const Cell nb = c + d;
        if (!g.in_bounds(nb)) continue;
        const std::size_t j = g.index(nb);
        if (origin[j] >= 0 || (g.wall[j] && !weight.count(j))) continue;
        origin[j] = origin[i];
        next.push_back(j);
      }
    }
    frontier = std::move(next);
  }
  return kNoRoom;
}

/// True iff the discretized segment p -> q crosses no wall cell.
inline bool line_of_sight(const GridStack& g, Vec2 p, Vec2 q) {
  bool clear = true;
  traverse_cells(g, p, q, [&](Cell c) {
    if (g.is_wall(c)) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

/// Nearest free cell to p within `max_snap` meters reachable from p's cell
/// without crossing a wall cell.
inline std::optional<Cell> snap_to_free(const GridStack& g, Vec2 p, double max_snap = 1.0) {
  const Cell start = g.cell_of(p);
  if (!g.in_bounds(start)) return std::nullopt;
  if (g.is_free(start)) return start;
  const int max_steps = static_cast<int>(std::ceil(max_snap / g.resolution())) + 1;
  std::vector<int> dist(g.size(), -1);
  std::deque<Cell> q{start};
  dist[g.index(start)] = 0;
  std::optional<Cell> best;
  double best_d = max_snap;
  int found_at = -1;
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop_front();
    const int dc = dist[g.index(c)];
    if (found_at >= 0 && dc > found_at + found_at / 2 + 2) break;
    if (g.is_free(c)) {
      const double d = distance(g.center_of(c), p);
      if (d <= best_d && (!best || d < best_d || *best > c)) {
        best = c;
        best_d = d;
        if (found_at < 0) found_at = dc;
      }
      continue;
    }
    if (dc >= max_steps) continue;
    for (const Cell dd : kNeighbors4) {
      const Cell nb = c + dd;
      if (!g.in_bounds(nb) || g.wall[g.index(nb)] || dist[g.index(nb)] >= 0) continue;
      dist[g.index(nb)] = dc + 1;
      q.push_back(nb);
    }
  }
  return best;
}

/// Single-source shortest path lengths (meters) over free cells, 8-connected,
/// diagonal moves only when both side cells are free. Unreached cells are +inf.
class GeodesicField {
 public:
  GeodesicField() = default;

  GeodesicField(const GridStack& g, Cell source, double max_distance = std::numeric_limits<double>::infinity())
      : source_(source) {
    dist_.assign(g.size(), std::numeric_limits<float>::infinity());
    if (!g.is_free(source)) return;
    using Item = std::pair<float, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    const float a = static_cast<float>(g.resolution());
    const float b = a * static_cast<float>(std::sqrt(2.0));
    dist_[g.index(source)] = 0.0f;
    pq.push({0.0f, g.index(source)});
    while (!pq.empty()) {
      const auto [d, i] = pq.top();
      pq.pop();
      if (d > dist_[i]) continue;
      if (d > max_distance) break;
      const Cell c = g.cell_at(i);
      for (const Cell dd : kNeighbors8) {
        const Cell nb = c + dd;
        if (!g.is_free(nb)) continue;
        const bool diag = dd.x != 0 && dd.y != 0;
        if (diag && !(g.is_free({c.x + dd.x, c.y}) && g.is_free({c.x, c.y + dd.y}))) continue;
        const float nd = d + (diag ? b : a);
        const std::size_t j = g.index(nb);
        if (nd < dist_[j]) {
          dist_[j] = nd;
          pq.push({nd, j});
        }
      }
    }
  }

  Cell source() const { return source_; }
  double at(std::size_t i) const { return dist_[i]; }
  const std::vector<float>& data() const { return dist_; }

 private:
  Cell source_;
  std::vector<float> dist_;
};

/// Geodesic distance between two points through free space: snap to the
/// nearest free cells (no wall crossing), path between cell centers, plus the
/// two snap offsets. nullopt when either end cannot be snapped or no path
/// exists.
inline std::optional<double> geodesic_distance(const GridStack& g, Vec2 p, Vec2 q, double max_snap = 1.0) {
  const auto cp = snap_to_free(g, p, max_snap);
  const auto cq = snap_to_free(g, q, max_snap);
  if (!cp || !cq) return std::nullopt;
  const double snaps = distance(p, g.center_of(*cp)) + distance(q, g.center_of(*cq));
  if (*cp == *cq) return distance(p, q);
  const GeodesicField f(g, *cp);
  const double d = f.at(g.index(*cq));
  if (!std::isfinite(d)) return std::nullopt;
  return d + snaps;
}

/// Same as geodesic_distance but reusing a field rooted at p's snapped cell.
inline std::optional<double> geodesic_from_field(const GridStack& g, const GeodesicField& f, Vec2 p, Vec2 q,
                                                 double max_snap = 1.0) {
  const auto cq = snap_to_free(g, q, max_snap);
  if (!cq) return std::nullopt;
  if (*cq == f.source()) return distance(p, q);
  const double d = f.at(g.index(*cq));
  if (!std::isfinite(d)) return std::nullopt;
  return d + distance(p, g.center_of(f.source())) + distance(q, g.center_of(*cq));
}

}  // namespace ctxnav::mapping
