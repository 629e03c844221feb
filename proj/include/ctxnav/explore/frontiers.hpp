#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "ctxnav/core/json.hpp"
#include "ctxnav/goal/types.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/mapping/instances.hpp"
#include "ctxnav/mapping/rooms.hpp"

namespace ctxnav::explore {

using mapping::Cell;
using mapping::GridStack;
using mapping::Occupancy;

struct Frontier {
  Cell cell;
  std::vector<Cell> members;
  double value = 0.0;
  int room = mapping::kNoRoom;

  Vec2 position(const GridStack& g) const { return g.center_of(cell); }
};

inline bool is_frontier_cell(const GridStack& g, Cell c) {
  if (!g.is_free(c)) return false;
  for (const Cell d : mapping::kNeighbors8) {
    const Cell nb = c + d;
    if (g.in_bounds(nb) && g.occ(nb) == Occupancy::unknown) return true;
  }
  return false;
}

/// Free cells bordering unknown space, grouped by 8-connectivity. Clusters
/// below `min_cells` are dropped. The representative is the member nearest
/// the cluster centroid; value and room are read there (zero-confidence
/// cells carry value 0).
inline std::vector<Frontier> extract_frontiers(const GridStack& g, std::size_t min_cells = 5) {
  const std::size_t n = g.size();
  std::vector<std::uint8_t> flag(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (g.occupancy[i] == Occupancy::free && is_frontier_cell(g, g.cell_at(i))) flag[i] = 1;
  }
  std::vector<Frontier> out;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (flag[s] != 1) continue;
    Frontier f;
    flag[s] = 2;
    stack.assign(1, s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const Cell c = g.cell_at(i);
      f.members.push_back(c);
      for (const Cell d : mapping::kNeighbors8) {
        const Cell nb = c + d;
        if (!g.in_bounds(nb)) continue;
        const std::size_t j = g.index(nb);
        if (flag[j] == 1) {
          flag[j] = 2;
          stack.push_back(j);
        }
      }
    }
    if (f.members.size() < min_cells) continue;
    std::sort(f.members.begin(), f.members.end());
    Vec2 mean;
    for (const Cell c : f.members) mean = mean + g.center_of(c);
    mean = mean / static_cast<double>(f.members.size());
    double best = std::numeric_limits<double>::infinity();
    for (const Cell c : f.members) {
      const double d = distance(g.center_of(c), mean);
      if (d < best) {
        best = d;
        f.cell = c;
      }
    }
    const std::size_t ri = g.index(f.cell);
    f.value = g.confidence[ri] > 0.0f ? static_cast<double>(g.value[ri]) : 0.0;
    f.room = g.room[ri];
    out.push_back(std::move(f));
  }
  return out;
}

enum class RankMode { value, nearest };

/// Orders frontiers by value (descending), then geodesic distance from
/// `agent` (unreachable last), then cell order. In nearest mode the value is
/// ignored. Returns nullopt when there is nothing left to explore.
inline std::optional<std::vector<Frontier>> rank_frontiers(std::vector<Frontier> frontiers, const GridStack& g,
                                                           Vec2 agent, RankMode mode = RankMode::value) {
  if (frontiers.empty()) return std::nullopt;
  // Values closer than 1e-6 count as tied.
  auto key = [](double v) { return static_cast<long long>(std::llround(v * 1e6)); };
  bool need_distance = mode == RankMode::nearest;
  if (!need_distance) {
    std::set<long long> seen;
    for (const auto& f : frontiers) need_distance = need_distance || !seen.insert(key(f.value)).second;
  }
  std::vector<double> dist(frontiers.size(), 0.0);
  if (need_distance) {
    const auto start = mapping::snap_to_free(g, agent);
    mapping::GeodesicField field;
    if (start) field = mapping::GeodesicField(g, *start);
    for (std::size_t i = 0; i < frontiers.size(); ++i) {
      dist[i] = start ? field.at(g.index(frontiers[i].cell)) : std::numeric_limits<double>::infinity();
    }
  }
  std::vector<std::size_t> order(frontiers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (mode == RankMode::value) {
      const auto ka = key(frontiers[a].value), kb = key(frontiers[b].value);
      if (ka != kb) return ka > kb;
    }
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return frontiers[a].cell < frontiers[b].cell;
  });
  std::vector<Frontier> out;
  out.reserve(frontiers.size());
  for (std::size_t i : order) out.push_back(std::move(frontiers[i]));
  return out;
}

struct ExplorationState {
  bool override_available = true;
  std::optional<Vec2> waypoint;
  std::vector<Vec2> visited;
};

struct OverrideDecision {
  Frontier frontier;
  bool overridden = false;
};

/// Single-use room-level constraint. When (i) a target-category instance has
/// been detected, (ii) some goal context category has no instance in that
/// instance's room yet and (iii) a frontier lies in that room, the nearest
/// such frontier replaces the global best and the flag is consumed.
/// `rooms_of` gives the room id of each store record.
inline OverrideDecision apply_room_override(ExplorationState& xs, const GridStack& g,
                                            const std::vector<mapping::InstanceRecord>& records,
                                            const std::vector<int>& rooms_of, const goal::GoalSpec& goal,
                                            const std::vector<Frontier>& ranked, Vec2 agent) {
  OverrideDecision out{ranked.front(), false};
  if (!xs.override_available) return out;
  int target_room = mapping::kNoRoom;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].category == goal.target_category && records[i].state != mapping::VerifyState::rejected &&
        rooms_of[i] != mapping::kNoRoom) {
      target_room = rooms_of[i];
      break;
    }
  }
  if (target_room == mapping::kNoRoom) return out;

  bool context_missing = false;
  for (const auto& cat : goal.context_categories) {
    bool seen = false;
    for (std::size_t i = 0; i < records.size() && !seen; ++i) {
      seen = records[i].category == cat && rooms_of[i] == target_room;
    }
    context_missing = context_missing || !seen;
  }
  if (!context_missing) return out;

  std::vector<const Frontier*> in_room;
  for (const auto& f : ranked) {
    if (f.room == target_room) in_room.push_back(&f);
  }
  if (in_room.empty()) return out;

  const auto start = mapping::snap_to_free(g, agent);
  if (!start) return out;
  const mapping::GeodesicField field(g, *start);
  const Frontier* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Frontier* f : in_room) {
    const double d = field.at(g.index(f->cell));
    if (d < best_d || (d == best_d && best && f->cell < best->cell)) {
      best_d = d;
      best = f;
    }
  }
  if (!best) return out;
  xs.override_available = false;
  return {*best, true};
}

inline OrderedJson frontiers_to_json(const GridStack& g, const std::vector<Frontier>& fs) {
  OrderedJson out = OrderedJson::array();
  for (const auto& f : fs) {
    OrderedJson cells = OrderedJson::array();
    for (const Cell c : f.members) cells.push_back({c.x, c.y});
    const Vec2 p = f.position(g);
    out.push_back({{"cell", {f.cell.x, f.cell.y}}, {"position", {p.x, p.y}}, {"cells", std::move(cells)},
                   {"value", f.value}, {"room", f.room}});
  }
  return out;
}

}  // namespace ctxnav::explore
