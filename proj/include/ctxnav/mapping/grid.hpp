#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/geometry.hpp"

namespace ctxnav::mapping {

enum class Occupancy : std::uint8_t { unknown = 0, free = 1, occupied = 2 };

struct Cell {
  int x = 0;
  int y = 0;

  auto operator<=>(const Cell&) const = default;
};

inline constexpr int kNoRoom = -1;

/// Co-registered top-down layers sharing origin, resolution and extent.
/// Cell (x, y) covers [origin + (x, y) * res, origin + (x + 1, y + 1) * res).
class GridStack {
 public:
  GridStack() = default;

  GridStack(Vec2 origin, double resolution, int width, int height)
      : origin_(origin), res_(resolution), width_(width), height_(height) {
    if (!(resolution > 0.0)) throw DomainError("grid resolution must be positive");
    if (width < 0 || height < 0) throw DomainError("grid extent must be non-negative");
    allocate();
  }

  /// Grid covering the axis-aligned box [lo, hi].
  static GridStack covering(Vec2 lo, Vec2 hi, double resolution = 0.05) {
    const int w = static_cast<int>(std::ceil((hi.x - lo.x) / resolution));
    const int h = static_cast<int>(std::ceil((hi.y - lo.y) / resolution));
    return GridStack(lo, resolution, std::max(w, 1), std::max(h, 1));
  }

  Vec2 origin() const { return origin_; }
  double resolution() const { return res_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return static_cast<std::size_t>(width_) * height_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool in_bounds(Vec2 p) const { return in_bounds(cell_of(p)); }

  Cell cell_of(Vec2 p) const {
    return {static_cast<int>(std::floor((p.x - origin_.x) / res_)), static_cast<int>(std::floor((p.y - origin_.y) / res_))};
  }
  Vec2 center_of(Cell c) const { return {origin_.x + (c.x + 0.5) * res_, origin_.y + (c.y + 0.5) * res_}; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t i) const { return {static_cast<int>(i % width_), static_cast<int>(i / width_)}; }

  Vec2 min_corner() const { return origin_; }
  Vec2 max_corner() const { return {origin_.x + width_ * res_, origin_.y + height_ * res_}; }

  Occupancy occ(Cell c) const { return occupancy[index(c)]; }
  bool is_free(Cell c) const { return in_bounds(c) && occupancy[index(c)] == Occupancy::free; }
  bool is_wall(Cell c) const { return in_bounds(c) && wall[index(c)] != 0; }
  int room_of(Cell c) const { return in_bounds(c) ? room[index(c)] : kNoRoom; }

  /// Free marking never overrides an occupied cell.
  void mark_free(Cell c) {
    auto& o = occupancy[index(c)];
    if (o == Occupancy::unknown) o = Occupancy::free;
  }
  void mark_occupied(Cell c) { occupancy[index(c)] = Occupancy::occupied; }

  /// Grows the grid (by whole cells, with `margin` meters of slack) so that
  /// the box [lo, hi] is covered. Existing layers keep their world placement.
  /// Returns true if the grid changed.
  bool ensure_contains(Vec2 lo, Vec2 hi, double margin = 2.0) {
    const Cell a = cell_of(lo);
    const Cell b = cell_of(hi);
    if (a.x >= 0 && a.y >= 0 && b.x < width_ && b.y < height_) return false;
    const int pad = static_cast<int>(std::ceil(margin / res_));
    const int grow_left = a.x < 0 ? -a.x + pad : 0;
    const int grow_down = a.y < 0 ? -a.y + pad : 0;
    const int grow_right = b.x >= width_ ? b.x - width_ + 1 + pad : 0;
    const int grow_up = b.y >= height_ ? b.y - height_ + 1 + pad : 0;

    GridStack bigger({origin_.x - grow_left * res_, origin_.y - grow_down * res_}, res_,
                     width_ + grow_left + grow_right, height_ + grow_down + grow_up);
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        const std::size_t src = index({x, y});
        const std::size_t dst = bigger.index({x + grow_left, y + grow_down});
        bigger.occupancy[dst] = occupancy[src];
        bigger.wall[dst] = wall[src];
        bigger.room[dst] = room[src];
        bigger.region[dst] = region[src];
        bigger.value[dst] = value[src];
        bigger.confidence[dst] = confidence[src];
      }
    }
    bigger.rooms_dirty = true;
    *this = std::move(bigger);
    return true;
  }

  std::vector<Occupancy> occupancy;
  std::vector<std::uint8_t> wall;
  /// Room id on free cells only.
  std::vector<int> room;
  /// Room id on every known non-wall cell (free or furniture); used to place
  /// instances, whose cells are occupied.
  std::vector<int> region;
  std::vector<float> value;
  std::vector<float> confidence;
  /// Set when the wall or occupancy layers changed since the last room segmentation.
  bool rooms_dirty = true;

 private:
  Vec2 origin_;
  double res_ = 0.05;
  int width_ = 0;
  int height_ = 0;

  void allocate() {
    const std::size_t n = size();
    occupancy.assign(n, Occupancy::unknown);
    wall.assign(n, 0);
    room.assign(n, kNoRoom);
    region.assign(n, kNoRoom);
    value.assign(n, 0.0f);
    confidence.assign(n, 0.0f);
  }
};

inline constexpr std::array<Cell, 4> kNeighbors4 = {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}};
inline constexpr std::array<Cell, 8> kNeighbors8 = {Cell{1, 0},  Cell{-1, 0}, Cell{0, 1},  Cell{0, -1},
                                                    Cell{1, 1},  Cell{1, -1}, Cell{-1, 1}, Cell{-1, -1}};

inline Cell operator+(Cell a, Cell b) { return {a.x + b.x, a.y + b.y}; }

/// Cells traversed by the segment a->b (Amanatides-Woo), in order, including
/// both end cells. Cells outside the grid are included; callers filter.
template <class Visit>
void traverse_cells(const GridStack& g, Vec2 a, Vec2 b, Visit&& visit) {
  const double res = g.resolution();
  Cell c = g.cell_of(a);
  const Cell end = g.cell_of(b);
  const Vec2 d = b - a;
  const int sx = d.x > 0 ? 1 : (d.x < 0 ? -1 : 0);
  const int sy = d.y > 0 ? 1 : (d.y < 0 ? -1 : 0);
  const Vec2 o = g.origin();
  const double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_max_y = inf, t_dx = inf, t_dy = inf;
  if (sx != 0) {
    const double next = o.x + (c.x + (sx > 0 ? 1 : 0)) * res;
    t_max_x = (next - a.x) / d.x;
    t_dx = res / std::abs(d.x);
  }
  if (sy != 0) {
    const double next = o.y + (c.y + (sy > 0 ? 1 : 0)) * res;
    t_max_y = (next - a.y) / d.y;
    t_dy = res / std::abs(d.y);
  }
  const int max_steps = std::abs(end.x - c.x) + std::abs(end.y - c.y) + 2;
  for (int i = 0; i <= max_steps; ++i) {
    if (!visit(c)) return;
    if (c == end) return;
    if (t_max_x < t_max_y) {
      if (t_max_x > 1.0) return;
      c.x += sx;
      t_max_x += t_dx;
    } else {
      if (t_max_y > 1.0) return;
      c.y += sy;
      t_max_y += t_dy;
    }
  }
}

/// Two-pass 8-neighbour chamfer distance (meters) to the nearest seed cell.
template <class IsSeed>
std::vector<float> chamfer_distance(const GridStack& g, IsSeed&& is_seed) {
  const float inf = std::numeric_limits<float>::infinity();
  const int w = g.width();
  const int h = g.height();
  std::vector<float> d(g.size(), inf);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (is_seed(i)) d[i] = 0.0f;
  }
  const float a = static_cast<float>(g.resolution());
  const float b = a * static_cast<float>(std::sqrt(2.0));
  auto relax = [&](int x, int y, int nx, int ny, float cost) {
    if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
    float& cur = d[static_cast<std::size_t>(y) * w + x];
    const float cand = d[static_cast<std::size_t>(ny) * w + nx] + cost;
    if (cand < cur) cur = cand;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      relax(x, y, x - 1, y, a);
      relax(x, y, x, y - 1, a);
      relax(x, y, x - 1, y - 1, b);
      relax(x, y, x + 1, y - 1, b);
    }
  }
  for (int y = h - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      relax(x, y, x + 1, y, a);
      relax(x, y, x, y + 1, a);
      relax(x, y, x + 1, y + 1, b);
      relax(x, y, x - 1, y + 1, b);
    }
  }
  return d;
}

}  // namespace ctxnav::mapping
