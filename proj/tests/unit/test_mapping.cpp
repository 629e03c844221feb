#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <queue>
#include <set>

#include "fixtures.hpp"

using namespace ctxnav;
using namespace ctxnav::mapping;

namespace {

constexpr double kRes = 0.05;

// Point at the center of voxel (i, j, k) of the 0.05 m lattice.
Vec3 vox(int i, int j, int k) { return {(i + 0.5) * kRes, (j + 0.5) * kRes, (k + 0.5) * kRes}; }

GridStack free_grid(Vec2 lo, Vec2 hi) {
  auto g = GridStack::covering(lo, hi, kRes);
  std::fill(g.occupancy.begin(), g.occupancy.end(), Occupancy::free);
  return g;
}

// Plain 4-connected component count over known, non-wall cells.
int flood_components(const GridStack& g) {
  std::vector<char> seen(g.size(), 0);
  int n = 0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (seen[s] || g.wall[s] || g.occupancy[s] == Occupancy::unknown) continue;
    ++n;
    std::deque<std::size_t> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      const Cell c = g.cell_at(q.front());
      q.pop_front();
      for (Cell d : kNeighbors4) {
        const Cell nb = c + d;
        if (!g.in_bounds(nb)) continue;
        const std::size_t j = g.index(nb);
        if (seen[j] || g.wall[j] || g.occupancy[j] == Occupancy::unknown) continue;
        seen[j] = 1;
        q.push_back(j);
      }
    }
  }
  return n;
}

std::vector<Vec3> plane_points(Vec3 n, double d, int count, double sigma, Rng& rng, double zlo = 0.8,
                               double zhi = 2.6) {
  // Two in-plane axes: horizontal u and vertical-ish v.
  Vec3 u{-n.y, n.x, 0.0};
  const double un = std::sqrt(u.x * u.x + u.y * u.y);
  u = {u.x / un, u.y / un, 0.0};
  std::vector<Vec3> out;
  const Vec3 p0{-d * n.x, -d * n.y, -d * n.z};
  for (int i = 0; i < count; ++i) {
    const double a = rng.uniform(-1.5, 1.5), z = rng.uniform(zlo, zhi), e = rng.normal(0.0, sigma);
    out.push_back({p0.x + a * u.x + e * n.x, p0.y + a * u.y + e * n.y, z});
  }
  return out;
}

}  // namespace

TEST(IntegrateDepth, SingleRayMarch) {
  world::DepthImage img;
  img.width = img.height = 1;
  img.hfov = 0.01;
  img.camera_height = 0.88;
  img.max_range = 5.0;
  img.pose = {{0.001, 0.025}, 0.0};
  img.range = {2.0f};
  img.kind = {world::HitKind::wall};
  img.index = {0};
  auto g = GridStack::covering({-0.5, -0.5}, {3.0, 0.5}, kRes);
  integrate_depth(g, img);
  const int row = g.cell_of({0.0, 0.025}).y;
  int free = 0, occ = 0;
  for (int x = 0; x < g.width(); ++x) {
    const auto o = g.occ({x, row});
    free += o == Occupancy::free;
    occ += o == Occupancy::occupied;
  }
  EXPECT_EQ(free, static_cast<int>(std::floor(2.0 / kRes)));
  EXPECT_EQ(occ, 1);
  EXPECT_EQ(g.occ(g.cell_of({2.01, 0.025})), Occupancy::occupied);
  EXPECT_EQ(g.occ(g.cell_of({1.99, 0.025})), Occupancy::free);
}

TEST(IntegrateDepth, NoHitRayFreesToMaxRange) {
  world::DepthImage img;
  img.width = img.height = 1;
  img.hfov = 0.01;
  img.max_range = 5.0;
  img.pose = {{0.001, 0.025}, 0.0};
  img.range = {world::DepthImage::kNoHit};
  img.kind = {world::HitKind::none};
  img.index = {-1};
  auto g = GridStack::covering({-0.5, -0.5}, {6.0, 0.5}, kRes);
  integrate_depth(g, img);
  int free = 0, occ = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    free += g.occupancy[i] == Occupancy::free;
    occ += g.occupancy[i] == Occupancy::occupied;
  }
  EXPECT_EQ(occ, 0);
  // x in [0.001, 5.001] touches 101 cells of 0.05 m.
  EXPECT_EQ(free, 101);
}

TEST(IntegrateDepth, IdempotentAndMonotone) {
  world::Scene s = fixtures::box_room(6, 4);
  fixtures::add_box(s, "t", "table", {3, 1}, {3.8, 1.8}, 0, 0.75);
  world::AgentState st = world::AgentState::at(s.spawn);
  GridStack g;
  g = GridStack::covering({0, 0}, {1, 1});
  const auto d0 = world::render_depth(s, st);
  integrate_depth(g, d0);
  const GridStack once = g;
  integrate_depth(g, d0);
  EXPECT_EQ(g.occupancy, once.occupancy);
  st = world::step_agent(s, st, world::Action::turn_left);
  st = world::step_agent(s, st, world::Action::turn_left);
  integrate_depth(g, world::render_depth(s, st));
  // Known cells never return to unknown (compare in world coordinates).
  for (std::size_t i = 0; i < once.size(); ++i) {
    if (once.occupancy[i] == Occupancy::unknown) continue;
    EXPECT_NE(g.occ(g.cell_of(once.center_of(once.cell_at(i)))), Occupancy::unknown);
  }
}

TEST(VoxelOverlap, IdentityDisjointAndHandCase) {
  const std::vector<Vec3> a = {vox(0, 0, 0), vox(1, 0, 0), vox(2, 0, 0), vox(3, 0, 0)};
  EXPECT_DOUBLE_EQ(voxel_overlap(a, a), 1.0);
  const std::vector<Vec3> b = {vox(2, 0, 0), vox(3, 0, 0), vox(4, 0, 0)};
  EXPECT_DOUBLE_EQ(voxel_overlap(a, b), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(voxel_overlap(b, a), 2.0 / 3.0);
  const std::vector<Vec3> far = {vox(40, 0, 0), vox(41, 3, 0)};
  EXPECT_DOUBLE_EQ(voxel_overlap(a, far), 0.0);
  EXPECT_THROW(voxel_overlap(a, std::vector<Vec3>{}), DomainError);
}

TEST(VoxelOverlap, SymmetricUnderFullSampling) {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    std::vector<Vec3> a, b;
    const int na = static_cast<int>(rng.uniform_int(1, 300)), nb = static_cast<int>(rng.uniform_int(1, 300));
    for (int i = 0; i < na; ++i) a.push_back({rng.uniform(0, 0.6), rng.uniform(0, 0.6), rng.uniform(0, 0.6)});
    for (int i = 0; i < nb; ++i) b.push_back({rng.uniform(0.3, 0.9), rng.uniform(0, 0.6), rng.uniform(0, 0.6)});
    const double s = voxel_overlap(a, b);
    EXPECT_DOUBLE_EQ(s, voxel_overlap(b, a));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Associate, ProximityMerge) {
  InstanceStore store;
  const auto r0 = store.associate({vox(0, 0, 0), vox(1, 0, 0)}, "chair");
  // Same shape shifted 0.20 m: no shared voxel, centers 0.20 m apart.
  const auto r1 = store.associate({vox(4, 0, 0), vox(5, 0, 0)}, "chair");
  EXPECT_EQ(r1.id, r0.id);
  EXPECT_EQ(r1.pass, AssociationPass::proximity);
  EXPECT_EQ(store.records().size(), 1u);
  // Other category never merges.
  EXPECT_EQ(store.associate({vox(4, 0, 0)}, "table").pass, AssociationPass::created);
}

TEST(Associate, OverlapMergeAndNewInstance) {
  // Ten voxels each; six shared at i = 0; unique voxels at i = -12 and
  // i = 13 put the centroids 0.50 m apart.
  std::vector<Vec3> a, b;
  for (int j = 0; j < 6; ++j) a.push_back(vox(0, j, 0)), b.push_back(vox(0, j, 0));
  for (int j = 0; j < 4; ++j) a.push_back(vox(-12, j, 0)), b.push_back(vox(13, j, 0));
  ASSERT_NEAR(distance(ground_centroid(a), ground_centroid(b)), 0.50, 1e-9);
  ASSERT_NEAR(voxel_overlap(a, b), 0.60, 1e-12);
  InstanceStore s1;
  const auto x = s1.associate(a, "picture");
  const auto y = s1.associate(b, "picture");
  EXPECT_EQ(y.id, x.id);
  EXPECT_EQ(y.pass, AssociationPass::overlap);

  // Three shared voxels; unique sums chosen so the centroids are 0.50 m apart.
  std::vector<Vec3> c, d;
  for (int j = 0; j < 3; ++j) c.push_back(vox(0, j, 0)), d.push_back(vox(0, j, 0));
  for (int i = -7; i <= -1; ++i) c.push_back(vox(i, 5, 0));
  for (int i : {7, 8, 9, 10, 11, 12, 15}) d.push_back(vox(i, 5, 0));
  ASSERT_NEAR(distance(ground_centroid(c), ground_centroid(d)), 0.50, 1e-9);
  ASSERT_NEAR(voxel_overlap(c, d), 0.30, 1e-12);
  InstanceStore s2;
  const auto u = s2.associate(c, "picture");
  const auto v = s2.associate(d, "picture");
  EXPECT_NE(v.id, u.id);
  EXPECT_EQ(v.pass, AssociationPass::created);
}

TEST(Associate, MergeRecomputesCenterAndHeight) {
  InstanceStore store;
  store.associate({{0, 0, 0}, {0.1, 0, 1.0}}, "lamp");
  store.associate({{0.12, 0.1, 2.0}}, "lamp");
  const auto& r = store.records().front();
  EXPECT_EQ(r.points.size(), 3u);
  EXPECT_NEAR(r.center.x, (0 + 0.1 + 0.12) / 3, 1e-12);
  EXPECT_NEAR(r.center.y, 0.1 / 3, 1e-12);
  EXPECT_NEAR(r.z_hat, 1.0, 1e-12);
  EXPECT_EQ(r.observations, 2);
}

TEST(Associate, PermutationInvariantOnSeparatedClusters) {
  Rng rng(5);
  for (int scene = 0; scene < 20; ++scene) {
    std::vector<std::vector<Vec3>> obs;
    std::vector<int> truth;
    for (int k = 0; k < 3; ++k) {
      const Vec2 c{1.5 * k + rng.uniform(0, 0.2), rng.uniform(0, 0.2)};
      for (int o = 0; o < 4; ++o) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 30; ++i) {
          pts.push_back({c.x + rng.uniform(-0.15, 0.15), c.y + rng.uniform(-0.15, 0.15), rng.uniform(0, 1)});
        }
        obs.push_back(pts);
        truth.push_back(k);
      }
    }
    std::vector<std::size_t> order(obs.size());
    std::iota(order.begin(), order.end(), 0);
    std::set<std::set<std::size_t>> reference;
    for (int perm = 0; perm < 6; ++perm) {
      std::shuffle(order.begin(), order.end(), rng.engine());
      InstanceStore store;
      std::map<int, std::set<std::size_t>> groups;
      for (std::size_t i : order) groups[store.associate(obs[i], "vase").id].insert(i);
      std::set<std::set<std::size_t>> part;
      for (auto& [id, g] : groups) part.insert(g);
      if (perm == 0) reference = part;
      EXPECT_EQ(part, reference);
    }
    EXPECT_EQ(reference.size(), 3u);
  }
}

TEST(InstanceHeight, Centroid) {
  InstanceRecord r;
  Rng rng(2);
  for (int i = 0; i < 4000; ++i) r.points.push_back({0, 0, rng.uniform(0, 1)});
  EXPECT_NEAR(instance_height(r), 0.5, 0.02);
  InstanceRecord one;
  one.points = {{1, 1, 2.1}};
  EXPECT_DOUBLE_EQ(instance_height(one), 2.1);
  InstanceRecord pic, cab;
  for (int i = 0; i <= 10; ++i) pic.points.push_back({0, 0, 1.4 + 0.06 * i}), cab.points.push_back({0, 0, 0.1 * i});
  EXPECT_GE(instance_height(pic) - instance_height(cab), 0.15);
  EXPECT_THROW(instance_height(InstanceRecord{}), DomainError);
}

TEST(Ransac, SingleVerticalPlane) {
  Rng rng(1), r2(7);
  const auto pts = plane_points({1, 0, 0}, -2.0, 1000, 0.005, rng);
  const auto planes = extract_wall_planes(pts, {}, r2);
  ASSERT_EQ(planes.size(), 1u);
  EXPECT_GT(std::abs(planes[0].normal.x), 0.99);
  EXPECT_NEAR(std::abs(planes[0].offset), 2.0, 0.02);
}

TEST(Ransac, HorizontalFloorRejected) {
  Rng rng(3), r2(4);
  std::vector<Vec3> floor;
  for (int i = 0; i < 1500; ++i) floor.push_back({rng.uniform(0, 3), rng.uniform(0, 3), rng.normal(0.0, 0.005)});
  EXPECT_TRUE(extract_wall_planes(floor, {}, r2).empty());
  EXPECT_TRUE(extract_wall_planes({{0, 0, 1}, {1, 0, 1}}, {}, r2).empty());
}

TEST(Ransac, PerpendicularCorner) {
  Rng rng(11), r2(12);
  auto pts = plane_points({1, 0, 0}, -2.0, 800, 0.005, rng);
  const auto more = plane_points({0, 1, 0}, -1.0, 800, 0.005, rng);
  pts.insert(pts.end(), more.begin(), more.end());
  const auto planes = extract_wall_planes(pts, {}, r2);
  ASSERT_EQ(planes.size(), 2u);
  std::vector<Vec2> truth = {{1, 0}, {0, 1}};
  for (const auto& t : truth) {
    double best = 180.0;
    for (const auto& pl : planes) {
      const double c = std::abs(pl.normal.x * t.x + pl.normal.y * t.y);
      best = std::min(best, rad_to_deg(std::acos(std::min(1.0, c))));
    }
    EXPECT_LE(best, 2.0);
  }
  for (const auto& pl : planes) {
    const double nn = std::sqrt(pl.normal.x * pl.normal.x + pl.normal.y * pl.normal.y + pl.normal.z * pl.normal.z);
    EXPECT_NEAR(nn, 1.0, 1e-9);
    EXPECT_LE(std::abs(pl.normal.z), 0.3);
    EXPECT_GE(pl.inliers.size(), 400u);
    for (const auto& p : pl.inliers) EXPECT_LE(std::abs(pl.signed_distance(p)), 0.03);
  }
}

TEST(Ransac, ShortFurnitureFaceRejected) {
  Rng rng(21), r2(22);
  const auto pts = plane_points({1, 0, 0}, -2.0, 1000, 0.003, rng, 0.8, 1.2);
  EXPECT_TRUE(extract_wall_planes(pts, {}, r2).empty());
}

TEST(RasterizeWalls, ProjectionCountAndIdempotence) {
  PlaneModel pl;
  pl.normal = {1, 0, 0};
  pl.offset = -2.0;
  for (double y = 0.01; y < 3.0; y += 0.01) pl.inliers.push_back({2.0 + 0.001, y, 1.5});
  auto g = GridStack::covering({0, 0}, {4, 4}, kRes);
  rasterize_walls({}, g);
  EXPECT_EQ(std::count(g.wall.begin(), g.wall.end(), 1), 0);
  rasterize_walls({pl}, g);
  const auto n = std::count(g.wall.begin(), g.wall.end(), 1);
  EXPECT_EQ(n, 60);
  const auto before = g.wall;
  rasterize_walls({pl}, g);
  EXPECT_EQ(g.wall, before);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.wall[i]) EXPECT_EQ(g.occupancy[i], Occupancy::occupied);
  }
}

TEST(SegmentRooms, EmptyWallLayerIsOneRoom) {
  auto g = free_grid({0, 0}, {5, 4});
  EXPECT_EQ(segment_rooms(g), 1);
}

TEST(SegmentRooms, DoorwayOpenOrWalled) {
  const world::Scene s = fixtures::two_rooms();
  auto g = free_grid({-0.1, -0.1}, {8.1, 4.1});
  for (const auto& w : s.walls) rasterize_segment(g, w.a, w.b);
  RoomConfig plain;
  plain.doorway_close = 0.0;
  plain.wall_dilation = 0;
  // Plain connected components (the outside ring is one more): the open
  // doorway joins the rooms.
  GridStack a = g;
  EXPECT_EQ(segment_rooms(a, plain), flood_components(a));
  EXPECT_EQ(a.room_of(a.cell_of({2, 2})), a.room_of(a.cell_of({6, 2})));
  // Doorway closing separates them.
  GridStack b = g;
  EXPECT_EQ(segment_rooms(b), 2);
  EXPECT_NE(b.room_of(b.cell_of({2, 2})), b.room_of(b.cell_of({6, 2})));
  // Walled doorway: two components either way.
  GridStack c = g;
  rasterize_segment(c, {4, 1.5}, {4, 2.5});
  EXPECT_EQ(segment_rooms(c, plain), flood_components(c));
  EXPECT_NE(c.room_of(c.cell_of({2, 2})), c.room_of(c.cell_of({6, 2})));
}

TEST(SegmentRooms, OpenDoorwayIsOneRoomWithoutClosing) {
  auto g = free_grid({0.05, 0.05}, {7.95, 3.95});
  rasterize_segment(g, {4, 0}, {4, 1.55});
  rasterize_segment(g, {4, 2.45}, {4, 4});
  RoomConfig plain;
  plain.doorway_close = 0.0;
  EXPECT_EQ(segment_rooms(g, plain), 1);
  EXPECT_EQ(flood_components(g), 1);
}

TEST(SegmentRooms, FurnitureNeverSplits) {
  auto g = free_grid({0, 0}, {6, 4});
  rasterize_segment(g, {0, 0}, {6, 0});
  rasterize_segment(g, {0, 4}, {6, 4});
  GridStack base = g;
  const int rooms = segment_rooms(base);
  // A sofa bisecting the room in the occupancy layer only.
  for (double y = 0.0; y <= 4.0; y += 0.025) g.mark_occupied(g.cell_of({3.0, y}));
  EXPECT_EQ(segment_rooms(g), rooms);
  EXPECT_EQ(rooms, 1);
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    GridStack h = base;
    for (int k = 0; k < 400; ++k) {
      const Cell c{static_cast<int>(rng.uniform_int(0, h.width() - 1)), static_cast<int>(rng.uniform_int(0, h.height() - 1))};
      if (!h.is_wall(c)) h.mark_occupied(c);
    }
    EXPECT_EQ(segment_rooms(h), rooms);
  }
}

TEST(LineOfSight, Cases) {
  auto g = free_grid({0, 0}, {6, 4});
  EXPECT_TRUE(line_of_sight(g, {1, 1}, {1, 1}));
  rasterize_segment(g, {3, 0.5}, {3, 3.5});
  EXPECT_FALSE(line_of_sight(g, {1, 2}, {5, 2}));
  EXPECT_TRUE(line_of_sight(g, {1, 3.8}, {5, 3.8}));
  for (double y = 0; y < 4; y += 0.05) g.mark_occupied(g.cell_of({1.5, y}));
  EXPECT_TRUE(line_of_sight(g, {0.5, 2}, {2.5, 2}));
}

TEST(Geodesic, CorridorSameCellAndWalledOff) {
  auto g = free_grid({0, 0}, {5, 1});
  const auto d = geodesic_distance(g, {0.525, 0.525}, {2.775, 0.525});
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 2.25, kRes);
  EXPECT_EQ(*geodesic_distance(g, {1.0, 0.5}, {1.0, 0.5}), 0.0);

  auto h = free_grid({0, 0}, {8, 4});
  for (double x = 5; x <= 7; x += 0.01) h.wall[h.index(h.cell_of({x, 1}))] = 1, h.mark_occupied(h.cell_of({x, 1}));
  for (double x = 5; x <= 7; x += 0.01) h.wall[h.index(h.cell_of({x, 3}))] = 1, h.mark_occupied(h.cell_of({x, 3}));
  for (double y = 1; y <= 3; y += 0.01) h.wall[h.index(h.cell_of({5, y}))] = 1, h.mark_occupied(h.cell_of({5, y}));
  for (double y = 1; y <= 3; y += 0.01) h.wall[h.index(h.cell_of({7, y}))] = 1, h.mark_occupied(h.cell_of({7, y}));
  EXPECT_FALSE(geodesic_distance(h, {1, 2}, {6, 2}));
}

// Independent Dijkstra between cell centers on an 8-connected grid with
// corner-cutting forbidden.
TEST(Geodesic, MatchesReferenceDijkstraAndBounds) {
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    auto g = free_grid({0, 0}, {4, 3});
    for (int k = 0; k < 12; ++k) {
      const Vec2 c{rng.uniform(0.5, 3.5), rng.uniform(0.5, 2.5)};
      for (double dx = -0.2; dx <= 0.2; dx += 0.05) g.mark_occupied(g.cell_of({c.x + dx, c.y}));
    }
    const Cell s = g.cell_of({0.1, 0.1});
    if (!g.is_free(s)) continue;
    std::vector<double> dist(g.size(), 1e18);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[g.index(s)] = 0;
    pq.push({0, g.index(s)});
    while (!pq.empty()) {
      auto [d, i] = pq.top();
      pq.pop();
      if (d > dist[i]) continue;
      const Cell c = g.cell_at(i);
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          if (!dx && !dy) continue;
          const Cell nb{c.x + dx, c.y + dy};
          if (!g.is_free(nb)) continue;
          if (dx && dy && (!g.is_free({c.x + dx, c.y}) || !g.is_free({c.x, c.y + dy}))) continue;
          const double nd = d + kRes * std::sqrt(static_cast<double>(dx * dx + dy * dy));
          if (nd < dist[g.index(nb)]) dist[g.index(nb)] = nd, pq.push({nd, g.index(nb)});
        }
      }
    }
    const Vec2 p = g.center_of(s);
    for (int k = 0; k < 30; ++k) {
      const Cell qc{static_cast<int>(rng.uniform_int(0, g.width() - 1)), static_cast<int>(rng.uniform_int(0, g.height() - 1))};
      if (!g.is_free(qc)) continue;
      const Vec2 q = g.center_of(qc);
      const auto d = geodesic_distance(g, p, q);
      if (dist[g.index(qc)] > 1e17) {
        EXPECT_FALSE(d);
        continue;
      }
      ASSERT_TRUE(d);
      EXPECT_NEAR(*d, dist[g.index(qc)], 1e-4);
      EXPECT_GE(*d + 1e-4, distance(p, q));  // float field
    }
  }
}

TEST(InstanceRoom, MajorityAndFallback) {
  const world::Scene s = fixtures::two_rooms();
  auto g = free_grid({-0.1, -0.1}, {8.1, 4.1});
  for (const auto& w : s.walls) rasterize_segment(g, w.a, w.b);
  segment_rooms(g);
  InstanceRecord r;
  r.points = {{1, 1, 0.5}, {1.1, 1, 0.5}, {1.2, 1, 0.5}};
  EXPECT_EQ(instance_room(g, r), g.room_of(g.cell_of({1, 1})));
  // A picture hanging on the partition, seen from the right room.
  InstanceRecord pic;
  for (double y = 3.0; y <= 3.5; y += 0.05) pic.points.push_back({4.04, y, 1.5});
  EXPECT_EQ(instance_room(g, pic), g.room_of(g.cell_of({6, 2})));
}
