#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace ctxnav;
using namespace ctxnav::verify;
using goal::Relation;
using mapping::InstanceRecord;

namespace {

goal::GoalSpec color_goal() {
  goal::GoalSpec g;
  g.target_category = "picture";
  g.intrinsic["color"] = "red";
  g.questions.push_back({"color", "Is the picture red?", "red"});
  return g;
}

InstanceRecord record(int id, const std::string& cat, Vec2 c, double z) {
  InstanceRecord r;
  r.id = id;
  r.category = cat;
  r.center = c;
  r.z_hat = z;
  r.points = {{c.x, c.y, z}};
  r.bbox_min = r.bbox_max = c;
  return r;
}

// Eq. 5 written with projections onto the view direction and its left
// normal, without the frame helpers.
bool direct_predicate(Relation rho, Vec2 v, Vec2 cr, Vec2 ct, double zr, double zt) {
  const double eps_m = 0.15, eps_th = 25.0 * kPi / 180.0, d_near = 2.0, eps_z = 0.15;
  const double dx = cr.x - v.x, dy = cr.y - v.y, len = std::hypot(dx, dy);
  auto xl = [&](Vec2 q) { return ((q.x - v.x) * dx + (q.y - v.y) * dy) / len; };
  auto yl = [&](Vec2 q) { return (dx * (q.y - v.y) - dy * (q.x - v.x)) / len; };
  const double bt = std::atan2(yl(ct), xl(ct));
  switch (rho) {
    case Relation::left: return yl(ct) - yl(cr) >= eps_m;
    case Relation::right: return yl(cr) - yl(ct) >= eps_m;
    case Relation::front: return std::fabs(bt) <= eps_th && xl(ct) <= xl(cr) - eps_m;
    case Relation::behind: return std::fabs(bt) <= eps_th && xl(ct) >= xl(cr) + eps_m;
    case Relation::near: return std::hypot(ct.x - cr.x, ct.y - cr.y) <= d_near;
    case Relation::above: return zt - zr >= eps_z;
    case Relation::below: return zr - zt >= eps_z;
  }
  return false;
}

const Relation kAll[] = {Relation::left, Relation::right, Relation::front, Relation::behind,
                         Relation::near, Relation::above, Relation::below};

Vec2 rotate(Vec2 p, double a) { return {std::cos(a) * p.x - std::sin(a) * p.y, std::sin(a) * p.x + std::cos(a) * p.y}; }

}  // namespace

TEST(BinScore, Bands) {
  EXPECT_EQ(bin_score(3), Bin::no);
  EXPECT_EQ(bin_score(7), Bin::unknown);
  EXPECT_EQ(bin_score(12), Bin::yes);
  int counts[3] = {0, 0, 0};
  for (int s = 0; s <= 15; ++s) ++counts[static_cast<int>(bin_score(s))];
  EXPECT_EQ(counts[0], 5);
  EXPECT_EQ(counts[1], 6);
  EXPECT_EQ(counts[2], 5);
  EXPECT_THROW(bin_score(-1), DomainError);
  EXPECT_THROW(bin_score(16), DomainError);
}

TEST(VerifyIntrinsic, AllYesAcceptedImmediately) {
  const auto v = verify_intrinsic(color_goal(), [](auto&, auto&) { return 13; }, {0, 0.5, 100});
  EXPECT_TRUE(v.accepted());
  EXPECT_EQ(v.bins.at("color"), std::vector<Bin>{Bin::yes});
}

TEST(VerifyIntrinsic, NoTwiceRejected) {
  int calls = 0;
  const auto v = verify_intrinsic(
      color_goal(), [&](auto&, auto&) { return ++calls, 2; }, {0, 0.5, 100}, {{1, 0.9, 100}});
  EXPECT_TRUE(v.rejected());
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(v.bins.at("color"), (std::vector<Bin>{Bin::no, Bin::no}));
}

TEST(VerifyIntrinsic, DeferredThenBestOfFiveAccepted) {
  // Scripted oracle: 7 everywhere except the most informative later frame.
  const AttributeOracle ask = [](const goal::AttributeQuestion&, const FrameObservation& f) {
    return f.step == 3 ? 13 : 7;
  };
  const std::vector<FrameObservation> later = {{1, 0.2, 50}, {2, 0.4, 50}, {3, 0.9, 50}, {4, 0.3, 50}, {5, 0.1, 50}};
  const auto v = verify_intrinsic(color_goal(), ask, {0, 0.5, 50}, later);
  EXPECT_TRUE(v.accepted());
  EXPECT_EQ(v.bins.at("color"), (std::vector<Bin>{Bin::unknown, Bin::yes}));
}

TEST(VerifyIntrinsic, WindowCountdownAndLateFramesIgnored) {
  const AttributeOracle ask = [](const goal::AttributeQuestion&, const FrameObservation& f) {
    return f.step == 9 ? 13 : 6;
  };
  IntrinsicCheck check(color_goal());
  auto v = check.begin(ask, {10, 0.5, 10});
  ASSERT_TRUE(v.deferred());
  EXPECT_EQ(v.frames_remaining, 5);
  for (int step = 11; step <= 14; ++step) {
    check.observe({step, 0.1 * step, 10});
    v = check.tick(ask, step);
    ASSERT_TRUE(v.deferred());
    EXPECT_EQ(v.frames_remaining, 15 - step);
  }
  check.observe({15, 0.1, 10});
  check.observe({16, 9.0, 10});  // outside the window
  v = check.tick(ask, 15);
  EXPECT_TRUE(v.rejected());
  EXPECT_EQ(check.requery_frame().step, 14);
}

TEST(VerifyIntrinsic, NoQuestionsAccepted) {
  goal::GoalSpec g;
  g.target_category = "bed";
  EXPECT_TRUE(verify_intrinsic(g, [](auto&, auto&) { return 0; }, {}).accepted());
}

TEST(Frame, AlignExamples) {
  const auto f = align_frame({0, 0}, {2, 0});
  EXPECT_DOUBLE_EQ(f.yaw, 0.0);
  EXPECT_EQ(f.ux, (Vec2{1, 0}));
  EXPECT_EQ(f.uy, (Vec2{0, 1}));
  const auto g = align_frame({0, 0}, {0, 2});
  EXPECT_NEAR(g.yaw, kPi / 2, 1e-15);
  EXPECT_NEAR(g.ux.x, 0.0, 1e-15);
  EXPECT_NEAR(g.ux.y, 1.0, 1e-15);
  EXPECT_NEAR(g.uy.x, -1.0, 1e-15);
  EXPECT_NEAR(g.uy.y, 0.0, 1e-15);
  EXPECT_THROW(align_frame({1, 1}, {1, 1}), DomainError);
}

TEST(Frame, ToLocalExamples) {
  const auto id = align_frame({0, 0}, {2, 0});
  auto l = to_local(id, {2, 1});
  EXPECT_DOUBLE_EQ(l.x, 2.0);
  EXPECT_DOUBLE_EQ(l.y, 1.0);
  EXPECT_DOUBLE_EQ(l.bearing, std::atan2(1.0, 2.0));
  const auto rot = align_frame({0, 0}, {0, 5});
  l = to_local(rot, {1, 2});
  EXPECT_NEAR(l.x, 2.0, 1e-12);
  EXPECT_NEAR(l.y, -1.0, 1e-12);
  EXPECT_NEAR(l.bearing, std::atan2(-1.0, 2.0), 1e-12);
  EXPECT_FALSE(to_local(rot, {0, 0}).bearing_defined);
  EXPECT_DOUBLE_EQ(to_local(id, {2, 0}).bearing, 0.0);
}

TEST(Frame, ReferenceAlwaysOnAxis) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 v{rng.uniform(-5, 5), rng.uniform(-5, 5)}, c{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const auto f = align_frame(v, c);
    const auto l = to_local(f, c);
    EXPECT_NEAR(l.y, 0.0, 1e-9);
    EXPECT_NEAR(l.bearing, 0.0, 1e-9);
    EXPECT_NEAR(l.x, distance(v, c), 1e-9);
    EXPECT_NEAR(dot(f.ux, f.uy), 0.0, 1e-12);
  }
}

TEST(Predicate, HandExamples) {
  EXPECT_TRUE(eval_predicate(Relation::left, align_frame({0, 0}, {2, 0}), {2, 0}, {2, 1}, 0, 0));
  EXPECT_FALSE(eval_predicate(Relation::right, align_frame({0, 0}, {2, 0}), {2, 0}, {2, 1}, 0, 0));
  EXPECT_TRUE(eval_predicate(Relation::front, align_frame({0, 0}, {3, 0}), {3, 0}, {2, 0}, 0, 0));
  EXPECT_FALSE(eval_predicate(Relation::behind, align_frame({0, 0}, {3, 0}), {3, 0}, {2, 0}, 0, 0));
  const auto f = align_frame({0, 0}, {1, 1});
  EXPECT_TRUE(eval_predicate(Relation::above, f, {1, 1}, {1.2, 1}, 0.5, 1.7));
  EXPECT_FALSE(eval_predicate(Relation::below, f, {1, 1}, {1.2, 1}, 0.5, 1.7));
  EXPECT_TRUE(eval_predicate(Relation::near, f, {1, 1}, {3, 1}, 0, 0));
  EXPECT_FALSE(eval_predicate(Relation::near, f, {1, 1}, {3.01, 1}, 0, 0));
  EXPECT_THROW(eval_predicate(static_cast<Relation>(99), f, {1, 1}, {2, 2}, 0, 0), VocabularyError);
}

TEST(Predicate, AgreesWithDirectTranscription) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 v{rng.uniform(-4, 4), rng.uniform(-4, 4)}, cr{rng.uniform(-4, 4), rng.uniform(-4, 4)},
        ct{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const double zr = rng.uniform(0, 2), zt = rng.uniform(0, 2);
    const auto f = align_frame(v, cr);
    for (Relation rho : kAll) {
      EXPECT_EQ(eval_predicate(rho, f, cr, ct, zr, zt), direct_predicate(rho, v, cr, ct, zr, zt));
    }
  }
}

TEST(Predicate, RotationEquivarianceAndExclusivity) {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const Vec2 v{rng.uniform(-4, 4), rng.uniform(-4, 4)}, cr{rng.uniform(-4, 4), rng.uniform(-4, 4)},
        ct{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const double zr = rng.uniform(0, 2), zt = rng.uniform(0, 2);
    const auto f = align_frame(v, cr);
    EXPECT_FALSE(eval_predicate(Relation::left, f, cr, ct, zr, zt) && eval_predicate(Relation::right, f, cr, ct, zr, zt));
    for (int k = 1; k < 36; ++k) {
      const double a = k * kPi / 18.0;
      const Vec2 v2 = rotate(v, a), cr2 = rotate(cr, a), ct2 = rotate(ct, a);
      const auto f2 = align_frame(v2, cr2);
      for (Relation rho : kAll) {
        // Skip configurations within rounding of a threshold.
        const bool a1 = eval_predicate(rho, f, cr, ct, zr, zt);
        const bool a2 = eval_predicate(rho, f2, cr2, ct2, zr, zt);
        if (a1 != a2) {
          const auto l = to_local(f, ct), r = to_local(f, cr);
          const double margin = std::min({std::abs(std::abs(l.y - r.y) - 0.15), std::abs(std::abs(l.bearing) - deg_to_rad(25.0)),
                                          std::abs(std::abs(l.x - r.x) - 0.15), std::abs(distance(ct, cr) - 2.0)});
          EXPECT_LT(margin, 1e-9);
        }
      }
    }
  }
}

TEST(Viewpoints, CountAndClosedForm) {
  const auto raw = raw_viewpoints({0, 0});
  ASSERT_EQ(raw.size(), 96u);
  EXPECT_NEAR(raw[0].x, 0.8, 1e-12);
  EXPECT_NEAR(raw[0].y, 0.0, 1e-12);
  EXPECT_NEAR(raw[24 + 6].x, 0.0, 1e-12);
  EXPECT_NEAR(raw[24 + 6].y, 1.2, 1e-12);
  auto g = mapping::GridStack::covering({-3, -3}, {3, 3});
  const auto vs = sample_viewpoints({{0, 0}}, g);
  EXPECT_EQ(vs.raw_count, 96u);
  EXPECT_EQ(vs.points.size(), 96u);
  // A second anchor half a cell away collapses onto the same cells.
  const auto two = sample_viewpoints({{0.01, 0.01}, {0.01, 0.01}}, g);
  EXPECT_EQ(two.raw_count, 192u);
  EXPECT_EQ(two.points.size(), 96u);
}

class TwoRoomFilter : public ::testing::Test {
 protected:
  void SetUp() override {
    g = harness::gt_grid(fixtures::two_rooms(), false);
    goal.target_category = "picture";
    goal.context_categories = {"cabinet"};
    goal.relations = {{"cabinet", "picture", Relation::near}};
  }
  mapping::GridStack g;
  goal::GoalSpec goal;
};

TEST_F(TwoRoomFilter, SameRoomWithinThreeMetresKept) {
  const std::vector<InstanceRecord> recs = {record(0, "picture", {1.0, 1.0}, 1.5), record(1, "cabinet", {3.1, 1.0}, 0.5)};
  const auto r = room_filter(recs[0], recs, g, goal);
  ASSERT_EQ(r.status, FilterStatus::ok) << r.reason;
  ASSERT_EQ(r.contexts.size(), 1u);
  EXPECT_EQ(r.contexts[0]->id, 1);
  EXPECT_EQ(r.effective.size(), 1u);
  EXPECT_EQ(r.centers.size(), 2u);
}

TEST_F(TwoRoomFilter, AcrossTheWallDropped) {
  const std::vector<InstanceRecord> recs = {record(0, "picture", {3.5, 3.9}, 1.5), record(1, "cabinet", {4.5, 3.9}, 0.5)};
  ASSERT_TRUE(mapping::geodesic_distance(g, {3.5, 3.9}, {4.5, 3.9}));
  EXPECT_GT(*mapping::geodesic_distance(g, {3.5, 3.9}, {4.5, 3.9}), 3.0);
  const auto r = room_filter(recs[0], recs, g, goal);
  EXPECT_EQ(r.status, FilterStatus::reject);
  EXPECT_TRUE(r.contexts.empty());
  EXPECT_FALSE(verify_extrinsic(recs[0], r, g, goal).confirmed);
}

TEST_F(TwoRoomFilter, FarInSameRoomDroppedAndUnlabeledDefers) {
  const std::vector<InstanceRecord> recs = {record(0, "picture", {0.3, 0.3}, 1.5), record(1, "cabinet", {3.7, 3.7}, 0.5)};
  EXPECT_EQ(room_filter(recs[0], recs, g, goal).status, FilterStatus::reject);
  const std::vector<int> rooms = {mapping::kNoRoom, 0};
  EXPECT_EQ(room_filter(recs[0], recs, g, goal, {}, &rooms).status, FilterStatus::defer);
}

TEST(VerifyExtrinsic, PictureAboveCabinetNearStaircase) {
  const auto g = harness::gt_grid(fixtures::box_room(6, 5), false);
  goal::GoalSpec goal;
  goal.target_category = "picture";
  goal.context_categories = {"cabinet", "staircase"};
  goal.relations = {{"cabinet", "picture", Relation::above}, {"staircase", "picture", Relation::near}};
  const std::vector<InstanceRecord> recs = {record(0, "picture", {3.0, 4.8}, 1.7), record(1, "cabinet", {3.0, 4.6}, 0.5),
                                            record(2, "staircase", {4.5, 4.0}, 1.0)};
  const auto f = room_filter(recs[0], recs, g, goal);
  ASSERT_EQ(f.status, FilterStatus::ok) << f.reason;
  const auto r = verify_extrinsic(recs[0], f, g, goal);
  ASSERT_TRUE(r.confirmed) << r.reason;
  ASSERT_TRUE(r.viewpoint);
  EXPECT_TRUE(g.is_free(g.cell_of(*r.viewpoint)));
  EXPECT_EQ(r.binding.at("cabinet"), 1);
  EXPECT_EQ(r.binding.at("staircase"), 2);
  const auto again = verify_extrinsic(recs[0], f, g, goal);
  EXPECT_EQ(*again.viewpoint, *r.viewpoint);

  // Picture lower than the cabinet: no viewpoint can make it "above".
  std::vector<InstanceRecord> low = recs;
  low[0].z_hat = 0.4;
  EXPECT_FALSE(verify_extrinsic(low[0], room_filter(low[0], low, g, goal), g, goal).confirmed);
}

TEST(VerifyExtrinsic, LeftAndRightOfOneReferenceNeverBothHold) {
  const auto g = harness::gt_grid(fixtures::box_room(6, 5), false);
  goal::GoalSpec goal;
  goal.target_category = "picture";
  goal.context_categories = {"cabinet"};
  goal.relations = {{"cabinet", "picture", Relation::left}, {"cabinet", "picture", Relation::right}};
  const std::vector<InstanceRecord> recs = {record(0, "picture", {2.5, 2.5}, 1.0), record(1, "cabinet", {3.5, 2.5}, 0.5)};
  const auto f = room_filter(recs[0], recs, g, goal);
  ASSERT_EQ(f.status, FilterStatus::ok);
  const auto r = verify_extrinsic(recs[0], f, g, goal);
  EXPECT_FALSE(r.confirmed);
  EXPECT_GT(r.n_viewpoints, 0u);
  // Each relation alone is satisfiable.
  goal.relations.pop_back();
  EXPECT_TRUE(verify_extrinsic(recs[0], room_filter(recs[0], recs, g, goal), g, goal).confirmed);
}

TEST(VerifyExtrinsic, DistractorRoomLacksContext) {
  const auto g = harness::gt_grid(fixtures::two_rooms(), false);
  goal::GoalSpec goal;
  goal.target_category = "picture";
  goal.context_categories = {"cabinet"};
  goal.relations = {{"cabinet", "picture", Relation::above}};
  const std::vector<InstanceRecord> recs = {record(0, "picture", {1.0, 3.8}, 1.7), record(1, "cabinet", {1.0, 3.6}, 0.5),
                                            record(2, "picture", {6.0, 3.8}, 1.7)};
  EXPECT_TRUE(verify_extrinsic(recs[0], room_filter(recs[0], recs, g, goal), g, goal).confirmed);
  const auto f = room_filter(recs[2], recs, g, goal);
  EXPECT_EQ(f.status, FilterStatus::reject);
  EXPECT_FALSE(verify_extrinsic(recs[2], f, g, goal).confirmed);
}

TEST(VerifyExtrinsic, AnyBindingMayCertify) {
  const auto g = harness::gt_grid(fixtures::box_room(6, 5), false);
  goal::GoalSpec goal;
  goal.target_category = "lamp";
  goal.context_categories = {"chair"};
  goal.relations = {{"chair", "lamp", Relation::above}};
  // The nearer chair is taller than the lamp; the farther one is lower.
  const std::vector<InstanceRecord> recs = {record(0, "lamp", {3, 2.5}, 1.0), record(1, "chair", {3.5, 2.5}, 1.2),
                                            record(2, "chair", {4.5, 2.5}, 0.4)};
  const auto r = verify_extrinsic(recs[0], room_filter(recs[0], recs, g, goal), g, goal);
  ASSERT_TRUE(r.confirmed);
  EXPECT_EQ(r.binding.at("chair"), 2);
  EXPECT_EQ(r.bindings_tried, 2u);
}
