#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace ctxnav;
using namespace ctxnav::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ctxnav_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

goal::GoalSpec near_goal(const std::string& target, const std::string& context) {
  goal::GoalSpec g;
  g.target_category = target;
  g.context_categories = {context};
  g.relations = {{context, target, goal::Relation::near}};
  return g;
}

EpisodeConfig coin_config(int max_steps = 500) {
  EpisodeConfig c = EpisodeConfig::with_profile(Profile::coin);
  c.id = "fixture";
  c.max_steps = max_steps;
  return c;
}

void check_invariants(const EpisodeResult& r, const EpisodeConfig& c) {
  EXPECT_LE(r.steps, c.max_steps);
  EXPECT_GE(r.path_length, 0.0);
  EXPECT_LE(r.path_length, 0.25 * r.forward_actions + 1e-9);
  EXPECT_EQ(r.trajectory.size(), static_cast<std::size_t>(r.steps) + 1);
  EXPECT_EQ(r.verdict == Verdict::time_out, r.steps == c.max_steps && r.stopped_at.empty() && !r.success);
}

}  // namespace

TEST(Metrics, HandValues) {
  auto m = compute_metrics({{true, 4.0, 4.0}});
  EXPECT_NEAR(m.spl, 100.0, 1e-9);
  EXPECT_NEAR(m.sr, 100.0, 1e-9);
  m = compute_metrics({{false, 4.0, 4.0}});
  EXPECT_EQ(m.spl, 0.0);
  EXPECT_EQ(m.sr, 0.0);
  m = compute_metrics({{true, 10.0, 5.0}});
  EXPECT_NEAR(m.spl, 50.0, 1e-9);
  // Shorter than the shortest path (a generous success radius) caps at 1.
  m = compute_metrics({{true, 3.0, 5.0}, {false, 1.0, 2.0}});
  EXPECT_NEAR(m.spl, 50.0, 1e-9);
  EXPECT_NEAR(m.sr, 50.0, 1e-9);
  EXPECT_THROW(compute_metrics({}), DomainError);
  EXPECT_THROW(compute_metrics({{true, 1.0, 0.0}}), DomainError);
}

TEST(Metrics, PermutationInvariantAndSplBelowSr) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    std::vector<MetricSample> xs;
    const int n = static_cast<int>(rng.uniform_int(1, 30));
    for (int i = 0; i < n; ++i) xs.push_back({rng.uniform() < 0.6, rng.uniform(0, 20), rng.uniform(0.1, 15)});
    const auto a = compute_metrics(xs);
    std::shuffle(xs.begin(), xs.end(), rng.engine());
    const auto b = compute_metrics(xs);
    EXPECT_NEAR(a.sr, b.sr, 1e-9);
    EXPECT_NEAR(a.spl, b.spl, 1e-9);
    EXPECT_LE(a.spl, a.sr + 1e-12);
  }
}

TEST(Profiles, Parameters) {
  EXPECT_EQ(profile_params(Profile::coin).max_steps, 500);
  EXPECT_DOUBLE_EQ(profile_params(Profile::coin).success_radius, 0.25);
  EXPECT_EQ(profile_params(Profile::instancenav).max_steps, 1000);
  EXPECT_DOUBLE_EQ(profile_params(Profile::instancenav).success_radius, 1.0);
  EXPECT_THROW(parse_profile("habitat"), ConfigError);
}

TEST(RunEpisode, OneRoomTargetWithContext) {
  world::Scene s = fixtures::box_room(6, 5);
  s.spawn = {{1.5, 2.5}, 0.0};
  fixtures::add_box(s, "table_0", "table", {4.0, 1.0}, {4.8, 1.6}, 0.0, 0.75);
  fixtures::add_box(s, "chair_0", "chair", {4.1, 2.2}, {4.6, 2.7}, 0.0, 0.9);
  const auto goal = near_goal("table", "chair");
  const auto cfg = coin_config();
  const auto r = run_episode(s, goal, "table_0", cfg);
  EXPECT_EQ(r.verdict, Verdict::target);
  EXPECT_TRUE(r.success);
  EXPECT_LE(s.at("table_0").footprint.distance_to(r.trajectory.back().position), 0.25);
  EXPECT_GT(r.shortest_length, 0.0);
  check_invariants(r, cfg);
}

TEST(RunEpisode, DistractorWithoutContextIsPassedOver) {
  world::Scene s = fixtures::two_rooms();
  s.spawn = {{6.0, 2.0}, kPi};
  fixtures::add_box(s, "table_far", "table", {0.6, 0.6}, {1.4, 1.2}, 0.0, 0.75);
  fixtures::add_box(s, "chair_0", "chair", {1.7, 0.6}, {2.2, 1.1}, 0.0, 0.9);
  fixtures::add_box(s, "table_near", "table", {6.6, 2.6}, {7.4, 3.2}, 0.0, 0.75);
  const auto goal = near_goal("table", "chair");
  ASSERT_EQ(gt_matching_instances(s, goal), std::vector<std::string>{"table_far"});
  const auto cfg = coin_config();
  const auto r = run_episode(s, goal, "table_far", cfg);
  EXPECT_EQ(r.verdict, Verdict::target);
  EXPECT_EQ(r.stopped_at, "table_far");
  check_invariants(r, cfg);
}

TEST(RunEpisode, WalledOffGoalTimesOut) {
  world::Scene s = fixtures::box_room(7, 5);
  s.spawn = {{1.5, 2.5}, 0.0};
  // Closed closet around the goal.
  s.walls.push_back({{4.5, 1.5}, {6.5, 1.5}, 2.6});
  s.walls.push_back({{6.5, 1.5}, {6.5, 3.5}, 2.6});
  s.walls.push_back({{6.5, 3.5}, {4.5, 3.5}, 2.6});
  s.walls.push_back({{4.5, 3.5}, {4.5, 1.5}, 2.6});
  fixtures::add_box(s, "lamp_0", "lamp", {5.3, 2.3}, {5.7, 2.7}, 0.0, 1.5);
  goal::GoalSpec goal;
  goal.target_category = "lamp";
  const auto cfg = coin_config(150);
  const auto r = run_episode(s, goal, "lamp_0", cfg);
  EXPECT_EQ(r.verdict, Verdict::time_out);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.steps, 150);
  check_invariants(r, cfg);
}

TEST(RunEpisode, ConfigurationErrorsBeforeStepping) {
  EpisodeConfig c = coin_config();
  c.scene_path = "/nonexistent/scene.json";
  c.caption = "a bed";
  EXPECT_THROW(run_episode(c), ConfigError);
  c.max_steps = 0;
  EXPECT_THROW(validate_config(c), ConfigError);
  c.max_steps = 10;
  c.success_radius = -1.0;
  EXPECT_THROW(validate_config(c), ConfigError);
  EpisodeConfig d = coin_config();
  d.scene_path = "examples/missing.json";
  EXPECT_THROW(load_episode(d), ConfigError);
}

TEST(Generator, DeterministicBytes) {
  const std::string a = scratch("gen_a"), b = scratch("gen_b");
  write_generated(generate_scene(7), a);
  write_generated(generate_scene(7), b);
  for (const char* f : {"/scene.json", "/goal.json"}) {
    const std::string x = slurp(a + f);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b + f)) << f;
  }
  EXPECT_NE(slurp(a + "/scene.json"), (write_generated(generate_scene(8), b), slurp(b + "/scene.json")));
}

TEST(Generator, SeedSevenTwoRoomsOneDistractor) {
  GenConfig gc;
  gc.rooms = 2;
  gc.distractors = 1;
  const auto ep = generate_scene(7, gc);
  ASSERT_EQ(ep.distractor_ids.size(), 1u);
  EXPECT_EQ(ep.scene.at(ep.distractor_ids[0]).category, ep.goal.target_category);
  // Exactly one instance passes ground-truth verification: the target.
  EXPECT_EQ(gt_matching_instances(ep.scene, ep.goal), std::vector<std::string>{ep.target_id});
  // Round trip through the scene loader.
  const std::string d = scratch("gen7");
  write_generated(ep, d);
  EXPECT_EQ(world::load_scene_file(d + "/scene.json").instances.size(), ep.scene.instances.size());
}

TEST(Generator, NoDistractorsAndSelfCheckAcrossSeeds) {
  GenConfig plain;
  plain.distractors = 0;
  const auto p = generate_scene(3, plain);
  EXPECT_TRUE(p.distractor_ids.empty());
  for (std::uint64_t seed = 20; seed < 40; ++seed) {
    GenConfig gc;
    gc.rooms = 1 + static_cast<int>(seed % 4);
    gc.distractors = 1 + static_cast<int>(seed % 2);
    const auto ep = generate_scene(seed, gc);
    EXPECT_EQ(gt_matching_instances(ep.scene, ep.goal), std::vector<std::string>{ep.target_id}) << seed;
    EXPECT_EQ(ep.distractor_ids.size(), static_cast<std::size_t>(gc.distractors)) << seed;
  }
}

TEST(Generator, AttributeDistractorsDifferInColor) {
  GenConfig gc;
  gc.attribute_distractors = 1;
  const auto ep = generate_scene(11, gc);
  ASSERT_EQ(ep.attribute_distractor_ids.size(), 1u);
  ASSERT_TRUE(ep.goal.intrinsic.count("color"));
  const auto& d = ep.scene.at(ep.attribute_distractor_ids[0]);
  EXPECT_EQ(d.category, ep.goal.target_category);
  EXPECT_NE(d.attributes.at("color"), ep.goal.intrinsic.at("color"));
}

class RenderExport : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    world::Scene s = fixtures::box_room(6, 5);
    s.spawn = {{1.5, 2.5}, 0.0};
    fixtures::add_box(s, "table_0", "table", {4.0, 1.0}, {4.8, 1.6}, 0.0, 0.75);
    fixtures::add_box(s, "chair_0", "chair", {4.1, 2.2}, {4.6, 2.7}, 0.0, 0.9);
    art = new EpisodeArtifacts;
    res = new EpisodeResult(run_episode(s, near_goal("table", "chair"), "table_0", coin_config(), art));
  }
  static void TearDownTestSuite() {
    delete art;
    delete res;
  }
  static EpisodeArtifacts* art;
  static EpisodeResult* res;
};
EpisodeArtifacts* RenderExport::art = nullptr;
EpisodeResult* RenderExport::res = nullptr;

TEST_F(RenderExport, FileManifestAndIdenticalBytes) {
  const std::string a = scratch("render_a"), b = scratch("render_b");
  const auto files = export_map_render(art->grid, *res, art->instances, a);
  EXPECT_EQ(files.graymaps.size(), 4u);
  for (const auto& f : files.graymaps) EXPECT_EQ(slurp(f).substr(0, 2), "P5");
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(a)) n += e.is_regular_file();
  EXPECT_EQ(n, 6u);
  const std::string svg = slurp(files.svg);
  EXPECT_NE(svg.find("id=\"trajectory\""), std::string::npos);
  EXPECT_NE(svg.find(">target</text>"), std::string::npos);
  const Json side = read_json_file(files.sidecar);
  EXPECT_EQ(side["verdict"], "target");

  const auto again = export_map_render(art->grid, *res, art->instances, b);
  for (const char* f : {"/occupancy.pgm", "/walls.pgm", "/rooms.pgm", "/value.pgm", "/overlay.svg"}) {
    EXPECT_EQ(slurp(a + f), slurp(b + f)) << f;
  }
  EXPECT_EQ(slurp(files.sidecar), slurp(again.sidecar));
}

TEST_F(RenderExport, ImmediateStopHasSingleMarker) {
  EpisodeResult r = *res;
  r.trajectory.resize(1);
  const auto files = export_map_render(art->grid, r, art->instances, scratch("render_single"));
  const std::string svg = slurp(files.svg);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
  std::size_t circles = 0;
  for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
  EXPECT_EQ(circles, 1u);
}

TEST_F(RenderExport, UnwritablePathAndEmptyGrid) {
  const std::string d = scratch("render_bad");
  std::ofstream(d + "/file") << "x";
  EXPECT_THROW(export_map_render(art->grid, *res, art->instances, d + "/file/sub"), IoError);
  EXPECT_THROW(export_map_render(mapping::GridStack{}, *res, art->instances, d + "/out"), DomainError);
}

TEST(Config, JsonRoundTrip) {
  EpisodeConfig c = EpisodeConfig::with_profile(Profile::instancenav);
  c.id = "abc";
  c.scene_path = "/tmp/s.json";
  c.caption = "a bed near the lamp";
  c.seed = 99;
  c.noise.detector.flip_prob = 0.1;
  enable_ablation(c.ablate, "extrinsic");
  const Json j = Json::parse(config_to_json(c).dump());
  const EpisodeConfig d = config_from_json(j);
  EXPECT_EQ(d.id, c.id);
  EXPECT_EQ(d.scene_path, c.scene_path);
  EXPECT_EQ(d.caption, c.caption);
  EXPECT_EQ(d.profile, Profile::instancenav);
  EXPECT_EQ(d.max_steps, 1000);
  EXPECT_DOUBLE_EQ(d.success_radius, 1.0);
  EXPECT_EQ(d.seed, 99u);
  EXPECT_DOUBLE_EQ(d.noise.detector.flip_prob, 0.1);
  EXPECT_TRUE(d.ablate.extrinsic);
  EXPECT_EQ(config_to_json(d).dump(), config_to_json(c).dump());
  EXPECT_THROW(enable_ablation(c.ablate, "everything"), ConfigError);
}

TEST(Manifest, RelativePathsAndDefaultIds) {
  const Json doc = Json::parse(R"([{"scene": "a/scene.json", "goal": "a/goal.json", "seed": 1},
                                    {"id": "named", "scene": "/abs/scene.json", "caption": "a bed"}])");
  const auto cfgs = parse_manifest(doc, "/data/suite");
  ASSERT_EQ(cfgs.size(), 2u);
  EXPECT_EQ(cfgs[0].id, "ep0000");
  EXPECT_EQ(fs::path(cfgs[0].scene_path), fs::path("/data/suite/a/scene.json"));
  EXPECT_EQ(cfgs[1].id, "named");
  EXPECT_EQ(cfgs[1].scene_path, "/abs/scene.json");
  EXPECT_THROW(parse_manifest(Json::parse("[]")), ConfigError);
  EXPECT_THROW(parse_manifest(Json::parse(R"([{"scene": "x", "max_steps": -3, "caption": "a bed"}])")), ConfigError);
}

TEST(Batch, ReproducibleMetrics) {
  const std::string dir = scratch("batch");
  GenConfig gc;
  const auto cfgs = generate_suite(500, 2, gc, dir + "/suite");
  const auto loaded = load_manifest(dir + "/suite/manifest.json");
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(fs::path(loaded[1].scene_path), fs::path(cfgs[1].scene_path));
  run_batch(loaded, dir + "/run1");
  run_batch(loaded, dir + "/run2");
  const std::string m1 = slurp(dir + "/run1/metrics.json");
  EXPECT_FALSE(m1.empty());
  EXPECT_EQ(m1, slurp(dir + "/run2/metrics.json"));
  const auto back = load_results(dir + "/run1");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(Json::parse(summarize(back).dump()), Json::parse(m1));
}
