#include <gtest/gtest.h>

#include <set>
#include <tuple>

#include "fixtures.hpp"

using namespace ctxnav;
using namespace ctxnav::goal;

namespace {

using Triple = std::tuple<std::string, std::string, Relation>;

std::set<Triple> triples(const GoalSpec& g) {
  std::set<Triple> out;
  for (const auto& t : g.relations) out.insert({t.ref, t.tgt, t.rho});
  return out;
}

Json picture_doc() {
  return Json::parse(R"({
    "target": "picture",
    "attributes": {"color": "yellow and green", "shape": null},
    "questions": [{"atype": "color", "q": "Is the picture yellow and green?"}],
    "groups": {"picture": ["painting"], "cabinet": ["wooden cabinet", "cupboard"], "staircase": ["stairs"]},
    "relations": [{"ref": "wooden cabinet", "tgt": "painting", "rtype": "above"},
                  {"ref": "stairs", "tgt": "picture", "rtype": "near"}]
  })");
}

}  // namespace

TEST(IngestGoal, PictureAboveCabinetNearStaircase) {
  const GoalSpec g = ingest_goal_json(picture_doc());
  EXPECT_EQ(g.target_category, "picture");
  EXPECT_EQ(g.intrinsic.at("color"), "yellow and green");
  EXPECT_EQ(g.intrinsic.count("shape"), 0u);
  EXPECT_EQ(g.context_categories, (std::set<std::string>{"cabinet", "staircase"}));
  EXPECT_EQ(triples(g), (std::set<Triple>{{"cabinet", "picture", Relation::above},
                                          {"staircase", "picture", Relation::near}}));
  ASSERT_EQ(g.questions.size(), 1u);
  EXPECT_EQ(g.questions[0].value, "yellow and green");
}

TEST(IngestGoal, PlainCategoryGoal) {
  const GoalSpec g = ingest_goal_json(Json::parse(R"({"target": "bed", "attributes": {}, "relations": []})"));
  EXPECT_EQ(g.target_category, "bed");
  EXPECT_TRUE(g.intrinsic.empty());
  EXPECT_TRUE(g.relations.empty());
  EXPECT_TRUE(g.questions.empty());
}

TEST(IngestGoal, Errors) {
  Json d = picture_doc();
  d["relations"][0]["rtype"] = "inside";
  EXPECT_THROW(ingest_goal_json(d), VocabularyError);

  Json e = picture_doc();
  e["relations"][0]["ref"] = "sofa";
  EXPECT_THROW(ingest_goal_json(e), ReferenceError);

  Json f = picture_doc();
  for (int i = 0; i < 5; ++i) f["relations"].push_back({{"ref", "cabinet"}, {"tgt", "picture"}, {"rtype", "near"}});
  EXPECT_THROW(ingest_goal_json(f), CardinalityError);

  Json g = picture_doc();
  g["attributes"]["size"] = "big";
  EXPECT_THROW(ingest_goal_json(g), VocabularyError);

  Json h = picture_doc();
  h["questions"][0]["q"] = "Is it yellow?";  // does not mention the target
  EXPECT_THROW(ingest_goal_json(h), ValidationError);

  Json k = picture_doc();
  k["questions"][0]["atype"] = "shape";  // no shape attribute to ask about
  EXPECT_THROW(ingest_goal_json(k), ValidationError);

  EXPECT_THROW(ingest_goal_json(Json::parse(R"({"attributes": {}})")), ParseError);
}

TEST(IngestGoal, ContradictoryRelationsRejected) {
  Json d = picture_doc();
  d["relations"].push_back({{"ref", "cabinet"}, {"tgt", "picture"}, {"rtype", "below"}});
  EXPECT_THROW(ingest_goal_json(d), ValidationError);
  Json e = picture_doc();
  e["relations"] = Json::parse(R"([{"ref": "cabinet", "tgt": "picture", "rtype": "left"},
                                   {"ref": "picture", "tgt": "cabinet", "rtype": "left"}])");
  EXPECT_THROW(ingest_goal_json(e), ValidationError);
}

TEST(IngestGoal, RoundTripsThroughEmit) {
  const GoalSpec a = ingest_goal_json(picture_doc());
  EXPECT_EQ(ingest_goal_json(Json::parse(emit_goal_json(a).dump())), a);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    harness::GenConfig gc;
    gc.rooms = 1 + static_cast<int>(seed % 4);
    const GoalSpec g = harness::generate_scene(seed, gc).goal;
    EXPECT_EQ(ingest_goal_json(Json::parse(emit_goal_json(g).dump())), g) << seed;
  }
}

TEST(Canonicalize, Examples) {
  const auto& lx = Lexicon::builtin();
  const auto m = canonicalize_terms({"couch", "the wooden cabinet"}, lx, "sofa");
  EXPECT_EQ(m.at("couch"), "sofa");
  EXPECT_EQ(m.at("the wooden cabinet"), "cabinet");
  EXPECT_EQ(canonicalize_terms({"sofa"}, lx, "sofa").at("sofa"), "sofa");
  EXPECT_EQ(canonicalize_terms({"armchair"}, lx, "bed").at("armchair"), "chair");
  EXPECT_EQ(canonicalize_terms({"Blue Zorb"}, lx, "bed").at("Blue Zorb"), "zorb");
  // A target outside the lexicon still claims its own phrase verbatim.
  EXPECT_EQ(canonicalize_terms({"Hammock"}, lx, "hammock").at("Hammock"), "hammock");
}

TEST(ParseCaption, FigureOneGoal) {
  const GoalSpec g = parse_caption("a yellow and green picture above the cabinet near the staircase");
  EXPECT_EQ(g.target_category, "picture");
  EXPECT_EQ(g.intrinsic.at("color"), "yellow and green");
  EXPECT_EQ(triples(g), (std::set<Triple>{{"cabinet", "picture", Relation::above},
                                          {"staircase", "picture", Relation::near}}));
}

TEST(ParseCaption, BareCategory) {
  const GoalSpec g = parse_caption("a bed");
  EXPECT_EQ(g.target_category, "bed");
  EXPECT_TRUE(g.intrinsic.empty());
  EXPECT_TRUE(g.relations.empty());
  EXPECT_TRUE(g.context_categories.empty());
}

TEST(ParseCaption, WithSuffixAndNextTo) {
  // A mirror on top of the dresser makes the dresser the lower object:
  // (mirror, dresser, below) reads "dresser is below the mirror".
  const GoalSpec g = parse_caption("a white dresser with a mirror on top next to the bed");
  EXPECT_EQ(g.target_category, "dresser");
  EXPECT_EQ(g.intrinsic.at("color"), "white");
  EXPECT_EQ(triples(g), (std::set<Triple>{{"mirror", "dresser", Relation::below},
                                          {"bed", "dresser", Relation::near}}));
}

TEST(ParseCaption, StopNounsAreDropped) {
  const GoalSpec g = parse_caption("a lamp in the corner of the room next to the couch");
  EXPECT_EQ(g.context_categories, (std::set<std::string>{"sofa"}));
  EXPECT_EQ(triples(g), (std::set<Triple>{{"sofa", "lamp", Relation::near}}));
}

TEST(ParseCaption, OutOfGrammarNamesSuffix) {
  try {
    parse_caption("a bed that glows softly");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("glows softly"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_caption("a zebra"), ParseError);
}

// Captions built from an independent template table; the expected relation
// set comes from the table, not from the parser.
TEST(ParseCaption, GrammarFuzz) {
  const std::vector<std::pair<std::string, Relation>> phrases = {
      {"to the left of the", Relation::left}, {"to the right of the", Relation::right},
      {"in front of the", Relation::front},   {"behind the", Relation::behind},
      {"near the", Relation::near},           {"next to the", Relation::near},
      {"above the", Relation::above},         {"on top of the", Relation::above},
      {"below the", Relation::below},         {"under the", Relation::below}};
  const std::vector<std::string> targets = {"picture", "lamp", "chair", "table", "mirror", "plant", "sofa", "tv"};
  const std::vector<std::string> contexts = {"cabinet", "bed", "dresser", "staircase", "shelf", "window", "sink"};
  const std::vector<std::string> colors = {"", "red", "dark blue", "yellow and green", "white"};
  const std::vector<std::string> shapes = {"", "round", "tall"};
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const auto& tgt = targets[static_cast<std::size_t>(rng.uniform_int(0, 7))];
    const auto& col = colors[static_cast<std::size_t>(rng.uniform_int(0, 4))];
    const auto& shp = shapes[static_cast<std::size_t>(rng.uniform_int(0, 2))];
    std::string cap = "a";
    if (!col.empty()) cap += " " + col;
    if (!shp.empty()) cap += " " + shp;
    cap += " " + tgt;
    std::set<Triple> expect;
    const int n = static_cast<int>(rng.uniform_int(0, 3));
    std::set<std::string> used;
    for (int k = 0; k < n; ++k) {
      const auto& ctx = contexts[static_cast<std::size_t>(rng.uniform_int(0, 6))];
      if (!used.insert(ctx).second) continue;
      const auto& [ph, rho] = phrases[static_cast<std::size_t>(rng.uniform_int(0, 9))];
      cap += (k ? " and " : " ") + ph + " " + ctx;
      expect.insert({ctx, tgt, rho});
    }
    GoalSpec g;
    ASSERT_NO_THROW(g = parse_caption(cap)) << cap;
    EXPECT_EQ(g.target_category, tgt) << cap;
    EXPECT_EQ(triples(g), expect) << cap;
    if (!col.empty()) EXPECT_EQ(g.intrinsic.at("color"), col) << cap;
    if (!shp.empty()) EXPECT_EQ(g.intrinsic.at("shape"), shp) << cap;
    EXPECT_EQ(parse_caption(cap), g);
  }
}

TEST(ParseCaption, InverseTemplaterRecoversRelations) {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const GoalSpec g = harness::generate_scene(seed).goal;
    const GoalSpec back = parse_caption(render_caption(g));
    EXPECT_EQ(back.target_category, g.target_category);
    EXPECT_EQ(triples(back), triples(g)) << render_caption(g);
    EXPECT_EQ(back.intrinsic, g.intrinsic) << render_caption(g);
  }
}

TEST(ParseInstanceNav, SeparateInputs) {
  const GoalSpec g = parse_instancenav("couch", "a light gray leather couch", "the couch is next to the fireplace");
  EXPECT_EQ(g.target_category, "sofa");
  EXPECT_EQ(g.intrinsic.at("color"), "light gray");
  EXPECT_EQ(triples(g), (std::set<Triple>{{"fireplace", "sofa", Relation::near}}));
  const GoalSpec c = parse_goal(GoalMode::coin, "a sofa near the fireplace");
  EXPECT_EQ(triples(c), triples(g));
}
