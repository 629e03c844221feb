// Command-line front end: run, gen, metrics, render, batch.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "ctxnav.hpp"

using namespace ctxnav;
using namespace ctxnav::harness;

namespace {

struct RunArgs {
  std::string scene, goal, caption, profile = "coin", out, noise;
  std::uint64_t seed = 0;
  int max_steps = 0;
  std::vector<std::string> ablate;
  bool render = false;
};

struct GenArgs {
  std::uint64_t seed = 0;
  int rooms = 2, distractors = 1, attribute_distractors = 0, count = 1;
  std::string out;
};

void print(const OrderedJson& j) { std::cout << j.dump(2) << '\n'; }

EpisodeConfig config_from_args(const RunArgs& a) {
  EpisodeConfig c = EpisodeConfig::with_profile(parse_profile(a.profile));
  c.scene_path = a.scene;
  c.goal_path = a.goal;
  c.caption = a.caption;
  c.seed = a.seed;
  c.id = "run";
  if (a.max_steps != 0) c.max_steps = a.max_steps;
  if (!a.noise.empty()) {
    try {
      c.noise = load_noise(read_json_file(a.noise));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  for (const auto& n : a.ablate) enable_ablation(c.ablate, n);
  validate_config(c);
  return c;
}

OrderedJson brief(const EpisodeResult& r) {
  OrderedJson j = result_to_json(r, false);
  j.erase("trace");
  return j;
}

int cmd_run(const RunArgs& a) {
  const EpisodeConfig cfg = config_from_args(a);
  EpisodeArtifacts art;
  const EpisodeResult r = run_episode(cfg, &art);
  write_text_file(a.out + "/result.json", result_document(r, cfg));
  if (a.render) export_map_render(art.grid, r, art.instances, a.out + "/render");
  print(brief(r));
  return 0;
}

int cmd_gen(const GenArgs& a) {
  GenConfig g;
  g.rooms = a.rooms;
  g.distractors = a.distractors;
  g.attribute_distractors = a.attribute_distractors;
  if (a.count == 1) {
    const auto ep = generate_scene(a.seed, g);
    write_generated(ep, a.out);
    OrderedJson j;
    j["seed"] = a.seed;
    j["target"] = ep.target_id;
    j["distractors"] = ep.distractor_ids;
    j["attribute_distractors"] = ep.attribute_distractor_ids;
    j["caption"] = goal::render_caption(ep.goal);
    print(j);
  } else {
    const auto cfgs = generate_suite(a.seed, a.count, g, a.out);
    OrderedJson j;
    j["episodes"] = cfgs.size();
    j["manifest"] = a.out + "/manifest.json";
    print(j);
  }
  return 0;
}

int cmd_render(const std::string& result_path, const std::string& out) {
  const Json doc = read_json_file(result_path);
  if (!doc.contains("config")) throw ConfigError(result_path + ": no 'config' section to replay");
  const EpisodeResult stored = result_from_json(doc);
  const EpisodeConfig cfg = config_from_json(doc["config"]);
  EpisodeArtifacts art;
  const EpisodeResult r = run_episode(cfg, &art);
  if (r.steps != stored.steps || r.verdict != stored.verdict) {
    throw ConfigError(result_path + ": replay does not reproduce the stored result");
  }
  const auto files = export_map_render(art.grid, r, art.instances, out);
  OrderedJson j;
  j["graymaps"] = files.graymaps;
  j["svg"] = files.svg;
  j["sidecar"] = files.sidecar;
  print(j);
  return 0;
}

int cmd_batch(const std::string& manifest, const std::string& out) {
  const auto cfgs = load_manifest(manifest);
  const auto results = run_batch(cfgs, out, [](const EpisodeResult& r) {
    std::fprintf(stderr, "%s %s steps=%d\n", r.id.c_str(), std::string(to_string(r.verdict)).c_str(), r.steps);
  });
  print(summarize(results));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-goal instance navigation with context verification"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run one episode");
  run->add_option("--scene", ra.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  auto* goal_opt = run->add_option("--goal", ra.goal, "Goal JSON")->check(CLI::ExistingFile);
  auto* cap_opt = run->add_option("--caption", ra.caption, "Goal as free text");
  goal_opt->excludes(cap_opt);
  run->add_option("--profile", ra.profile, "coin or instancenav")->check(CLI::IsMember({"coin", "instancenav"}));
  run->add_option("--seed", ra.seed, "Random seed");
  run->add_option("--max-steps", ra.max_steps, "Step budget (default from profile)")->check(CLI::PositiveNumber);
  run->add_option("--out", ra.out, "Output directory")->required();
  run->add_option("--noise", ra.noise, "Oracle noise JSON")->check(CLI::ExistingFile);
  run->add_option("--ablate", ra.ablate, "value-map, category-verify, intrinsic or extrinsic")
      ->check(CLI::IsMember({"value-map", "category-verify", "intrinsic", "extrinsic"}));
  run->add_flag("--render", ra.render, "Also write map renders into OUT/render");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a scene and goal");
  gen->add_option("--seed", ga.seed, "Seed")->required();
  gen->add_option("--rooms", ga.rooms, "Rooms (1-4)")->check(CLI::Range(1, 4));
  gen->add_option("--distractors", ga.distractors, "Same-category context distractors")->check(CLI::NonNegativeNumber);
  gen->add_option("--attribute-distractors", ga.attribute_distractors, "Same-category distractors of another color")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--count", ga.count, "Episodes; above 1 writes a suite with manifest.json")
      ->check(CLI::PositiveNumber);
  gen->add_option("--out", ga.out, "Output directory")->required();

  std::string metrics_in;
  auto* metrics = app.add_subcommand("metrics", "Print SR/SPL for a directory of results");
  metrics->add_option("--in", metrics_in, "Directory with *result.json files")->required();

  std::string render_result, render_out;
  auto* render = app.add_subcommand("render", "Replay a result and write map renders");
  render->add_option("--result", render_result, "Result JSON")->required()->check(CLI::ExistingFile);
  render->add_option("--out", render_out, "Output directory")->required();

  std::string manifest, batch_out;
  auto* batch = app.add_subcommand("batch", "Run every episode of a manifest");
  batch->add_option("--manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  batch->add_option("--out", batch_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (ra.goal.empty() && ra.caption.empty()) throw ConfigError("run: --goal or --caption is required");
      std::filesystem::create_directories(ra.out);
      return cmd_run(ra);
    }
    if (*gen) return cmd_gen(ga);
    if (*metrics) {
      print(summarize(load_results(metrics_in)));
      return 0;
    }
    if (*render) return cmd_render(render_result, render_out);
    if (*batch) return cmd_batch(manifest, batch_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
