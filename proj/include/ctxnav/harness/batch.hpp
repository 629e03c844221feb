#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/json.hpp"
#include "ctxnav/harness/episode.hpp"
#include "ctxnav/harness/generator.hpp"
#include "ctxnav/harness/metrics.hpp"

namespace ctxnav::harness {

/// A manifest is a JSON list of episode configs, or an object holding that
/// list under "episodes". Entries without an id get "epNNNN".
inline std::vector<EpisodeConfig> parse_manifest(const Json& doc, const std::string& base_dir = "") {
  const Json* list = &doc;
  if (doc.is_object() && doc.contains("episodes")) list = &doc["episodes"];
  if (!list->is_array()) throw ConfigError("manifest: expected a list of episode configs");
  std::vector<EpisodeConfig> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    EpisodeConfig c;
    try {
      c = config_from_json((*list)[i], base_dir);
    } catch (const Error& e) {
      throw ConfigError("manifest[" + std::to_string(i) + "]: " + e.what());
    }
    if (c.id.empty()) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "ep%04zu", i);
      c.id = buf;
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw ConfigError("manifest: no episodes");
  return out;
}

inline std::vector<EpisodeConfig> load_manifest(const std::string& path) {
  Json doc;
  try {
    doc = read_json_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_manifest(doc, std::filesystem::path(path).parent_path().string());
}

inline OrderedJson manifest_to_json(const std::vector<EpisodeConfig>& cfgs) {
  OrderedJson j = OrderedJson::array();
  for (const auto& c : cfgs) j.push_back(config_to_json(c));
  return j;
}

/// Result document as written by `run` and `batch`: the result plus the
/// config that produced it, so the episode can be replayed for rendering.
inline OrderedJson result_document(const EpisodeResult& r, const EpisodeConfig& cfg) {
  OrderedJson j = result_to_json(r);
  j["config"] = config_to_json(cfg);
  return j;
}

/// Metrics plus verdict counts and mean path length.
inline OrderedJson summarize(const std::vector<EpisodeResult>& results) {
  std::vector<MetricSample> xs;
  std::map<std::string, int> verdicts{{"target", 0}, {"distractor", 0}, {"off-target", 0}, {"time-out", 0}};
  double path = 0.0;
  for (const auto& r : results) {
    xs.push_back({r.success, r.path_length, r.shortest_length});
    ++verdicts[std::string(to_string(r.verdict))];
    path += r.path_length;
  }
  OrderedJson j = metrics_to_json(compute_metrics(xs));
  j["mean_path_length"] = path / static_cast<double>(results.size());
  OrderedJson v;
  for (const char* k : {"target", "distractor", "off-target", "time-out"}) v[k] = verdicts[k];
  j["verdicts"] = std::move(v);
  return j;
}

/// Runs every episode in order. With a non-empty `out_dir`, writes
/// <id>.result.json per episode and metrics.json for the batch.
inline std::vector<EpisodeResult> run_batch(const std::vector<EpisodeConfig>& cfgs, const std::string& out_dir = "",
                                            const std::function<void(const EpisodeResult&)>& on_result = {}) {
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw IoError("cannot create output directory '" + out_dir + "'");
  }
  std::vector<EpisodeResult> out;
  out.reserve(cfgs.size());
  for (const auto& c : cfgs) {
    out.push_back(run_episode(c));
    if (!out_dir.empty()) write_text_file(out_dir + "/" + c.id + ".result.json", result_document(out.back(), c));
    if (on_result) on_result(out.back());
  }
  if (!out_dir.empty()) write_text_file(out_dir + "/metrics.json", summarize(out));
  return out;
}

/// Every *result.json under `dir` (non-recursive), in file-name order.
inline std::vector<EpisodeResult> load_results(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() >= 11 && name.ends_with("result.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EpisodeResult> out;
  for (const auto& f : files) {
    try {
      out.push_back(result_from_json(read_json_file(f.string())));
    } catch (const ParseError& e) {
      throw ParseError(f.string() + ": " + e.what());
    }
  }
  if (out.empty()) throw DomainError("no result files in '" + dir + "'");
  return out;
}

/// Generates `count` episodes with seeds seed, seed+1, ... into
/// dir/epNNNN/ and writes dir/manifest.json referencing them.
inline std::vector<EpisodeConfig> generate_suite(std::uint64_t seed, int count, const GenConfig& gen,
                                                 const std::string& dir, Profile profile = Profile::coin) {
  if (count <= 0) throw ConfigError("episode count must be positive");
  std::vector<EpisodeConfig> cfgs;
  for (int i = 0; i < count; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "ep%04d", i);
    const auto ep = generate_scene(seed + static_cast<std::uint64_t>(i), gen);
    write_generated(ep, dir + "/" + name);
    EpisodeConfig c = EpisodeConfig::with_profile(profile);
    c.id = name;
    c.scene_path = std::string(name) + "/scene.json";
    c.goal_path = std::string(name) + "/goal.json";
    c.seed = seed + static_cast<std::uint64_t>(i);
    cfgs.push_back(c);
  }
  write_text_file(dir + "/manifest.json", manifest_to_json(cfgs));
  for (auto& c : cfgs) {
    c.scene_path = dir + "/" + c.scene_path;
    c.goal_path = dir + "/" + c.goal_path;
  }
  return cfgs;
}

}  // namespace ctxnav::harness
