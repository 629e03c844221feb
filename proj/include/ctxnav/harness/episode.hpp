#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/json.hpp"
#include "ctxnav/core/rng.hpp"
#include "ctxnav/explore/frontiers.hpp"
#include "ctxnav/explore/planner.hpp"
#include "ctxnav/explore/similarity.hpp"
#include "ctxnav/explore/value_map.hpp"
#include "ctxnav/goal/caption.hpp"
#include "ctxnav/goal/goal_json.hpp"
#include "ctxnav/harness/ground_truth.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/mapping/instances.hpp"
#include "ctxnav/mapping/occupancy.hpp"
#include "ctxnav/mapping/rooms.hpp"
#include "ctxnav/mapping/walls.hpp"
#include "ctxnav/verify/extrinsic.hpp"
#include "ctxnav/verify/intrinsic.hpp"
#include "ctxnav/world/agent.hpp"
#include "ctxnav/world/oracles.hpp"
#include "ctxnav/world/scene.hpp"
#include "ctxnav/world/sensor.hpp"

namespace ctxnav::harness {

enum class Verdict { target, distractor, off_target, time_out };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::target: return "target";
    case Verdict::distractor: return "distractor";
    case Verdict::off_target: return "off-target";
    case Verdict::time_out: return "time-out";
  }
  return "time-out";
}

inline Verdict parse_verdict(std::string_view s) {
  for (Verdict v : {Verdict::target, Verdict::distractor, Verdict::off_target, Verdict::time_out}) {
    if (to_string(v) == s) return v;
  }
  throw ParseError("unknown verdict '" + std::string(s) + "'");
}

enum class Profile { coin, instancenav };

inline std::string_view to_string(Profile p) { return p == Profile::coin ? "coin" : "instancenav"; }

inline Profile parse_profile(std::string_view s) {
  if (s == "coin") return Profile::coin;
  if (s == "instancenav") return Profile::instancenav;
  throw ConfigError("unknown profile '" + std::string(s) + "' (expected coin or instancenav)");
}

struct ProfileParams {
  double success_radius;
  int max_steps;
};

inline ProfileParams profile_params(Profile p) {
  return p == Profile::coin ? ProfileParams{0.25, 500} : ProfileParams{1.0, 1000};
}

struct Ablations {
  bool value_map = false;        // nearest-frontier ranking
  bool category_verify = false;  // skip the VQA category check
  bool intrinsic = false;
  bool extrinsic = false;

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    if (value_map) out.push_back("value-map");
    if (category_verify) out.push_back("category-verify");
    if (intrinsic) out.push_back("intrinsic");
    if (extrinsic) out.push_back("extrinsic");
    return out;
  }
};

inline void enable_ablation(Ablations& a, std::string_view name) {
  if (name == "value-map") a.value_map = true;
  else if (name == "category-verify") a.category_verify = true;
  else if (name == "intrinsic") a.intrinsic = true;
  else if (name == "extrinsic") a.extrinsic = true;
  else throw ConfigError("unknown ablation '" + std::string(name) + "'");
}

struct NoiseConfig {
  world::DetectorNoise detector;
  world::VqaNoise vqa;
  double similarity_std = 0.0;
};

inline NoiseConfig load_noise(const Json& j) {
  NoiseConfig n;
  if (!j.is_object()) throw ConfigError("noise config: expected an object");
  auto num = [](const Json& o, const char* k, double def) {
    if (!o.contains(k)) return def;
    if (!o[k].is_number()) throw ConfigError(std::string("noise config: '") + k + "' must be a number");
    return o[k].get<double>();
  };
  if (j.contains("detector")) {
    const Json& d = j["detector"];
    n.detector.flip_prob = num(d, "flip_prob", 0.0);
    n.detector.confidence_min = num(d, "confidence_min", 1.0);
    n.detector.confidence_max = num(d, "confidence_max", 1.0);
    n.detector.min_pixel_fraction = num(d, "min_pixel_fraction", n.detector.min_pixel_fraction);
    if (d.contains("confusion")) {
      for (const auto& [k, v] : d["confusion"].items()) n.detector.confusion[k] = v.get<std::string>();
    }
  }
  if (j.contains("vqa")) {
    const Json& v = j["vqa"];
    n.vqa.category_blend = num(v, "category_blend", 0.0);
    n.vqa.ambiguous_mask_pixels = static_cast<std::size_t>(num(v, "ambiguous_mask_pixels", 0.0));
    n.vqa.attribute_offset_bound = static_cast<int>(num(v, "attribute_offset_bound", 0.0));
    n.vqa.unknown_prob = num(v, "unknown_prob", 0.0);
  }
  n.similarity_std = num(j, "similarity_std", 0.0);
  return n;
}

inline OrderedJson noise_to_json(const NoiseConfig& n) {
  OrderedJson conf = OrderedJson::object();
  for (const auto& [k, v] : n.detector.confusion) conf[k] = v;
  OrderedJson j;
  j["detector"] = {{"flip_prob", n.detector.flip_prob},
                   {"confidence_min", n.detector.confidence_min},
                   {"confidence_max", n.detector.confidence_max},
                   {"min_pixel_fraction", n.detector.min_pixel_fraction},
                   {"confusion", conf}};
  j["vqa"] = {{"category_blend", n.vqa.category_blend},
              {"ambiguous_mask_pixels", n.vqa.ambiguous_mask_pixels},
              {"attribute_offset_bound", n.vqa.attribute_offset_bound},
              {"unknown_prob", n.vqa.unknown_prob}};
  j["similarity_std"] = n.similarity_std;
  return j;
}

/// Agent tunables that are not part of the command-line surface.
struct PipelineConfig {
  world::AgentConfig agent;
  world::SensorConfig sensor;
  double detect_min = 0.45;
  double coco_min = 0.8;
  double vqa_min = 0.6;
  mapping::AssociationConfig association;
  mapping::WallGate wall_gate;
  mapping::RansacConfig ransac;
  mapping::RoomConfig rooms;
  explore::SimilarityConfig similarity;
  explore::PlannerConfig planner;
  verify::Tolerances tolerances;
  verify::RoomFilterConfig room_filter;
  int initial_spin = 12;
  int requery_window = 5;
  /// Steps between frontier re-ranking while a waypoint is being followed.
  int reselect_every = 12;
  /// Steps without getting closer to a waypoint before it is abandoned.
  int stall_steps = 15;
  double blacklist_radius = 0.5;
  std::size_t min_frontier = 5;
  double frontier_reach = 0.3;
  /// Pending candidates are re-checked against the map at this period.
  int extrinsic_every = 3;
  /// Lattice search used for the final approach.
  int approach_depth = 40;
  std::size_t approach_nodes = 40000;
  int approach_patience = 30;
  /// Steps without getting closer before an approach is abandoned.
  int approach_stall = 60;
};

struct EpisodeConfig {
  std::string id;
  std::string scene_path;
  std::string goal_path;
  std::string caption;
  Profile profile = Profile::coin;
  int max_steps = 500;
  double success_radius = 0.25;
  std::uint64_t seed = 0;
  NoiseConfig noise;
  Ablations ablate;
  PipelineConfig pipeline;

  static EpisodeConfig with_profile(Profile p) {
    EpisodeConfig c;
    c.profile = p;
    c.success_radius = profile_params(p).success_radius;
    c.max_steps = profile_params(p).max_steps;
    return c;
  }
};

inline void validate_config(const EpisodeConfig& c) {
  if (c.max_steps <= 0) throw ConfigError("max_steps must be positive");
  if (!(c.success_radius > 0.0)) throw ConfigError("success_radius must be positive");
}

inline OrderedJson config_to_json(const EpisodeConfig& c) {
  OrderedJson j;
  j["id"] = c.id;
  j["scene"] = c.scene_path;
  if (!c.goal_path.empty()) j["goal"] = c.goal_path;
  if (!c.caption.empty()) j["caption"] = c.caption;
  j["profile"] = to_string(c.profile);
  j["max_steps"] = c.max_steps;
  j["success_radius"] = c.success_radius;
  j["seed"] = c.seed;
  j["noise"] = noise_to_json(c.noise);
  j["ablate"] = c.ablate.names();
  return j;
}

/// One manifest entry. Relative paths (scene, goal, noise file) resolve
/// against `base_dir`; max_steps and success_radius default to the profile.
inline EpisodeConfig config_from_json(const Json& j, const std::string& base_dir = "") {
  if (!j.is_object()) throw ConfigError("episode config: expected an object");
  auto path = [&](const std::string& p) {
    if (p.empty() || base_dir.empty() || p.front() == '/') return p;
    return base_dir + "/" + p;
  };
  auto str = [&](const char* k) -> std::string {
    if (!j.contains(k)) return "";
    if (!j[k].is_string()) throw ConfigError(std::string("episode config: '") + k + "' must be a string");
    return j[k].get<std::string>();
  };
  EpisodeConfig c = EpisodeConfig::with_profile(j.contains("profile") ? parse_profile(str("profile")) : Profile::coin);
  c.id = str("id");
  c.scene_path = path(str("scene"));
  c.goal_path = path(str("goal"));
  c.caption = str("caption");
  if (c.scene_path.empty()) throw ConfigError("episode config: 'scene' is required");
  if (j.contains("max_steps")) {
    if (!j["max_steps"].is_number_integer()) throw ConfigError("episode config: 'max_steps' must be an integer");
    c.max_steps = j["max_steps"].get<int>();
  }
  if (j.contains("success_radius")) {
    if (!j["success_radius"].is_number()) throw ConfigError("episode config: 'success_radius' must be a number");
    c.success_radius = j["success_radius"].get<double>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("episode config: 'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("noise")) {
    const Json& n = j["noise"];
    if (n.is_string()) {
      try {
        c.noise = load_noise(read_json_file(path(n.get<std::string>())));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    } else {
      c.noise = load_noise(n);
    }
  }
  if (j.contains("ablate")) {
    if (!j["ablate"].is_array()) throw ConfigError("episode config: 'ablate' must be an array");
    for (const auto& a : j["ablate"]) {
      if (!a.is_string()) throw ConfigError("episode config: ablation names must be strings");
      enable_ablation(c.ablate, a.get<std::string>());
    }
  }
  validate_config(c);
  return c;
}

struct EpisodeResult {
  std::string id;
  bool success = false;
  int steps = 0;
  int forward_actions = 0;
  double path_length = 0.0;
  double shortest_length = 0.0;
  Verdict verdict = Verdict::time_out;
  std::string goal_instance;
  /// Target-category instance nearest to the stop position, if within the
  /// success radius.
  std::string stopped_at;
  std::vector<world::Pose2> trajectory;
  std::vector<verify::VerificationTrace> trace;
  std::uint64_t seed = 0;
  std::string profile;
  std::vector<std::string> ablations;
};

inline OrderedJson result_to_json(const EpisodeResult& r, bool with_trajectory = true) {
  OrderedJson j;
  j["id"] = r.id;
  j["success"] = r.success ? 1 : 0;
  j["steps"] = r.steps;
  j["forward_actions"] = r.forward_actions;
  j["path_length"] = r.path_length;
  j["shortest_length"] = r.shortest_length;
  j["verdict"] = to_string(r.verdict);
  j["goal_instance"] = r.goal_instance;
  j["stopped_at"] = r.stopped_at;
  j["seed"] = r.seed;
  j["profile"] = r.profile;
  j["ablations"] = r.ablations;
  if (with_trajectory) {
    OrderedJson traj = OrderedJson::array();
    for (const auto& p : r.trajectory) traj.push_back({p.position.x, p.position.y, p.heading});
    j["trajectory"] = std::move(traj);
  }
  OrderedJson tr = OrderedJson::array();
  for (const auto& t : r.trace) tr.push_back(verify::trace_to_json(t));
  j["trace"] = std::move(tr);
  return j;
}

/// Reads the fields needed for metrics and rendering back from a result file.
inline EpisodeResult result_from_json(const Json& j) {
  EpisodeResult r;
  const std::string where = "result";
  r.id = j.value("id", "");
  r.success = ctxnav::detail::require_number(j, "success", where) != 0.0;
  r.steps = static_cast<int>(ctxnav::detail::require_number(j, "steps", where));
  r.forward_actions = j.value("forward_actions", 0);
  r.path_length = ctxnav::detail::require_number(j, "path_length", where);
  r.shortest_length = ctxnav::detail::require_number(j, "shortest_length", where);
  r.verdict = parse_verdict(ctxnav::detail::require_string(j, "verdict", where));
  r.goal_instance = j.value("goal_instance", "");
  r.stopped_at = j.value("stopped_at", "");
  r.seed = j.value("seed", std::uint64_t{0});
  r.profile = j.value("profile", "");
  if (j.contains("trajectory")) {
    for (const auto& p : j["trajectory"]) r.trajectory.push_back({{p.at(0).get<double>(), p.at(1).get<double>()}, p.at(2).get<double>()});
  }
  return r;
}

/// Final map state of an episode, for rendering.
struct EpisodeArtifacts {
  mapping::GridStack grid;
  std::vector<mapping::InstanceRecord> instances;
  std::optional<Vec2> stop_position;
};

/// The navigation policy. It sees the world only through rendered depth and
/// the oracle stand-ins for detector, VQA model and text-image similarity;
/// the scene reference is handed to those oracles and nowhere else.
class Navigator {
 public:
  Navigator(const world::Scene& scene, const goal::GoalSpec& goal, const EpisodeConfig& cfg)
      : scene_(scene),
        goal_(goal),
        cfg_(cfg),
        p_(cfg.pipeline),
        store_(cfg.pipeline.association),
        rng_(cfg.seed),
        rng_detect_(rng_.fork(1)),
        rng_vqa_(rng_.fork(2)),
        rng_assoc_(rng_.fork(3)),
        rng_ransac_(rng_.fork(4)),
        rng_sim_(rng_.fork(5)) {
    grid_ = mapping::GridStack::covering(scene.spawn.position - Vec2{6.0, 6.0}, scene.spawn.position + Vec2{6.0, 6.0});
    spin_left_ = p_.initial_spin;
  }

  const mapping::GridStack& grid() const { return grid_; }
  const mapping::InstanceStore& store() const { return store_; }
  const std::vector<verify::VerificationTrace>& trace() const { return trace_; }

  /// Sensing and map update for the current pose, then candidate bookkeeping.
  void perceive(const world::AgentState& s, const world::DepthImage& depth) {
    step_ = s.step_count;
    mapping::integrate_depth(grid_, depth);
    mapping::mark_disc_free(grid_, s.position, p_.agent.radius);

    seen_.clear();
    for (auto& det : world::oracle_detect(scene_, depth, cfg_.noise.detector, rng_detect_)) {
      if (det.confidence < p_.detect_min) continue;
      const bool coco_ok = det.is_coco && det.confidence >= p_.coco_min;
      if (!coco_ok && !cfg_.ablate.category_verify) {
        const double pc = world::oracle_vqa_category(scene_, det.instance_id, det.proposed_category, cfg_.noise.vqa,
                                                     det.mask.size());
        if (pc < p_.vqa_min) continue;
      }
      std::vector<Vec3> pts;
      pts.reserve(det.mask.size());
      for (int px : det.mask) pts.push_back(depth.back_project(px % depth.width, px / depth.width));
      const auto a = store_.associate(pts, det.proposed_category, &rng_assoc_, det.instance_id);
      auto& slot = seen_[a.id];
      if (det.mask.size() > slot.pixels) slot = {det.instance_id, det.mask.size()};
      frame_source_[{a.id, step_}] = det.instance_id;
    }

    const auto wall_pts = mapping::wall_candidate_points(depth, p_.wall_gate);
    if (wall_pts.size() >= p_.ransac.min_inliers) {
      mapping::rasterize_walls(mapping::extract_wall_planes(wall_pts, p_.ransac, rng_ransac_), grid_);
    }

    if (!cfg_.ablate.value_map) {
      explore::SimilarityConfig sc = p_.similarity;
      sc.noise_std = cfg_.noise.similarity_std;
      const auto sim = explore::oracle_similarity(scene_, depth, goal_, sc, &rng_sim_);
      explore::update_value_map(grid_, sim, depth);
    }

    frontiers_valid_ = false;
    rooms_of_valid_ = false;
    update_candidates();
  }

  world::Action decide(const world::AgentState& s) {
    if (approach_id_) {
      if (auto a = approach_step(s)) return *a;
    }
    if (spin_left_ > 0) {
      --spin_left_;
      return world::Action::turn_left;
    }
    return explore_step(s);
  }

  /// Bump handling: a refused forward move marks the cells ahead occupied.
  void after_step(const world::AgentState& prev, world::Action a, const world::AgentState& now) {
    if (a != world::Action::forward || !now.last_blocked) return;
    for (double off : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
      const Vec2 q = prev.position + unit_from_angle(prev.heading + off) * (p_.agent.radius + 0.04);
      grid_.ensure_contains(q, q);
      grid_.mark_occupied(grid_.cell_of(q));
    }
    grid_.rooms_dirty = true;
    approach_plan_.clear();
    waypoint_.reset();
  }

  std::optional<int> confirmed_record() const { return approach_id_; }

 private:
  struct Seen {
    std::string source;
    std::size_t pixels = 0;
  };

  enum class Phase { intrinsic, extrinsic, confirmed, rejected };

  struct Candidate {
    int record = -1;
    Phase phase = Phase::intrinsic;
    verify::IntrinsicCheck check;
    int last_eval = -1000;
  };

  const world::Scene& scene_;
  const goal::GoalSpec& goal_;
  const EpisodeConfig& cfg_;
  const PipelineConfig& p_;

  mapping::GridStack grid_;
  mapping::InstanceStore store_;
  Rng rng_, rng_detect_, rng_vqa_, rng_assoc_, rng_ransac_, rng_sim_;
  int step_ = 0;
  int spin_left_ = 0;

  std::map<int, Seen> seen_;
  std::map<std::pair<int, int>, std::string> frame_source_;
  std::map<int, Candidate> candidates_;
  std::vector<verify::VerificationTrace> trace_;

  std::vector<explore::Frontier> frontiers_;
  bool frontiers_valid_ = false;
  std::vector<int> rooms_of_;
  bool rooms_of_valid_ = false;

  explore::ExplorationState xs_;
  std::optional<Vec2> waypoint_;
  std::optional<Vec2> last_waypoint_;
  int waypoint_since_ = 0;
  double waypoint_best_ = std::numeric_limits<double>::infinity();
  int waypoint_best_step_ = 0;
  std::vector<Vec2> blacklist_;
  int blacklist_resets_ = 0;

  std::optional<int> approach_id_;
  std::deque<world::Action> approach_plan_;
  int approach_failures_ = 0;
  double approach_best_ = std::numeric_limits<double>::infinity();
  int approach_best_step_ = 0;
  std::vector<int> retry_;
  std::set<int> retried_;

  // ---- maps -----------------------------------------------------------

  void ensure_rooms() {
    if (grid_.rooms_dirty) {
      mapping::segment_rooms(grid_, p_.rooms);
      frontiers_valid_ = false;
      rooms_of_valid_ = false;
    }
  }

  const std::vector<int>& rooms_of() {
    ensure_rooms();
    if (!rooms_of_valid_) {
      rooms_of_.clear();
      for (const auto& r : store_.records()) rooms_of_.push_back(mapping::instance_room(grid_, r));
      rooms_of_valid_ = true;
    }
    return rooms_of_;
  }

  bool blacklisted(Vec2 p) const {
    for (const Vec2& b : blacklist_) {
      if (distance(b, p) < p_.blacklist_radius) return true;
    }
    return false;
  }

  const std::vector<explore::Frontier>& frontiers() {
    ensure_rooms();
    if (!frontiers_valid_) {
      frontiers_.clear();
      for (auto& f : explore::extract_frontiers(grid_, p_.min_frontier)) {
        if (!blacklisted(f.position(grid_))) frontiers_.push_back(std::move(f));
      }
      frontiers_valid_ = true;
    }
    return frontiers_;
  }

  bool room_has_frontier(int room) {
    for (const auto& f : frontiers()) {
      if (f.room == room) return true;
    }
    return false;
  }

  // ---- verification ---------------------------------------------------

  verify::AttributeOracle attribute_oracle(int record) {
    return [this, record](const goal::AttributeQuestion& q, const verify::FrameObservation& f) {
      auto it = frame_source_.find({record, f.step});
      const std::string& src = it != frame_source_.end() ? it->second : store_.at(record).source_id;
      return world::oracle_vqa_attribute(scene_, src, q, cfg_.noise.vqa, rng_vqa_);
    };
  }

  verify::VerificationTrace new_trace(int record) {
    verify::VerificationTrace t;
    t.candidate = record;
    t.step = step_;
    if (auto it = candidates_.find(record); it != candidates_.end()) {
      t.intrinsic_bins = it->second.check.verdict().bins;
      t.intrinsic_outcome = std::string(verify::to_string(it->second.check.verdict().outcome));
    }
    return t;
  }

  void reject(Candidate& c, const std::string& reason, const verify::RoomFilterResult* rf = nullptr,
              const verify::ExtrinsicResult* ext = nullptr) {
    c.phase = Phase::rejected;
    if (auto* r = store_.find(c.record)) r->state = mapping::VerifyState::rejected;
    auto t = new_trace(c.record);
    if (rf) {
      for (const auto* r : rf->contexts) t.contexts.push_back(r->id);
      t.effective_relations = rf->effective.size();
    }
    if (ext) t.n_viewpoints = ext->n_viewpoints;
    t.decision = "rejected";
    t.reason = reason;
    trace_.push_back(std::move(t));
  }

  void confirm(Candidate& c, const verify::RoomFilterResult* rf, const verify::ExtrinsicResult* ext,
               const std::string& reason) {
    c.phase = Phase::confirmed;
    if (auto* r = store_.find(c.record)) r->state = mapping::VerifyState::confirmed;
    auto t = new_trace(c.record);
    if (rf) {
      for (const auto* r : rf->contexts) t.contexts.push_back(r->id);
      t.effective_relations = rf->effective.size();
    }
    if (ext) {
      t.n_viewpoints = ext->n_viewpoints;
      t.viewpoint = ext->viewpoint;
    }
    t.decision = "confirmed";
    t.reason = reason;
    trace_.push_back(std::move(t));
    if (!approach_id_) {
      approach_id_ = c.record;
      approach_best_ = std::numeric_limits<double>::infinity();
      approach_best_step_ = step_;
      waypoint_.reset();
    }
  }

  void after_intrinsic(Candidate& c, const verify::IntrinsicVerdict& v) {
    if (v.accepted()) {
      c.phase = Phase::extrinsic;
      if (auto* r = store_.find(c.record)) r->state = mapping::VerifyState::category_verified;
      evaluate_extrinsic(c);
    } else if (v.rejected()) {
      reject(c, v.reason);
    }
  }

  void update_candidates() {
    for (const auto& [rid, seen] : seen_) {
      const auto* rec = store_.find(rid);
      if (!rec || rec->category != goal_.target_category || rec->state == mapping::VerifyState::rejected) continue;
      const verify::FrameObservation frame{step_, static_cast<double>(seen.pixels), seen.pixels};
      auto it = candidates_.find(rid);
      if (it == candidates_.end()) {
        it = candidates_.emplace(rid, Candidate{rid, Phase::intrinsic, verify::IntrinsicCheck(goal_, p_.requery_window)})
                 .first;
        Candidate& c = it->second;
        if (cfg_.ablate.intrinsic) {
          c.phase = Phase::extrinsic;
          store_.find(rid)->state = mapping::VerifyState::category_verified;
          evaluate_extrinsic(c);
        } else {
          after_intrinsic(c, c.check.begin(attribute_oracle(rid), frame));
        }
      } else if (it->second.phase == Phase::intrinsic) {
        it->second.check.observe(frame);
      }
    }
    for (auto& [rid, c] : candidates_) {
      if (c.phase == Phase::intrinsic) {
        after_intrinsic(c, c.check.tick(attribute_oracle(rid), step_));
      } else if (c.phase == Phase::extrinsic && step_ - c.last_eval >= p_.extrinsic_every) {
        evaluate_extrinsic(c);
      }
    }
  }

  /// Confirms on the full relation set as soon as it holds; a candidate whose
  /// room is fully explored is decided on whatever relations are effective.
  void evaluate_extrinsic(Candidate& c) {
    c.last_eval = step_;
    const auto* rec = store_.find(c.record);
    if (!rec) return;
    if (cfg_.ablate.extrinsic) {
      confirm(c, nullptr, nullptr, "extrinsic check disabled");
      return;
    }
    const auto& rooms = rooms_of();
    const auto rf = verify::room_filter(*rec, store_.records(), grid_, goal_, p_.room_filter, &rooms);
    if (rf.status == verify::FilterStatus::defer) return;
    const bool room_done = !room_has_frontier(rf.target_room);
    if (rf.status == verify::FilterStatus::ok && (rf.complete() || room_done)) {
      if (!rf.complete() && rf.effective.empty()) {
        reject(c, "no relation has a surviving context instance", &rf);
        return;
      }
      const auto ext = verify::verify_extrinsic(*rec, rf, grid_, goal_, p_.tolerances);
      if (ext.confirmed) {
        confirm(c, &rf, &ext, ext.reason);
      } else if (room_done) {
        reject(c, ext.reason, &rf, &ext);
      }
      return;
    }
    if (room_done) reject(c, rf.reason.empty() ? "room explored without the required context" : rf.reason, &rf);
  }

  // ---- exploration ----------------------------------------------------

  explore::PlannerConfig frontier_planner() const {
    auto pc = p_.planner;
    pc.goal_radius = p_.frontier_reach;
    pc.arrive_radius = p_.frontier_reach + 0.05;
    return pc;
  }

  bool select_waypoint(const world::AgentState& s) {
    waypoint_.reset();
    for (int round = 0; round < 2; ++round) {
      const auto& fs = frontiers();
      auto ranked = explore::rank_frontiers(fs, grid_, s.position,
                                            cfg_.ablate.value_map ? explore::RankMode::nearest : explore::RankMode::value);
      if (ranked) {
        std::vector<explore::Frontier> order;
        const auto ov = explore::apply_room_override(xs_, grid_, store_.records(), rooms_of(), goal_, *ranked, s.position);
        if (ov.overridden) order.push_back(ov.frontier);
        order.insert(order.end(), ranked->begin(), ranked->end());
        int tries = 0;
        for (const auto& f : order) {
          if (++tries > 8) break;
          const Vec2 pos = f.position(grid_);
          if (blacklisted(pos)) continue;
          if (distance(pos, s.position) <= p_.frontier_reach + 0.05) {
            blacklist_.push_back(pos);
            continue;
          }
          if (explore::plan_path(grid_, s.position, pos, frontier_planner()).empty()) {
            blacklist_.push_back(pos);
            continue;
          }
          // Re-selecting (nearly) the same frontier keeps its stall clock.
          const bool same = last_waypoint_ && distance(*last_waypoint_, pos) < p_.blacklist_radius;
          waypoint_ = pos;
          last_waypoint_ = pos;
          waypoint_since_ = step_;
          if (!same) {
            waypoint_best_ = distance(s.position, pos);
            waypoint_best_step_ = step_;
          }
          frontiers_valid_ = false;
          return true;
        }
        frontiers_valid_ = false;
        if (tries > 8) return false;
      }
      // Nothing reachable left: give abandoned frontiers another chance.
      if (blacklist_.empty() || blacklist_resets_ >= 3) return false;
      blacklist_.clear();
      ++blacklist_resets_;
      frontiers_valid_ = false;
    }
    return false;
  }

  world::Action explore_step(const world::AgentState& s) {
    if (waypoint_) {
      const double d = distance(s.position, *waypoint_);
      if (d < waypoint_best_ - 0.05) {
        waypoint_best_ = d;
        waypoint_best_step_ = step_;
      }
      if (step_ - waypoint_best_step_ > p_.stall_steps) {
        blacklist_.push_back(*waypoint_);
        waypoint_.reset();
        frontiers_valid_ = false;
      } else if (step_ - waypoint_since_ >= p_.reselect_every) {
        waypoint_.reset();
      }
    }
    for (int attempt = 0; attempt < 3; ++attempt) {
      if (!waypoint_ && !select_waypoint(s)) break;
      const auto plan = explore::plan_local(grid_, s, *waypoint_, frontier_planner());
      if (plan.status == explore::PlanStatus::moving) return plan.action;
      if (plan.status == explore::PlanStatus::unreachable) blacklist_.push_back(*waypoint_);
      waypoint_.reset();
      frontiers_valid_ = false;
    }
    // Exploration exhausted (or momentarily stuck). A confirmed instance
    // that could not be reached gets one more try from here.
    if (!retry_.empty()) {
      const int id = retry_.front();
      retry_.erase(retry_.begin());
      retried_.insert(id);
      if (auto* r = store_.find(id)) r->state = mapping::VerifyState::confirmed;
      if (auto it = candidates_.find(id); it != candidates_.end()) it->second.phase = Phase::confirmed;
      approach_id_ = id;
      approach_best_ = std::numeric_limits<double>::infinity();
      approach_best_step_ = step_;
      approach_failures_ = 0;
    }
    return world::Action::turn_left;
  }

  // ---- final approach -------------------------------------------------

  std::vector<Vec2> target_points(const mapping::InstanceRecord& r) const {
    std::vector<Vec2> out;
    std::unordered_set<std::uint64_t> seen;
    for (const auto& p : r.points) {
      const auto kx = static_cast<std::int64_t>(std::floor(p.x / 0.02));
      const auto ky = static_cast<std::int64_t>(std::floor(p.y / 0.02));
      const std::uint64_t key = (static_cast<std::uint64_t>(kx) << 32) ^ static_cast<std::uint32_t>(ky);
      if (seen.insert(key).second) out.push_back(p.ground());
    }
    return out;
  }

  static double nearest(const std::vector<Vec2>& pts, Vec2 q) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& p : pts) {
      const double dx = p.x - q.x, dy = p.y - q.y;
      best = std::min(best, dx * dx + dy * dy);
    }
    return std::sqrt(best);
  }

  /// Drops the instance being approached and goes back to exploring.
  void give_up_approach() {
    if (auto it = candidates_.find(*approach_id_); it != candidates_.end()) reject(it->second, "approach failed");
    if (!retried_.count(*approach_id_)) retry_.push_back(*approach_id_);
    approach_id_.reset();
    approach_plan_.clear();
    approach_failures_ = 0;
  }

  std::optional<world::Action> approach_step(const world::AgentState& s) {
    const auto* rec = store_.find(*approach_id_);
    if (!rec) {
      approach_id_.reset();
      return std::nullopt;
    }
    const auto pts = target_points(*rec);
    const double lo = p_.agent.radius + 0.012;
    const double hi = cfg_.success_radius - 0.015;
    const double d = nearest(pts, s.position);
    if (d <= hi) return world::Action::stop;
    if (d < approach_best_ - 0.05) {
      approach_best_ = d;
      approach_best_step_ = step_;
    } else if (step_ - approach_best_step_ > p_.approach_stall) {
      give_up_approach();
      return std::nullopt;
    }

    if (!approach_plan_.empty()) {
      const auto a = approach_plan_.front();
      approach_plan_.pop_front();
      return a;
    }
    if (d <= 1.6 && plan_lattice(s, pts, lo, hi)) {
      const auto a = approach_plan_.front();
      approach_plan_.pop_front();
      return a;
    }
    // Get closer through the map first, to a free cell near the object with
    // no wall in between (the object may hang on the far side of a wall).
    const auto goal = approach_goal(s, *rec, pts, std::max(hi, 0.45));
    explore::PlanResult plan;
    if (goal) {
      auto pc = p_.planner;
      pc.goal_radius = 0.05;
      pc.arrive_radius = 0.1;
      plan = explore::plan_local(grid_, s, *goal, pc);
    }
    if (plan.status == explore::PlanStatus::moving) {
      approach_failures_ = 0;
      return plan.action;
    }
    if (++approach_failures_ > p_.approach_patience) give_up_approach();
    // No way there on the current map: explore a little more.
    return std::nullopt;
  }

  /// End of the cheapest path to a cell within `band` of a target point on
  /// the object's side of any wall: a cell of the object's room, or an
  /// unlabeled one in line of sight.
  std::optional<Vec2> approach_goal(const world::AgentState& s, const mapping::InstanceRecord& rec,
                                    const std::vector<Vec2>& pts, double band) {
    ensure_rooms();
    const int room = mapping::instance_room(grid_, rec);
    Vec2 lo = pts.front(), hi = lo;
    for (const Vec2& p : pts) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const Vec2 pad{band, band};
    grid_.ensure_contains(lo - pad, hi + pad);
    const mapping::Cell a = grid_.cell_of(lo - pad), b = grid_.cell_of(hi + pad);
    std::unordered_set<std::size_t> goals;
    for (int y = a.y; y <= b.y; ++y) {
      for (int x = a.x; x <= b.x; ++x) {
        const mapping::Cell c{x, y};
        if (!grid_.in_bounds(c) || grid_.occupancy[grid_.index(c)] == mapping::Occupancy::occupied) continue;
        const int label = grid_.region[grid_.index(c)];
        if (label != mapping::kNoRoom && label != room) continue;
        const Vec2 q = grid_.center_of(c);
        for (const Vec2& p : pts) {
          if (distance(p, q) <= band && (label != mapping::kNoRoom || mapping::line_of_sight(grid_, q, p))) {
            goals.insert(grid_.index(c));
            break;
          }
        }
      }
    }
    if (goals.empty()) return std::nullopt;
    const auto path = explore::plan_path_to(
        grid_, s.position, [&](mapping::Cell c) { return goals.count(grid_.index(c)) > 0; },
        [&](mapping::Cell c) {
          const Vec2 q = grid_.center_of(c);
          const double dx = std::max({lo.x - q.x, 0.0, q.x - hi.x});
          const double dy = std::max({lo.y - q.y, 0.0, q.y - hi.y});
          return std::max(0.0, std::hypot(dx, dy) - band);
        },
        p_.planner);
    if (path.empty()) return std::nullopt;
    return grid_.center_of(path.back());
  }

  /// Search over the discrete pose lattice reachable from the current pose
  /// for a short action sequence ending inside the success band
  /// [lo, hi] around the target points. Collisions are checked against
  /// occupied cell centers and the target points themselves; a bump just
  /// costs a step and updates the map.
  bool plan_lattice(const world::AgentState& s, const std::vector<Vec2>& pts, double lo, double hi) {
    approach_plan_.clear();
    const double res = grid_.resolution();
    std::unordered_set<std::size_t> target_cells;
    for (const Vec2& p : pts) {
      if (grid_.in_bounds(p)) target_cells.insert(grid_.index(grid_.cell_of(p)));
    }
    const double r_agent = p_.agent.radius;
    auto blocked = [&](Vec2 q) {
      const mapping::Cell c = grid_.cell_of(q);
      const int k = static_cast<int>(std::ceil(r_agent / res)) + 1;
      for (int dy = -k; dy <= k; ++dy) {
        for (int dx = -k; dx <= k; ++dx) {
          const mapping::Cell n{c.x + dx, c.y + dy};
          if (!grid_.in_bounds(n)) return true;
          const std::size_t i = grid_.index(n);
          if (grid_.occupancy[i] != mapping::Occupancy::occupied || target_cells.count(i)) continue;
          if (distance(grid_.center_of(n), q) < r_agent) return true;
        }
      }
      return false;
    };

    const int n_head = std::max(1, static_cast<int>(std::lround(2.0 * kPi / p_.agent.turn_angle)));
    struct Node {
      Vec2 p;
      int h;
      int parent;
      world::Action a;
      int depth;
    };
    // Best-first over (position, heading) with an admissible forward-count
    // heuristic; turns cost one step like moves.
    auto h_cost = [&](Vec2 p) { return std::max(0.0, nearest(pts, p) - hi) / p_.agent.forward_step; };
    std::vector<Node> nodes{{s.position, 0, -1, world::Action::stop, 0}};
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    open.push({h_cost(s.position), 0});
    std::unordered_set<std::uint64_t> seen;
    auto key = [&](Vec2 p, int h) {
      const auto kx = static_cast<std::int64_t>(std::lround(p.x / 0.01)) & 0xFFFFFF;
      const auto ky = static_cast<std::int64_t>(std::lround(p.y / 0.01)) & 0xFFFFFF;
      return (static_cast<std::uint64_t>(kx) << 32) | (static_cast<std::uint64_t>(ky) << 8) | static_cast<std::uint64_t>(h);
    };
    seen.insert(key(s.position, 0));
    int found = -1;
    while (!open.empty() && nodes.size() < p_.approach_nodes && found < 0) {
      const int cur_idx = open.top().second;
      open.pop();
      const Node cur = nodes[static_cast<std::size_t>(cur_idx)];
      if (cur.depth >= p_.approach_depth) continue;
      for (world::Action a : {world::Action::forward, world::Action::turn_left, world::Action::turn_right}) {
        Node nx{cur.p, cur.h, cur_idx, a, cur.depth + 1};
        if (a == world::Action::forward) {
          const Vec2 dir = unit_from_angle(s.heading + cur.h * p_.agent.turn_angle);
          bool ok = true;
          for (double t : {0.25, 0.5, 0.75, 1.0}) {
            const Vec2 q = cur.p + dir * (p_.agent.forward_step * t);
            if (blocked(q) || nearest(pts, q) < lo) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          nx.p = cur.p + dir * p_.agent.forward_step;
        } else {
          nx.h = ((cur.h + (a == world::Action::turn_left ? 1 : -1)) % n_head + n_head) % n_head;
        }
        if (!seen.insert(key(nx.p, nx.h)).second) continue;
        nodes.push_back(nx);
        const int idx = static_cast<int>(nodes.size()) - 1;
        if (a == world::Action::forward && nearest(pts, nx.p) <= hi) {
          found = idx;
          break;
        }
        open.push({nx.depth + h_cost(nx.p), idx});
      }
    }
    if (found < 0) return false;
    for (int i = found; nodes[static_cast<std::size_t>(i)].parent >= 0; i = nodes[static_cast<std::size_t>(i)].parent) {
      approach_plan_.push_front(nodes[static_cast<std::size_t>(i)].a);
    }
    return !approach_plan_.empty();
  }
};

/// Id of the goal instance: the one named by the goal, else the unique
/// target-category instance passing ground-truth verification.
inline std::string resolve_goal_instance(const world::Scene& scene, const goal::GoalSpec& goal,
                                         const std::optional<std::string>& named) {
  if (named) {
    if (!scene.find(*named)) throw ConfigError("goal instance '" + *named + "' not in scene");
    return *named;
  }
  const auto ids = gt_matching_instances(scene, goal);
  if (ids.size() != 1) {
    throw ConfigError("goal does not single out one instance (" + std::to_string(ids.size()) + " match); add instance_id");
  }
  return ids.front();
}

inline EpisodeResult run_episode(const world::Scene& scene, const goal::GoalSpec& goal, const std::string& goal_instance,
                                 const EpisodeConfig& cfg, EpisodeArtifacts* artifacts = nullptr) {
  validate_config(cfg);
  const auto& gi = scene.at(goal_instance);
  const auto& pc = cfg.pipeline;

  EpisodeResult res;
  res.id = cfg.id;
  res.goal_instance = goal_instance;
  res.seed = cfg.seed;
  res.profile = std::string(to_string(cfg.profile));
  res.ablations = cfg.ablate.names();
  const auto ell = gt_shortest_path(scene, scene.spawn.position, gi.footprint, cfg.success_radius, pc.agent.radius);
  res.shortest_length = std::max(ell ? *ell : gi.footprint.distance_to(scene.spawn.position), 1e-6);

  world::AgentState state = world::AgentState::at(scene.spawn);
  res.trajectory.push_back(state.pose());
  Navigator nav(scene, goal, cfg);
  while (state.step_count < cfg.max_steps && !state.stopped) {
    const auto depth = world::render_depth(scene, state, pc.sensor);
    nav.perceive(state, depth);
    const world::Action a = nav.decide(state);
    const world::AgentState prev = state;
    state = world::step_agent(scene, state, a, pc.agent);
    nav.after_step(prev, a, state);
    if (a == world::Action::forward) ++res.forward_actions;
    res.trajectory.push_back(state.pose());
  }

  res.steps = state.step_count;
  res.path_length = state.path_length;
  res.trace = nav.trace();
  if (!state.stopped) {
    res.verdict = Verdict::time_out;
  } else {
    res.success = gi.footprint.distance_to(state.position) <= cfg.success_radius;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& inst : scene.instances) {
      if (inst.category != gi.category) continue;
      const double d = inst.footprint.distance_to(state.position);
      if (d <= cfg.success_radius && d < best) {
        best = d;
        res.stopped_at = inst.id;
      }
    }
    if (res.success) {
      res.verdict = Verdict::target;
      res.stopped_at = goal_instance;
    } else {
      res.verdict = res.stopped_at.empty() ? Verdict::off_target : Verdict::distractor;
    }
  }
  if (artifacts) {
    artifacts->grid = nav.grid();
    artifacts->instances = nav.store().records();
    if (state.stopped) artifacts->stop_position = state.position;
  }
  return res;
}

struct LoadedEpisode {
  world::Scene scene;
  goal::GoalSpec goal;
  std::string goal_instance;
};

/// Loads and checks everything an episode needs; any failure is a
/// configuration error raised before stepping.
inline LoadedEpisode load_episode(const EpisodeConfig& cfg) {
  validate_config(cfg);
  LoadedEpisode ep;
  std::optional<std::string> named;
  try {
    ep.scene = world::load_scene_file(cfg.scene_path);
    if (!cfg.goal_path.empty()) {
      const Json doc = read_json_file(cfg.goal_path);
      ep.goal = goal::ingest_goal_json(doc);
      if (doc.contains("instance_id") && doc["instance_id"].is_string()) named = doc["instance_id"].get<std::string>();
    } else if (!cfg.caption.empty()) {
      ep.goal = goal::parse_caption(cfg.caption);
    } else {
      throw ConfigError("either a goal file or a caption is required");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  ep.goal_instance = resolve_goal_instance(ep.scene, ep.goal, named);
  return ep;
}

inline EpisodeResult run_episode(const EpisodeConfig& cfg, EpisodeArtifacts* artifacts = nullptr) {
  const auto ep = load_episode(cfg);
  return run_episode(ep.scene, ep.goal, ep.goal_instance, cfg, artifacts);
}

}  // namespace ctxnav::harness
