#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxnav/core/json.hpp"
#include "ctxnav/goal/types.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/mapping/instances.hpp"
#include "ctxnav/mapping/rooms.hpp"
#include "ctxnav/verify/intrinsic.hpp"
#include "ctxnav/verify/relations.hpp"

namespace ctxnav::verify {

using mapping::GridStack;
using mapping::InstanceRecord;

struct RoomFilterConfig {
  double max_geodesic = 3.0;
  /// Instance centers usually sit inside furniture; they are snapped to the
  /// nearest free cell within this distance.
  double max_snap = 1.5;
};

enum class FilterStatus { ok, reject, defer };

inline std::string_view to_string(FilterStatus s) {
  switch (s) {
    case FilterStatus::ok: return "ok";
    case FilterStatus::reject: return "reject";
    case FilterStatus::defer: return "defer";
  }
  return "defer";
}

/// Which endpoint of a triple the candidate fills: the target slot when its
/// category matches, else the reference slot, else neither.
enum class CandidateSlot { none, ref, tgt };

inline CandidateSlot candidate_slot(const goal::RelationTriple& t, const std::string& target_category) {
  if (t.tgt == target_category) return CandidateSlot::tgt;
  if (t.ref == target_category) return CandidateSlot::ref;
  return CandidateSlot::none;
}

struct RoomFilterResult {
  FilterStatus status = FilterStatus::reject;
  std::string reason;
  int target_room = mapping::kNoRoom;
  /// Surviving instances per non-candidate endpoint category, nearest to the
  /// target first.
  std::map<std::string, std::vector<const InstanceRecord*>> by_category;
  /// Surviving context-category instances.
  std::vector<const InstanceRecord*> contexts;
  std::vector<goal::RelationTriple> effective;
  std::vector<goal::RelationTriple> dropped;
  /// Center set: the target first, then the surviving contexts.
  std::vector<Vec2> centers;

  bool complete() const { return dropped.empty(); }
};

/// Step 1: keep instances sharing the target's room and within the geodesic
/// radius; derive the effective triples (every endpoint other than the
/// candidate has a surviving instance). `rooms_of`, when given, holds the
/// room of each record.
inline RoomFilterResult room_filter(const InstanceRecord& target, const std::vector<InstanceRecord>& records,
                                    const GridStack& g, const goal::GoalSpec& goal, const RoomFilterConfig& cfg = {},
                                    const std::vector<int>* rooms_of = nullptr) {
  RoomFilterResult out;
  auto room_at = [&](std::size_t i) { return rooms_of ? (*rooms_of)[i] : mapping::instance_room(g, records[i]); };
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id == target.id) out.target_room = room_at(i);
  }
  if (out.target_room == mapping::kNoRoom) {
    out.status = FilterStatus::defer;
    out.reason = "target not in a labeled room";
    return out;
  }

  // Categories that need an instance other than the candidate.
  std::set<std::string> needed;
  for (const auto& t : goal.relations) {
    const CandidateSlot slot = candidate_slot(t, goal.target_category);
    if (slot != CandidateSlot::ref) needed.insert(t.ref);
    if (slot != CandidateSlot::tgt) needed.insert(t.tgt);
  }
  std::set<std::string> wanted = needed;
  wanted.insert(goal.context_categories.begin(), goal.context_categories.end());

  const auto start = mapping::snap_to_free(g, target.center, cfg.max_snap);
  std::optional<mapping::GeodesicField> field;
  if (start) field.emplace(g, *start, cfg.max_geodesic + 2.0 * cfg.max_snap);

  std::vector<std::pair<double, const InstanceRecord*>> kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.id == target.id || !wanted.count(r.category)) continue;
    if (r.state == mapping::VerifyState::rejected) continue;
    if (room_at(i) != out.target_room || !field) continue;
    const auto d = mapping::geodesic_from_field(g, *field, target.center, r.center, cfg.max_snap);
    if (!d || *d > cfg.max_geodesic) continue;
    kept.emplace_back(distance(r.center, target.center), &r);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
  });
  out.centers.push_back(target.center);
  for (const auto& [d, r] : kept) {
    out.by_category[r->category].push_back(r);
    if (goal.context_categories.count(r->category)) {
      out.contexts.push_back(r);
      out.centers.push_back(r->center);
    }
  }
  for (const auto& t : goal.relations) {
    bool ok = true;
    for (const auto& cat : {t.ref, t.tgt}) {
      if (needed.count(cat) && !out.by_category.count(cat)) ok = false;
    }
    (ok ? out.effective : out.dropped).push_back(t);
  }
  if (!goal.context_categories.empty() && out.contexts.empty()) {
    out.status = FilterStatus::reject;
    out.reason = "no context instance in the target's room within " + std::to_string(cfg.max_geodesic) + " m";
    return out;
  }
  out.status = FilterStatus::ok;
  return out;
}

struct ViewpointSet {
  std::vector<Vec2> anchors;
  std::vector<double> radii{0.8, 1.2, 1.6, 2.0};
  int n_theta = 24;
  std::size_t raw_count = 0;
  std::vector<Vec2> points;
};

/// v = m + r (cos theta_k, sin theta_k), theta_k = 2 pi k / n_theta, in order
/// anchor, radius, bearing.
inline std::vector<Vec2> raw_viewpoints(Vec2 anchor, const std::vector<double>& radii = {0.8, 1.2, 1.6, 2.0},
                                        int n_theta = 24) {
  std::vector<Vec2> out;
  out.reserve(radii.size() * static_cast<std::size_t>(n_theta));
  for (double r : radii) {
    for (int k = 0; k < n_theta; ++k) {
      const double th = 2.0 * kPi * k / n_theta;
      out.push_back({anchor.x + r * std::cos(th), anchor.y + r * std::sin(th)});
    }
  }
  return out;
}

/// Union over anchors; viewpoints falling in an already used grid cell are
/// collapsed.
inline ViewpointSet sample_viewpoints(const std::vector<Vec2>& anchors, const GridStack& g) {
  ViewpointSet vs;
  vs.anchors = anchors;
  std::set<mapping::Cell> used;
  for (const Vec2& m : anchors) {
    for (const Vec2& v : raw_viewpoints(m, vs.radii, vs.n_theta)) {
      ++vs.raw_count;
      if (used.insert(g.cell_of(v)).second) vs.points.push_back(v);
    }
  }
  return vs;
}

struct ExtrinsicConfig {
  std::size_t max_bindings = 64;
};

struct ExtrinsicResult {
  bool confirmed = false;
  std::optional<Vec2> viewpoint;
  /// category -> bound record id
  std::map<std::string, int> binding;
  std::size_t n_viewpoints = 0;
  std::size_t bindings_tried = 0;
  std::string reason;
};

/// Step 4: search for one viewpoint, on a free cell of the target's room,
/// from which every effective triple holds simultaneously, over bindings of
/// categories to surviving instances (nearest first). Deterministic: the
/// first hit in (binding, anchor, radius, bearing) order is returned.
inline ExtrinsicResult verify_extrinsic(const InstanceRecord& target, const RoomFilterResult& filter,
                                        const GridStack& g, const goal::GoalSpec& goal, const Tolerances& tol = {},
                                        const ExtrinsicConfig& cfg = {}) {
  ExtrinsicResult out;
  if (filter.status != FilterStatus::ok) {
    out.reason = "room filter: " + filter.reason;
    return out;
  }
  if (filter.effective.empty()) {
    out.confirmed = true;
    out.reason = "no effective relations";
    return out;
  }

  std::vector<std::string> cats;
  for (const auto& t : filter.effective) {
    const CandidateSlot slot = candidate_slot(t, goal.target_category);
    if (slot != CandidateSlot::ref && std::find(cats.begin(), cats.end(), t.ref) == cats.end()) cats.push_back(t.ref);
    if (slot != CandidateSlot::tgt && std::find(cats.begin(), cats.end(), t.tgt) == cats.end()) cats.push_back(t.tgt);
  }
  std::sort(cats.begin(), cats.end());

  std::vector<std::size_t> idx(cats.size(), 0);
  auto advance = [&]() {
    for (std::size_t k = cats.size(); k-- > 0;) {
      if (++idx[k] < filter.by_category.at(cats[k]).size()) return true;
      idx[k] = 0;
    }
    return false;
  };

  do {
    if (out.bindings_tried >= cfg.max_bindings) break;
    ++out.bindings_tried;
    std::map<std::string, const InstanceRecord*> bound;
    for (std::size_t k = 0; k < cats.size(); ++k) bound[cats[k]] = filter.by_category.at(cats[k])[idx[k]];

    struct Pair {
      goal::Relation rho;
      const InstanceRecord* ref;
      const InstanceRecord* tgt;
    };
    std::vector<Pair> pairs;
    for (const auto& t : filter.effective) {
      const CandidateSlot slot = candidate_slot(t, goal.target_category);
      const InstanceRecord* tgt = slot == CandidateSlot::tgt ? &target : bound.at(t.tgt);
      const InstanceRecord* ref = slot == CandidateSlot::ref ? &target : bound.at(t.ref);
      pairs.push_back({t.rho, ref, tgt});
    }

    std::vector<Vec2> anchors;
    for (const auto& p : pairs) {
      const Vec2 m = (p.ref->center + p.tgt->center) * 0.5;
      if (std::find(anchors.begin(), anchors.end(), m) == anchors.end()) anchors.push_back(m);
    }
    Vec2 centroid;
    for (const Vec2& c : filter.centers) centroid = centroid + c;
    centroid = centroid / static_cast<double>(filter.centers.size());
    if (std::find(anchors.begin(), anchors.end(), centroid) == anchors.end()) anchors.push_back(centroid);

    const ViewpointSet vs = sample_viewpoints(anchors, g);
    for (const Vec2& v : vs.points) {
      const mapping::Cell c = g.cell_of(v);
      if (!g.is_free(c) || g.room[g.index(c)] != filter.target_room) continue;
      ++out.n_viewpoints;
      bool all = true;
      for (const auto& p : pairs) {
        if (p.ref->center == v) {
          all = false;
          break;
        }
        const LocalFrame f = align_frame(v, p.ref->center);
        if (!eval_predicate(p.rho, f, p.ref->center, p.tgt->center, p.ref->z_hat, p.tgt->z_hat, tol)) {
          all = false;
          break;
        }
      }
      if (all) {
        out.confirmed = true;
        out.viewpoint = v;
        for (const auto& [cat, r] : bound) out.binding[cat] = r->id;
        out.reason = "all relations hold";
        return out;
      }
    }
  } while (!cats.empty() && advance());

  out.reason = "no viewpoint satisfies all relations";
  return out;
}

struct VerificationTrace {
  int candidate = -1;
  int step = 0;
  std::map<std::string, std::vector<Bin>> intrinsic_bins;
  std::string intrinsic_outcome;
  std::vector<int> contexts;
  std::size_t effective_relations = 0;
  std::size_t n_viewpoints = 0;
  std::optional<Vec2> viewpoint;
  std::string decision;
  std::string reason;
};

inline OrderedJson trace_to_json(const VerificationTrace& t) {
  OrderedJson bins = OrderedJson::object();
  for (const auto& [atype, bs] : t.intrinsic_bins) {
    OrderedJson arr = OrderedJson::array();
    for (Bin b : bs) arr.push_back(to_string(b));
    bins[atype] = std::move(arr);
  }
  OrderedJson j;
  j["candidate"] = t.candidate;
  j["step"] = t.step;
  j["intrinsic_bins"] = std::move(bins);
  j["intrinsic"] = t.intrinsic_outcome;
  j["contexts"] = t.contexts;
  j["effective_relations"] = t.effective_relations;
  j["n_viewpoints"] = t.n_viewpoints;
  j["viewpoint"] = t.viewpoint ? OrderedJson::array({t.viewpoint->x, t.viewpoint->y}) : OrderedJson();
  j["decision"] = t.decision;
  j["reason"] = t.reason;
  return j;
}

}  // namespace ctxnav::verify
