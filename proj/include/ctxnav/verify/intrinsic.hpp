#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/goal/types.hpp"

namespace ctxnav::verify {

enum class Bin { no, unknown, yes };

inline constexpr std::string_view to_string(Bin b) {
  switch (b) {
    case Bin::no: return "no";
    case Bin::unknown: return "unknown";
    case Bin::yes: return "yes";
  }
  return "unknown";
}

/// 0-4 No, 5-10 Unknown, 11-15 Yes.
inline Bin bin_score(int s) {
  if (s < 0 || s > 15) throw DomainError("bin_score: score " + std::to_string(s) + " outside 0..15");
  if (s <= 4) return Bin::no;
  if (s <= 10) return Bin::unknown;
  return Bin::yes;
}

/// One view of the candidate, ranked by how informative it is (the
/// similarity score of its frame).
struct FrameObservation {
  int step = 0;
  double informativeness = 0.0;
  std::size_t mask_pixels = 0;
};

/// Asks one attribute question about the candidate as seen in a frame and
/// returns a score in 0..15.
using AttributeOracle = std::function<int(const goal::AttributeQuestion&, const FrameObservation&)>;

struct IntrinsicVerdict {
  enum class Outcome { accepted, rejected, deferred };
  Outcome outcome = Outcome::deferred;
  /// While deferred: steps left in the re-query window (1..window).
  int frames_remaining = 0;
  /// Per attribute type, bins in query order (first pass, then re-query).
  std::map<std::string, std::vector<Bin>> bins;
  std::string reason;

  bool accepted() const { return outcome == Outcome::accepted; }
  bool rejected() const { return outcome == Outcome::rejected; }
  bool deferred() const { return outcome == Outcome::deferred; }
};

inline std::string_view to_string(IntrinsicVerdict::Outcome o) {
  switch (o) {
    case IntrinsicVerdict::Outcome::accepted: return "accepted";
    case IntrinsicVerdict::Outcome::rejected: return "rejected";
    case IntrinsicVerdict::Outcome::deferred: return "deferred";
  }
  return "deferred";
}

/// Binned attribute check with one deferred re-query round. An attribute is
/// satisfied when any of its questions bins Yes. Unsatisfied attributes are
/// re-asked once on the most informative frame among the next `window`
/// steps; still unsatisfied after that, the candidate is rejected.
class IntrinsicCheck {
 public:
  explicit IntrinsicCheck(const goal::GoalSpec& goal, int window = 5) : goal_(goal), window_(window) {}

  IntrinsicVerdict begin(const AttributeOracle& ask, const FrameObservation& frame) {
    start_step_ = frame.step;
    best_ = frame;
    verdict_ = {};
    pending_.clear();
    std::map<std::string, bool> satisfied;
    for (const auto& q : goal_.questions) {
      const Bin b = bin_score(ask(q, frame));
      verdict_.bins[q.atype].push_back(b);
      satisfied[q.atype] = satisfied[q.atype] || b == Bin::yes;
    }
    for (const auto& [atype, ok] : satisfied) {
      if (!ok) pending_.push_back(atype);
    }
    if (pending_.empty()) {
      verdict_.outcome = IntrinsicVerdict::Outcome::accepted;
    } else {
      verdict_.outcome = IntrinsicVerdict::Outcome::deferred;
      verdict_.frames_remaining = window_;
    }
    has_later_ = false;
    return verdict_;
  }

  /// Offers a later view of the candidate; only the most informative one in
  /// the window is kept.
  void observe(const FrameObservation& frame) {
    if (!verdict_.deferred()) return;
    if (frame.step - start_step_ > window_) return;
    if (!has_later_ || frame.informativeness > best_.informativeness) {
      best_ = frame;
      has_later_ = true;
    }
  }

  /// Called once per elapsed step while deferred; performs the re-query when
  /// the window has closed.
  IntrinsicVerdict tick(const AttributeOracle& ask, int step) {
    if (!verdict_.deferred()) return verdict_;
    const int elapsed = step - start_step_;
    if (elapsed < window_) {
      verdict_.frames_remaining = window_ - elapsed;
      return verdict_;
    }
    return requery(ask);
  }

  /// Re-asks the unsatisfied attributes on the best frame seen so far.
  IntrinsicVerdict requery(const AttributeOracle& ask) {
    if (!verdict_.deferred()) return verdict_;
    std::vector<std::string> failed;
    for (const auto& atype : pending_) {
      bool ok = false;
      for (const auto& q : goal_.questions) {
        if (q.atype != atype) continue;
        const Bin b = bin_score(ask(q, best_));
        verdict_.bins[atype].push_back(b);
        ok = ok || b == Bin::yes;
      }
      if (!ok) failed.push_back(atype);
    }
    verdict_.frames_remaining = 0;
    if (failed.empty()) {
      verdict_.outcome = IntrinsicVerdict::Outcome::accepted;
    } else {
      verdict_.outcome = IntrinsicVerdict::Outcome::rejected;
      verdict_.reason = "attribute '" + failed.front() + "' not confirmed after re-query";
    }
    pending_.clear();
    return verdict_;
  }

  const IntrinsicVerdict& verdict() const { return verdict_; }
  const FrameObservation& requery_frame() const { return best_; }

 private:
  goal::GoalSpec goal_;
  int window_;
  int start_step_ = 0;
  FrameObservation best_;
  bool has_later_ = false;
  std::vector<std::string> pending_;
  IntrinsicVerdict verdict_;
};

/// Whole protocol in one call: first pass on `current`, then (if needed) one
/// re-query on the most informative of `later` (the next steps' views).
inline IntrinsicVerdict verify_intrinsic(const goal::GoalSpec& goal, const AttributeOracle& ask,
                                         const FrameObservation& current,
                                         const std::vector<FrameObservation>& later = {}, int window = 5) {
  IntrinsicCheck check(goal, window);
  IntrinsicVerdict v = check.begin(ask, current);
  if (!v.deferred()) return v;
  for (const auto& f : later) check.observe(f);
  return check.requery(ask);
}

}  // namespace ctxnav::verify
