#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/goal/goal_json.hpp"
#include "ctxnav/goal/lexicon.hpp"
#include "ctxnav/goal/types.hpp"

namespace ctxnav::goal {

/// CoIN-style inputs carry one caption; InstanceNav-style inputs carry the
/// target name plus separate intrinsic and context descriptions.
enum class GoalMode { coin, instancenav };

namespace detail {

/// Recursive-descent reader for the caption grammar:
///   caption  := [det] modifier* TARGET clause*
///   clause   := filler* (REL np | "with" np [suffix])
///   np       := [det] modifier* (CATEGORY | STOP-NOUN)
///   suffix   := "on top" | "below it" | "underneath" | "nearby" | "next to it" | ...
class CaptionReader {
 public:
  CaptionReader(std::string_view text, const Lexicon& lx) : toks_(tokenize(text)), lx_(lx) {}

  GoalSpec parse_caption() {
    GoalSpec g;
    skip_determiner();
    read_modifiers(&g.intrinsic);
    auto target = match_category();
    if (!target) fail("expected a target category");
    g.target_category = lx_.canonical(*target);
    g.synonym_map[*target] = g.target_category;
    g.synonym_map[g.target_category] = g.target_category;
    read_clauses(g);
    if (g.relations.size() > kMaxRelations) fail("too many relations");
    finish(g);
    return g;
  }

  /// Relation clauses about an implicit target, optionally preceded by
  /// "[det] TARGET [is]".
  void parse_context(GoalSpec& g) {
    const std::size_t save = pos_;
    skip_determiner();
    if (auto t = match_category(); !(t && lx_.canonical(*t) == g.target_category)) pos_ = save;
    read_clauses(g);
  }

  /// Lenient scan of a free-text appearance description: picks up color and
  /// shape words, ignores everything else.
  void scan_attributes(std::map<std::string, std::string>& intrinsic) {
    while (pos_ < toks_.size()) {
      if (!read_modifiers(&intrinsic)) ++pos_;
    }
  }

  static void finish(GoalSpec& g) {
    g.questions = default_questions(g.target_category, g.intrinsic);
    validate_goal(g);
  }

 private:
  std::vector<std::string> toks_;
  const Lexicon& lx_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    const std::string rest = pos_ < toks_.size() ? join(toks_, pos_, toks_.size()) : std::string("<end>");
    throw ParseError("caption: " + what + " at '" + rest + "'");
  }

  bool at(std::size_t i, std::string_view w) const { return i < toks_.size() && toks_[i] == w; }

  void skip_determiner() {
    if (pos_ < toks_.size() && lx_.determiners.count(toks_[pos_])) ++pos_;
  }

  bool is_color_token(const std::string& t) const {
    if (lx_.colors.count(t)) return true;
    // Hyphenated compounds such as "yellow-green".
    if (t.find('-') == std::string::npos) return false;
    std::size_t start = 0;
    while (start <= t.size()) {
      const std::size_t end = std::min(t.find('-', start), t.size());
      if (!lx_.colors.count(t.substr(start, end - start))) return false;
      start = end + 1;
    }
    return true;
  }

  /// [color-modifier] color at pos_; returns its token count.
  std::size_t color_unit(std::size_t i) const {
    if (i < toks_.size() && lx_.color_modifiers.count(toks_[i]) && i + 1 < toks_.size() && is_color_token(toks_[i + 1])) {
      return 2;
    }
    return i < toks_.size() && is_color_token(toks_[i]) ? 1 : 0;
  }

  /// Reads adjectives; returns true if anything was consumed.
  bool read_modifiers(std::map<std::string, std::string>* intrinsic) {
    const std::size_t start = pos_;
    while (pos_ < toks_.size()) {
      if (std::size_t n = color_unit(pos_)) {
        std::string phrase = join(toks_, pos_, pos_ + n);
        pos_ += n;
        // "yellow and green", "white, gray and black"
        while (true) {
          std::size_t k = pos_;
          const bool conj = at(k, "and") || at(k, "or");
          if (conj) ++k;
          const std::size_t m = color_unit(k);
          if (m == 0) break;
          if (conj) phrase += " " + toks_[pos_];
          phrase += " " + join(toks_, k, k + m);
          pos_ = k + m;
        }
        if (intrinsic) {
          auto& slot = (*intrinsic)["color"];
          slot = slot.empty() ? phrase : slot + " and " + phrase;
        }
        continue;
      }
      const std::string& t = toks_[pos_];
      if (lx_.shapes.count(t)) {
        if (intrinsic) {
          auto& slot = (*intrinsic)["shape"];
          slot = slot.empty() ? t : slot + " " + t;
        }
        ++pos_;
        continue;
      }
      if (lx_.materials.count(t)) {
        ++pos_;
        continue;
      }
      break;
    }
    return pos_ > start;
  }

  /// Longest category phrase (up to 4 tokens) at pos_.
  std::optional<std::string> match_category() {
    for (std::size_t n = std::min<std::size_t>(4, toks_.size() - std::min(pos_, toks_.size())); n >= 1; --n) {
      const std::string s = join(toks_, pos_, pos_ + n);
      if (lx_.is_category(s)) {
        pos_ += n;
        return s;
      }
    }
    return std::nullopt;
  }

  bool match_stop_noun() {
    for (std::size_t n = std::min<std::size_t>(4, toks_.size() - std::min(pos_, toks_.size())); n >= 1; --n) {
      if (lx_.stop_nouns.count(join(toks_, pos_, pos_ + n))) {
        pos_ += n;
        return true;
      }
    }
    return false;
  }

  std::optional<Relation> match_relation() {
    for (const auto& [words, rel] : lx_.relation_phrases) {
      if (pos_ + words.size() > toks_.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < words.size() && ok; ++k) ok = toks_[pos_ + k] == words[k];
      if (ok) {
        pos_ += words.size();
        return rel;
      }
    }
    return std::nullopt;
  }

  /// Noun phrase; returns the category surface form, or nullopt for a
  /// stop-listed noun (region, direction, generic object).
  std::optional<std::string> read_np() {
    skip_determiner();
    read_modifiers(nullptr);
    if (auto c = match_category()) return c;
    if (match_stop_noun()) {
      // "corner of the room", "side of the bed": the head was a region.
      if (at(pos_, "of")) {
        ++pos_;
        return read_np();
      }
      return std::nullopt;
    }
    fail("expected an object noun phrase");
  }

  /// Suffix after "with NP": the relation of NP to the target, inverted so
  /// that the triple still reads "target is rho of NP".
  std::optional<Relation> match_with_suffix() {
    struct Entry {
      std::vector<std::string_view> words;
      Relation rho;
    };
    static const std::vector<Entry> kSuffixes = {
        {{"on", "top", "of", "it"}, Relation::below}, {{"on", "top"}, Relation::below},
        {{"above", "it"}, Relation::below},           {{"over", "it"}, Relation::below},
        {{"on", "it"}, Relation::below},              {{"below", "it"}, Relation::above},
        {{"under", "it"}, Relation::above},           {{"beneath", "it"}, Relation::above},
        {{"underneath", "it"}, Relation::above},      {{"underneath"}, Relation::above},
        {{"below"}, Relation::above},                 {{"next", "to", "it"}, Relation::near},
        {{"beside", "it"}, Relation::near},           {{"near", "it"}, Relation::near},
        {{"nearby"}, Relation::near},                 {{"in", "front", "of", "it"}, Relation::behind},
        {{"in", "front"}, Relation::behind},          {{"behind", "it"}, Relation::front},
    };
    for (const auto& e : kSuffixes) {
      if (pos_ + e.words.size() > toks_.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < e.words.size() && ok; ++k) ok = toks_[pos_ + k] == e.words[k];
      // "on top of the bed" is a relation clause, not a suffix.
      const std::size_t next = pos_ + e.words.size();
      if (ok && !(next < toks_.size() && (toks_[next] == "of" || lx_.determiners.count(toks_[next])))) {
        pos_ = next;
        return e.rho;
      }
    }
    return std::nullopt;
  }

  void add_context(GoalSpec& g, const std::string& surface, std::optional<Relation> rho) {
    const std::string canon = lx_.canonical(surface);
    g.synonym_map[surface] = canon;
    g.synonym_map[canon] = canon;
    if (canon != g.target_category) g.context_categories.insert(canon);
    if (!rho) return;
    RelationTriple t{canon, g.target_category, *rho};
    for (const auto& r : g.relations) {
      if (r == t) return;
    }
    g.relations.push_back(std::move(t));
  }

  void read_clauses(GoalSpec& g) {
    while (pos_ < toks_.size()) {
      if (lx_.fillers.count(toks_[pos_]) && !match_relation_here()) {
        ++pos_;
        continue;
      }
      if (auto rel = match_relation()) {
        if (auto np = read_np()) add_context(g, *np, rel);
        continue;
      }
      // Region clause ("in the corner", "at the end of the hall"): dropped.
      if (at(pos_, "in") || at(pos_, "at")) {
        const std::size_t save = pos_;
        ++pos_;
        skip_determiner();
        read_modifiers(nullptr);
        if (match_stop_noun()) {
          if (at(pos_, "of")) {
            ++pos_;
            read_np();
          }
          continue;
        }
        pos_ = save;
        fail("unsupported region phrase");
      }
      if (at(pos_, "with")) {
        ++pos_;
        auto np = read_np();
        auto rel = match_with_suffix();
        if (np) add_context(g, *np, rel);
        continue;
      }
      fail("unexpected token");
    }
  }

  bool match_relation_here() {
    const std::size_t save = pos_;
    const bool hit = match_relation().has_value();
    pos_ = save;
    return hit;
  }

};

}  // namespace detail

/// Deterministic parse of a caption from the supported grammar. Throws
/// ParseError naming the unconsumed suffix when the caption falls outside it.
inline GoalSpec parse_caption(const std::string& caption, const Lexicon& lexicon = Lexicon::builtin()) {
  GoalSpec g = detail::CaptionReader(caption, lexicon).parse_caption();
  g.raw_caption = caption;
  return g;
}

/// InstanceNav-style decomposition: explicit target, an appearance
/// description (scanned for color/shape words) and a context description
/// (relation clauses about the target).
inline GoalSpec parse_instancenav(const std::string& target, const std::string& intrinsic_text,
                                  const std::string& context_text, const Lexicon& lexicon = Lexicon::builtin()) {
  GoalSpec g;
  const std::string norm = normalize_phrase(target);
  g.target_category = lexicon.canonical(norm);
  if (g.target_category.empty()) throw ParseError("instancenav: empty target");
  g.synonym_map[norm] = g.target_category;
  g.synonym_map[g.target_category] = g.target_category;
  detail::CaptionReader(intrinsic_text, lexicon).scan_attributes(g.intrinsic);
  detail::CaptionReader(context_text, lexicon).parse_context(g);
  detail::CaptionReader::finish(g);
  g.raw_caption = context_text.empty() ? intrinsic_text : intrinsic_text + " " + context_text;
  return g;
}

inline GoalSpec parse_goal(GoalMode mode, const std::string& caption, const std::string& target = {},
                           const std::string& intrinsic_text = {}, const Lexicon& lexicon = Lexicon::builtin()) {
  if (mode == GoalMode::coin) return parse_caption(caption, lexicon);
  return parse_instancenav(target, intrinsic_text, caption, lexicon);
}

inline std::string relation_phrase(Relation r) {
  switch (r) {
    case Relation::left: return "to the left of";
    case Relation::right: return "to the right of";
    case Relation::front: return "in front of";
    case Relation::behind: return "behind";
    case Relation::near: return "near";
    case Relation::above: return "above";
    case Relation::below: return "below";
  }
  return "near";
}

/// Inverse templater: a caption the grammar parses back to the same target,
/// attributes and relation set. Only target-centric triples (tgt == target)
/// can be expressed; anything else throws DomainError.
inline std::string render_caption(const GoalSpec& g) {
  std::string out = "a";
  if (auto it = g.intrinsic.find("color"); it != g.intrinsic.end()) out += " " + it->second;
  if (auto it = g.intrinsic.find("shape"); it != g.intrinsic.end()) out += " " + it->second;
  out += " " + g.target_category;
  bool first = true;
  for (const auto& t : g.relations) {
    if (t.tgt != g.target_category) {
      throw DomainError("render_caption: triple (" + t.ref + "," + t.tgt + ") is not about the target");
    }
    out += first ? " " : " and ";
    out += relation_phrase(t.rho) + " the " + t.ref;
    first = false;
  }
  return out;
}

}  // namespace ctxnav::goal
