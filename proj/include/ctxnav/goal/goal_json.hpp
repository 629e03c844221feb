#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/json.hpp"
#include "ctxnav/goal/lexicon.hpp"
#include "ctxnav/goal/types.hpp"

namespace ctxnav::goal {

/// Yes/no question text for one intrinsic attribute.
inline std::string question_text(const std::string& target, const std::string& atype, const std::string& value) {
  if (atype == "color") return "Is the " + target + " mainly " + value + " in color?";
  if (atype == "shape") return "Does the " + target + " have a " + value + " shape?";
  return "Is the outlined " + target + " " + value + "?";
}

inline std::vector<AttributeQuestion> default_questions(const std::string& target,
                                                        const std::map<std::string, std::string>& intrinsic) {
  std::vector<AttributeQuestion> out;
  for (const auto& [k, v] : intrinsic) out.push_back({k, question_text(target, k, v), v});
  return out;
}

/// Checks the GoalSpec invariants. Throws ReferenceError, CardinalityError or
/// ValidationError.
inline void validate_goal(const GoalSpec& g) {
  if (g.target_category.empty()) throw ValidationError("goal: target must be non-empty");
  for (const auto& [k, v] : g.intrinsic) {
    if (!is_attribute_type(k)) throw VocabularyError("goal.attributes: unknown attribute '" + k + "'");
    if (v.empty()) throw ValidationError("goal.attributes." + k + ": value must be non-empty");
  }
  for (const auto& q : g.questions) {
    if (!g.intrinsic.count(q.atype)) {
      throw ValidationError("goal.questions: atype '" + q.atype + "' has no intrinsic attribute");
    }
    if (q.text.empty() || !contains_phrase(q.text, g.target_category)) {
      throw ValidationError("goal.questions: '" + q.text + "' does not mention the target");
    }
  }
  if (g.relations.size() > kMaxRelations) {
    throw CardinalityError("goal.relations: " + std::to_string(g.relations.size()) + " relations, at most " +
                           std::to_string(kMaxRelations) + " allowed");
  }
  auto known = [&](const std::string& c) { return c == g.target_category || g.context_categories.count(c) > 0; };
  for (const auto& t : g.relations) {
    if (!known(t.ref)) throw ReferenceError("goal.relations: unknown endpoint '" + t.ref + "'");
    if (!known(t.tgt)) throw ReferenceError("goal.relations: unknown endpoint '" + t.tgt + "'");
  }
  // Pairwise consistency: (A,B,rho) conflicts with (A,B,opposite) and, for
  // directional relations, with (B,A,rho).
  for (std::size_t i = 0; i < g.relations.size(); ++i) {
    for (std::size_t j = i + 1; j < g.relations.size(); ++j) {
      const auto& a = g.relations[i];
      const auto& b = g.relations[j];
      if (a.rho == Relation::near || b.rho == Relation::near) continue;
      const bool same_pair = a.ref == b.ref && a.tgt == b.tgt;
      const bool swapped = a.ref == b.tgt && a.tgt == b.ref && a.ref != a.tgt;
      if ((same_pair && b.rho == opposite(a.rho)) || (swapped && a.rho == b.rho)) {
        throw ValidationError("goal.relations: contradictory relations (" + a.ref + "," + a.tgt + "," +
                              std::string(to_string(a.rho)) + ") and (" + b.ref + "," + b.tgt + "," +
                              std::string(to_string(b.rho)) + ")");
      }
    }
  }
}

/// Parses the goal document: {target, attributes, questions, groups,
/// relations} plus optional caption and instance_id.
inline GoalSpec ingest_goal_json(const Json& doc) {
  using ctxnav::detail::require_string;
  if (!doc.is_object()) throw ParseError("goal: expected an object");
  GoalSpec g;
  g.target_category = normalize_phrase(require_string(doc, "target", "goal"));
  if (g.target_category.empty()) throw ValidationError("goal.target: must be non-empty");
  g.synonym_map[g.target_category] = g.target_category;

  if (auto it = doc.find("attributes"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("goal.attributes: expected an object");
    for (const auto& [k, v] : it->items()) {
      if (v.is_null()) continue;
      if (!is_attribute_type(k)) throw VocabularyError("goal.attributes: unknown attribute '" + k + "'");
      if (!v.is_string()) throw ParseError("goal.attributes." + k + ": expected a string");
      const std::string value = normalize_phrase(v.get<std::string>());
      if (value.empty()) throw ValidationError("goal.attributes." + k + ": value must be non-empty");
      g.intrinsic[k] = value;
    }
  }

  if (auto it = doc.find("groups"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("goal.groups: expected an object");
    for (const auto& [k, terms] : it->items()) {
      const std::string canon = normalize_phrase(k);
      if (canon.empty()) throw ValidationError("goal.groups: empty canonical name");
      if (canon != g.target_category) g.context_categories.insert(canon);
      g.synonym_map[canon] = canon;
      if (!terms.is_array()) throw ParseError("goal.groups." + k + ": expected an array of terms");
      for (const auto& t : terms) {
        if (!t.is_string()) throw ParseError("goal.groups." + k + ": terms must be strings");
        const std::string term = normalize_phrase(t.get<std::string>());
        if (!term.empty() && term != g.target_category) g.synonym_map[term] = canon;
      }
    }
  }

  if (auto it = doc.find("questions"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("goal.questions: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "goal.questions[" + std::to_string(i) + "]";
      AttributeQuestion q;
      q.atype = normalize_phrase(require_string((*it)[i], "atype", where));
      q.text = require_string((*it)[i], "q", where);
      if (!is_attribute_type(q.atype)) throw VocabularyError(where + ".atype: unknown attribute '" + q.atype + "'");
      if (auto v = g.intrinsic.find(q.atype); v != g.intrinsic.end()) q.value = v->second;
      g.questions.push_back(std::move(q));
    }
  } else {
    g.questions = default_questions(g.target_category, g.intrinsic);
  }

  if (auto it = doc.find("relations"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("goal.relations: expected an array");
    if (it->size() > kMaxRelations) {
      throw CardinalityError("goal.relations: " + std::to_string(it->size()) + " relations, at most " +
                             std::to_string(kMaxRelations) + " allowed");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "goal.relations[" + std::to_string(i) + "]";
      const Json& jr = (*it)[i];
      const Relation rho = parse_relation(normalize_phrase(require_string(jr, "rtype", where)));
      auto endpoint = [&](const char* key) {
        const std::string raw = normalize_phrase(require_string(jr, key, where));
        auto s = g.synonym_map.find(raw);
        if (s == g.synonym_map.end()) throw ReferenceError(where + "." + key + ": '" + raw + "' is not an allowed term");
        return s->second;
      };
      RelationTriple t;
      t.ref = endpoint("ref");
      t.tgt = endpoint("tgt");
      t.rho = rho;
      g.relations.push_back(std::move(t));
    }
  }

  if (auto it = doc.find("caption"); it != doc.end() && it->is_string()) g.raw_caption = it->get<std::string>();
  validate_goal(g);
  return g;
}

inline GoalSpec load_goal_file(const std::string& path) { return ingest_goal_json(read_json_file(path)); }

inline OrderedJson emit_goal_json(const GoalSpec& g) {
  OrderedJson doc;
  doc["target"] = g.target_category;
  OrderedJson attrs = OrderedJson::object();
  for (const auto& [k, v] : g.intrinsic) attrs[k] = v;
  doc["attributes"] = std::move(attrs);
  OrderedJson qs = OrderedJson::array();
  for (const auto& q : g.questions) qs.push_back({{"atype", q.atype}, {"q", q.text}});
  doc["questions"] = std::move(qs);

  std::map<std::string, std::vector<std::string>> groups;
  groups[g.target_category];
  for (const auto& c : g.context_categories) groups[c];
  for (const auto& [term, canon] : g.synonym_map) {
    if (term != canon) groups[canon].push_back(term);
  }
  OrderedJson jg = OrderedJson::object();
  for (const auto& [canon, terms] : groups) jg[canon] = terms;
  doc["groups"] = std::move(jg);

  OrderedJson rels = OrderedJson::array();
  for (const auto& t : g.relations) rels.push_back({{"ref", t.ref}, {"tgt", t.tgt}, {"rtype", to_string(t.rho)}});
  doc["relations"] = std::move(rels);
  if (!g.raw_caption.empty()) doc["caption"] = g.raw_caption;
  return doc;
}

namespace detail {

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '-' || ch == '\'') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string join(const std::vector<std::string>& toks, std::size_t from, std::size_t to) {
  std::string s;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) s.push_back(' ');
    s += toks[i];
  }
  return s;
}

}  // namespace detail

/// Maps raw phrases to canonical category labels. Determiners and modifier
/// words are stripped, then the longest known suffix is looked up; phrases
/// in the target's synonym group map to `target` verbatim.
inline std::map<std::string, std::string> canonicalize_terms(const std::vector<std::string>& phrases,
                                                             const Lexicon& lexicon, const std::string& target) {
  const std::string target_norm = normalize_phrase(target);
  const std::string target_canon = lexicon.canonical(target_norm);
  std::map<std::string, std::string> out;
  for (const auto& phrase : phrases) {
    const std::string norm = normalize_phrase(phrase);
    std::vector<std::string> toks;
    for (auto& t : detail::tokenize(norm)) {
      if (lexicon.determiners.count(t) || lexicon.is_modifier(t)) continue;
      toks.push_back(std::move(t));
    }
    std::string canon = toks.empty() ? norm : detail::join(toks, 0, toks.size());
    for (std::size_t start = 0; start < toks.size(); ++start) {
      const std::string suffix = detail::join(toks, start, toks.size());
      if (lexicon.is_category(suffix)) {
        canon = lexicon.canonical(suffix);
        break;
      }
    }
    if (norm == target_norm || canon == target_norm || canon == target_canon) canon = target_norm;
    out[phrase] = canon;
  }
  return out;
}

}  // namespace ctxnav::goal
