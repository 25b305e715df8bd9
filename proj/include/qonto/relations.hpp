#pragma once

// Trigger/pattern filtering of mined rules and typed relation extraction.
//
// A pattern reads "category + trigger -> category @ relation_type". A rule
// matches when one antecedent concept belongs to the category, the other
// is one of the trigger's stems, and some verse holding the rule's items
// has the trigger at or after the category cpt. The matched category
// concept becomes the relation subject and the rule consequent its object.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qonto/arabic.hpp"
#include "qonto/error.hpp"
#include "qonto/mining.hpp"
#include "qonto/textio.hpp"

namespace qonto {

struct RelationType {
  std::string name;
  bool directed = true;

  friend bool operator==(const RelationType&, const RelationType&) = default;
};

class RelationTypeRegistry {
 public:
  void add(RelationType t) {
    if (contains(t.name)) throw Error("relations", "duplicate relation type '" + t.name + "'");
    // These local names are taken by the Turtle vocabulary.
    for (const char* reserved : {"Concept", "RelationType", "occurrences", "surface", "evidence"})
      if (t.name == reserved) throw Error("relations", "relation type name '" + t.name + "' is reserved");
    if (t.name.empty() || t.name.find_first_of(" \t|") != std::string::npos)
      throw Error("relations", "invalid relation type name '" + t.name + "'");
    index_.emplace(t.name, types_.size());
    types_.push_back(std::move(t));
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const std::vector<RelationType>& types() const { return types_; }
  std::size_t size() const { return types_.size(); }

 private:
  std::vector<RelationType> types_;
  std::map<std::string, std::size_t> index_;
};

struct Trigger {
  std::vector<std::string> surfaces;  // as written in the document
  std::set<std::string> stems;        // canonical forms
  std::string relation_type;
  std::string description;

  const std::string& name() const { return surfaces.front(); }
};

class CategoryLexicon {
 public:
  void add(const std::string& category, std::set<std::string> members) {
    auto& slot = categories_[category];
    slot.insert(members.begin(), members.end());
  }
  bool has_category(const std::string& c) const { return categories_.count(c) != 0; }
  bool contains(const std::string& category, const std::string& stem) const {
    const auto it = categories_.find(category);
    return it != categories_.end() && it->second.count(stem) != 0;
  }
  const std::map<std::string, std::set<std::string>>& categories() const { return categories_; }

 private:
  std::map<std::string, std::set<std::string>> categories_;
};

struct Pattern {
  std::string category;             // antecedent category slot
  std::size_t trigger = 0;          // index into Lexicons::triggers
  bool trigger_first = false;       // slot order as written
  std::string consequent_category;  // advisory unless `strict`
  std::string relation_type;
  bool strict = false;
  std::string text;  // source line, for reports
};

struct Lexicons {
  RelationTypeRegistry registry;
  std::vector<Trigger> triggers;
  std::vector<Pattern> patterns;
  CategoryLexicon lexicon;
};

namespace detail {

inline std::pair<std::string, std::string> split_once(const std::string& s, const std::string& sep) {
  const auto p = s.find(sep);
  if (p == std::string::npos) return {s, {}};
  return {std::string(text::trim(std::string_view(s).substr(0, p))),
          std::string(text::trim(std::string_view(s).substr(p + sep.size())))};
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& part : text::split(s, ',')) {
    const auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace detail

/// Parses the lexicon document:
///
///     [relation_types]   one name per line
///     [categories]       name: member, member, ...
///     [triggers]         surface, surface -> relation_type [| description]
///     [patterns]         category + trigger -> category @ relation_type [strict]
///
/// Category members and trigger surfaces are canonicalized with the active
/// normalization and stemmer configs.
inline Lexicons load_lexicons(std::istream& in, const NormalizationConfig& ncfg, const StemmerConfig& scfg) {
  Lexicons lx;
  std::vector<text::SectionLine> patterns;
  std::vector<text::SectionLine> triggers;
  for (auto& l : text::read_sections(in, "relations")) {
    if (l.section == "relation_types") {
      try {
        lx.registry.add({l.content, true});
      } catch (const Error& e) {
        throw ParseError("relations", l.line_no, std::string(e.what()).substr(std::string("relations: ").size()));
      }
    } else if (l.section == "categories") {
      const auto colon = l.content.find(':');
      if (colon == std::string::npos) throw ParseError("relations", l.line_no, "expected 'name: member, ...'");
      const std::string name(text::trim(std::string_view(l.content).substr(0, colon)));
      if (name.empty()) throw ParseError("relations", l.line_no, "empty category name");
      std::set<std::string> members;
      for (const auto& m : detail::split_list(l.content.substr(colon + 1))) {
        auto key = canonical_term(m, ncfg, scfg);
        if (!key.empty()) members.insert(std::move(key));
      }
      lx.lexicon.add(name, std::move(members));
    } else if (l.section == "triggers") {
      triggers.push_back(std::move(l));
    } else if (l.section == "patterns") {
      patterns.push_back(std::move(l));
    } else {
      throw ParseError("relations", l.line_no, "unknown section '" + l.section + "'");
    }
  }

  for (const auto& l : triggers) {
    auto [lhs, rhs] = detail::split_once(l.content, "->");
    if (rhs.empty()) throw ParseError("relations", l.line_no, "expected 'surface -> relation_type'");
    auto [type, description] = detail::split_once(rhs, "|");
    if (!lx.registry.contains(type))
      throw ParseError("relations", l.line_no, "unknown relation type '" + type + "'");
    Trigger t;
    t.surfaces = detail::split_list(lhs);
    if (t.surfaces.empty()) throw ParseError("relations", l.line_no, "trigger without surfaces");
    for (const auto& s : t.surfaces) t.stems.insert(canonical_term(s, ncfg, scfg));
    t.relation_type = type;
    t.description = description;
    lx.triggers.push_back(std::move(t));
  }

  const auto find_trigger = [&](const std::string& word) -> std::optional<std::size_t> {
    const auto key = canonical_term(word, ncfg, scfg);
    for (std::size_t i = 0; i < lx.triggers.size(); ++i) {
      const auto& t = lx.triggers[i];
      if (std::find(t.surfaces.begin(), t.surfaces.end(), word) != t.surfaces.end() || t.stems.count(key)) return i;
    }
    return std::nullopt;
  };

  for (const auto& l : patterns) {
    std::string body = l.content;
    bool strict = false;
    if (body.size() > 6 && body.compare(body.size() - 6, 6, "strict") == 0) {
      strict = true;
      body = std::string(text::trim(std::string_view(body).substr(0, body.size() - 6)));
    }
    auto [lhs_rhs, type] = detail::split_once(body, "@");
    if (type.empty()) throw ParseError("relations", l.line_no, "pattern needs '@ relation_type'");
    const std::string arrow = lhs_rhs.find("-->") != std::string::npos ? "-->" : "->";
    auto [lhs, consequent] = detail::split_once(lhs_rhs, arrow);
    if (consequent.empty()) throw ParseError("relations", l.line_no, "pattern needs '-> category'");
    const auto slots = text::split(lhs, '+');
    if (slots.size() != 2) throw ParseError("relations", l.line_no, "pattern needs exactly two antecedent slots");
    Pattern p;
    p.text = l.content;
    p.strict = strict;
    p.relation_type = type;
    if (!lx.registry.contains(type)) throw ParseError("relations", l.line_no, "unknown relation type '" + type + "'");
    int n_triggers = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      const std::string slot(text::trim(slots[i]));
      if (lx.lexicon.has_category(slot)) {
        p.category = slot;
      } else if (const auto t = find_trigger(slot)) {
        p.trigger = *t;
        p.trigger_first = i == 0;
        ++n_triggers;
      } else {
        throw ParseError("relations", l.line_no, "unknown category '" + slot + "' (not a category or trigger)");
      }
    }
    if (n_triggers != 1 || p.category.empty())
      throw ParseError("relations", l.line_no, "pattern needs exactly one category slot and one trigger slot");
    if (!lx.lexicon.has_category(consequent))
      throw ParseError("relations", l.line_no, "unknown category '" + consequent + "'");
    p.consequent_category = consequent;
    lx.patterns.push_back(std::move(p));
  }
  return lx;
}

// ---------------------------------------------------------------------------
// Trigger co-occurrences

struct TriggerHit {
  VerseRef verse;
  std::size_t position = 0;

  friend bool operator==(const TriggerHit&, const TriggerHit&) = default;
};

/// For each trigger (by index), the verses whose transaction holds one of
/// its stems, with the earliest such position.
inline std::map<std::size_t, std::vector<TriggerHit>> find_trigger_cooccurrences(std::span<const Transaction> ts,
                                                                                 std::span<const Trigger> triggers) {
  std::map<std::size_t, std::vector<TriggerHit>> out;
  for (const auto& t : ts) {
    for (std::size_t i = 0; i < triggers.size(); ++i) {
      std::optional<std::size_t> best;
      for (const auto& s : triggers[i].stems) {
        const auto p = t.position_of(s);
        if (p && (!best || *p < *best)) best = p;
      }
      if (best) out[i].push_back({t.verse, *best});
    }
  }
  return out;
}

/// Transactions plus trigger hits, the evidence needed for the positional
/// check. Without it only the lexical conditions are tested.
class EvidenceIndex {
 public:
  EvidenceIndex(std::span<const Transaction> ts, std::span<const Trigger> triggers)
      : transactions_(ts.begin(), ts.end()), hits_(find_trigger_cooccurrences(ts, triggers)) {
    for (std::size_t i = 0; i < transactions_.size(); ++i)
      for (const auto& item : transactions_[i].items) postings_[item].push_back(i);
    for (const auto& [trig, hits] : hits_)
      for (const auto& h : hits) hit_at_[{trig, h.verse}] = h.position;
  }

  const std::map<std::size_t, std::vector<TriggerHit>>& cooccurrences() const { return hits_; }

  /// Verses containing `cpt`, `consequent` and trigger evidence at or
  /// after `cpt`. `trigger_item` names the antecedent item acting as
  /// the trigger; when empty the trigger's own hits are used.
  std::vector<VerseRef> evidence(const std::string& cpt, const std::string& consequent,
                                 const std::string& trigger_item, std::size_t trigger) const {
    std::vector<VerseRef> out;
    const auto it = postings_.find(cpt);
    if (it == postings_.end()) return out;
    for (std::size_t ti : it->second) {
      const auto& t = transactions_[ti];
      if (!t.contains(consequent)) continue;
      const std::size_t cpos = *t.position_of(cpt);
      std::optional<std::size_t> tpos;
      if (!trigger_item.empty()) {
        tpos = t.position_of(trigger_item);
      } else {
        const auto h = hit_at_.find({trigger, t.verse});
        if (h != hit_at_.end()) tpos = h->second;
      }
      if (tpos && *tpos >= cpos) out.push_back(t.verse);
    }
    return out;
  }

 private:
  std::vector<Transaction> transactions_;
  std::map<std::size_t, std::vector<TriggerHit>> hits_;
  std::map<std::pair<std::size_t, VerseRef>, std::size_t> hit_at_;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

struct PatternMatch {
  std::size_t rule = 0;     // index into the matched rule list
  std::size_t pattern = 0;  // index into Lexicons::patterns
  std::string subject;      // the category concept
  std::string trigger;      // trigger stem as it appears in the rule, or empty
  std::vector<VerseRef> evidence;
};

struct MatchResult {
  std::vector<PatternMatch> accepted;
  std::size_t rejected = 0;
};

/// Only the first two antecedent concepts are considered. The first
/// pattern (document order) that matches is recorded. With `evidence ==
/// nullptr` the positional condition is not checked and single-antecedent
/// rules cannot match.
inline MatchResult match_patterns(std::span<const AssociationRule> rules, const Lexicons& lx,
                                  const EvidenceIndex* evidence) {
  MatchResult res;
  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    const auto& r = rules[ri];
    std::optional<PatternMatch> found;
    for (std::size_t pi = 0; pi < lx.patterns.size() && !found; ++pi) {
      const auto& p = lx.patterns[pi];
      const auto& trig = lx.triggers[p.trigger];
      if (p.strict && !lx.lexicon.contains(p.consequent_category, r.consequent)) continue;
      if (r.antecedent.size() >= 2) {
        for (int flip = 0; flip < 2 && !found; ++flip) {
          const auto& cpt = r.antecedent[flip];
          const auto& other = r.antecedent[1 - flip];
          if (!lx.lexicon.contains(p.category, cpt) || !trig.stems.count(other)) continue;
          PatternMatch m{ri, pi, cpt, other, {}};
          if (evidence) {
            m.evidence = evidence->evidence(cpt, r.consequent, other, p.trigger);
            if (m.evidence.empty()) continue;
          }
          found = std::move(m);
        }
      } else if (r.antecedent.size() == 1 && evidence) {
        const auto& cpt = r.antecedent[0];
        if (!lx.lexicon.contains(p.category, cpt)) continue;
        PatternMatch m{ri, pi, cpt, {}, evidence->evidence(cpt, r.consequent, {}, p.trigger)};
        if (!m.evidence.empty()) found = std::move(m);
      }
    }
    if (found) res.accepted.push_back(std::move(*found));
    else ++res.rejected;
  }
  return res;
}

struct RelationInstance {
  std::string subject;
  std::string object;
  std::string relation_type;
  std::vector<VerseRef> evidence;  // sorted, unique
  std::size_t pattern = 0;         // first pattern that produced it
  std::size_t cooccurrence = 0;    // == evidence.size()

  friend bool operator==(const RelationInstance&, const RelationInstance&) = default;
};

/// One instance per (subject, object, type); evidence is unioned across
/// the matches that produce it. Matches without evidence yield nothing.
/// Output is sorted by (subject, relation_type, object).
inline std::vector<RelationInstance> typed_relations(std::span<const PatternMatch> matches,
                                                     std::span<const AssociationRule> rules, const Lexicons& lx) {
  std::map<std::tuple<std::string, std::string, std::string>, RelationInstance> merged;
  for (const auto& m : matches) {
    if (m.evidence.empty()) continue;
    const auto& r = rules[m.rule];
    const auto& type = lx.patterns[m.pattern].relation_type;
    if (m.subject == r.consequent) continue;
    auto [it, inserted] = merged.try_emplace({m.subject, type, r.consequent},
                                             RelationInstance{m.subject, r.consequent, type, {}, m.pattern, 0});
    auto& inst = it->second;
    inst.pattern = std::min(inst.pattern, m.pattern);
    inst.evidence.insert(inst.evidence.end(), m.evidence.begin(), m.evidence.end());
  }
  std::vector<RelationInstance> out;
  out.reserve(merged.size());
  for (auto& [key, inst] : merged) {
    std::sort(inst.evidence.begin(), inst.evidence.end());
    inst.evidence.erase(std::unique(inst.evidence.begin(), inst.evidence.end()), inst.evidence.end());
    inst.cooccurrence = inst.evidence.size();
    out.push_back(std::move(inst));
  }
  return out;
}

inline std::vector<RelationInstance> confidence_filter(std::span<const RelationInstance> rels,
                                                       std::size_t min_cooccurrence) {
  if (min_cooccurrence < 1) throw Error("relations", "min_cooccurrence must be >= 1");
  std::vector<RelationInstance> out;
  for (const auto& r : rels)
    if (r.cooccurrence >= min_cooccurrence) out.push_back(r);
  return out;
}

/// Accept/reject listing in the style `antecedent + ... --> consequent`,
/// matched pattern (or `--`), Accepted/Rejected.
inline void write_match_report(std::ostream& out, std::span<const AssociationRule> rules, const MatchResult& res,
                               const Lexicons& lx) {
  std::map<std::size_t, const PatternMatch*> by_rule;
  for (const auto& m : res.accepted) by_rule[m.rule] = &m;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto it = by_rule.find(i);
    out << text::join(rules[i].antecedent, " + ") << " --> " << rules[i].consequent << '\t'
        << (it == by_rule.end() ? std::string("--") : lx.patterns[it->second->pattern].text) << '\t'
        << (it == by_rule.end() ? "Rejected" : "Accepted") << '\n';
  }
}

/// `subject<TAB>relation<TAB>object<TAB>evidence` with evidence as
/// space-joined "sura:aya" refs.
inline void write_relations(std::ostream& out, std::span<const RelationInstance> rels) {
  for (const auto& r : rels) {
    out << r.subject << '\t' << r.relation_type << '\t' << r.object << '\t';
    for (std::size_t i = 0; i < r.evidence.size(); ++i) out << (i ? " " : "") << r.evidence[i].str();
    out << '\n';
  }
}

inline VerseRef parse_verse_ref(const std::string& s, std::size_t line_no, const std::string& module) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument("no colon");
    std::size_t used = 0;
    const int sura = std::stoi(s.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("trailing");
    const int aya = std::stoi(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("trailing");
    return {sura, aya};
  } catch (const std::exception&) {
    throw ParseError(module, line_no, "malformed verse reference '" + s + "'");
  }
}

inline std::vector<RelationInstance> read_relations(std::istream& in) {
  std::vector<RelationInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (text::getline(in, line, line_no)) {
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 4) throw ParseError("relations", line_no, "expected 4 tab-separated columns");
    RelationInstance r{cols[0], cols[2], cols[1], {}, 0, 0};
    for (const auto& e : text::split(cols[3], ' '))
      if (!e.empty()) r.evidence.push_back(parse_verse_ref(e, line_no, "relations"));
    r.cooccurrence = r.evidence.size();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qonto
