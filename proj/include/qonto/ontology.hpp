#pragma once

// Concept graph with verse evidence, Turtle export/import and lookups.
//
// Exported layout (all under one configurable namespace NS):
//
//   @prefix qo: <NS> .                 vocabulary and relation properties
//   @prefix qc: <NS concept/> .        concepts, percent-encoded stems
//   @prefix rdfs: <...rdf-schema#> .
//
//   qo:kind_of a qo:RelationType .
//
//   qc:%D9%86%D9%88%D8%AD a qo:Concept ;
//       rdfs:label "نوح" ;
//       qo:occurrences 3 ;
//       qo:surface "نوحا" ;
//       qo:kind_of qc:%D8%A7... ;
//       qo:evidence "kind_of|انبياء|7:59" .

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qonto/error.hpp"
#include "qonto/relations.hpp"
#include "qonto/verse.hpp"

namespace qonto {

struct ConceptNode {
  std::string stem;
  std::set<std::string> surfaces;
  std::size_t occurrences = 0;

  friend bool operator==(const ConceptNode&, const ConceptNode&) = default;
};

struct EdgeKey {
  std::string subject;
  std::string relation;
  std::string object;

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

/// Graph equality is set equality of nodes and edges (with evidence).
class OntologyGraph {
 public:
  explicit OntologyGraph(std::string ns = "http://example.org/qonto#") : ns_(std::move(ns)) {}

  const std::string& ns() const { return ns_; }
  const std::map<std::string, ConceptNode>& concepts() const { return concepts_; }
  const std::map<EdgeKey, std::set<VerseRef>>& edges() const { return edges_; }

  bool has_concept(const std::string& stem) const { return concepts_.count(stem) != 0; }

  std::set<std::string> relation_types() const {
    std::set<std::string> out;
    for (const auto& [k, ev] : edges_) out.insert(k.relation);
    return out;
  }

  friend bool operator==(const OntologyGraph& a, const OntologyGraph& b) {
    return a.ns_ == b.ns_ && a.concepts_ == b.concepts_ && a.edges_ == b.edges_;
  }

 private:
  friend struct GraphAccess;
  std::string ns_;
  std::map<std::string, ConceptNode> concepts_;
  std::map<EdgeKey, std::set<VerseRef>> edges_;
};

struct GraphAccess {
  static std::map<std::string, ConceptNode>& concepts(OntologyGraph& g) { return g.concepts_; }
  static std::map<EdgeKey, std::set<VerseRef>>& edges(OntologyGraph& g) { return g.edges_; }
};

struct GraphBuild {
  OntologyGraph graph;
  std::vector<std::string> warnings;
};

/// Endpoints missing from `concepts` are added with zero occurrences and a
/// warning. Duplicate triples are merged.
inline GraphBuild build_graph(std::span<const ConceptNode> concepts, std::span<const RelationInstance> relations,
                              const std::string& ns) {
  if (ns.empty()) throw Error("ontology", "empty namespace");
  GraphBuild out{OntologyGraph(ns), {}};
  auto& nodes = GraphAccess::concepts(out.graph);
  auto& edges = GraphAccess::edges(out.graph);
  for (const auto& c : concepts) {
    auto& n = nodes[c.stem];
    n.stem = c.stem;
    n.surfaces.insert(c.surfaces.begin(), c.surfaces.end());
    n.occurrences = std::max(n.occurrences, c.occurrences);
  }
  for (const auto& r : relations) {
    if (r.subject == r.object) throw Error("ontology", "self relation on '" + r.subject + "'");
    for (const auto* end : {&r.subject, &r.object}) {
      if (!nodes.count(*end)) {
        nodes[*end] = ConceptNode{*end, {}, 0};
        out.warnings.push_back("relation endpoint '" + *end + "' was not a known concept; added");
      }
    }
    auto& ev = edges[{r.subject, r.relation_type, r.object}];
    ev.insert(r.evidence.begin(), r.evidence.end());
  }
  return out;
}

namespace turtle {

inline constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";

inline std::string percent_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '_' || c == '-') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

inline std::string percent_decode(std::string_view s, std::size_t line_no) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 2 >= s.size() || !std::isxdigit(static_cast<unsigned char>(s[i + 1])) ||
        !std::isxdigit(static_cast<unsigned char>(s[i + 2])))
      throw ParseError("ontology", line_no, "bad percent escape");
    out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
    i += 2;
  }
  return out;
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

}  // namespace turtle

inline std::string export_turtle(const OntologyGraph& g) {
  std::ostringstream out;
  out << "@prefix qo: <" << g.ns() << "> .\n"
      << "@prefix qc: <" << g.ns() << "concept/> .\n"
      << "@prefix rdfs: <" << turtle::kRdfs << "> .\n";
  if (g.concepts().empty()) return out.str();

  const auto types = g.relation_types();
  if (!types.empty()) out << '\n';
  for (const auto& t : types) out << "qo:" << turtle::percent_encode(t) << " a qo:RelationType .\n";

  std::map<std::string, std::vector<std::pair<const EdgeKey*, const std::set<VerseRef>*>>> by_subject;
  for (const auto& [k, ev] : g.edges()) by_subject[k.subject].push_back({&k, &ev});

  for (const auto& [stem, node] : g.concepts()) {
    std::vector<std::string> stmts;
    stmts.push_back("rdfs:label " + turtle::quote(stem));
    stmts.push_back("qo:occurrences " + std::to_string(node.occurrences));
    for (const auto& s : node.surfaces) stmts.push_back("qo:surface " + turtle::quote(s));
    const auto it = by_subject.find(stem);
    if (it != by_subject.end()) {
      for (const auto& [k, ev] : it->second) stmts.push_back("qo:" + turtle::percent_encode(k->relation) + " qc:" + turtle::percent_encode(k->object));
      for (const auto& [k, ev] : it->second)
        for (const auto& v : *ev) stmts.push_back("qo:evidence " + turtle::quote(k->relation + "|" + k->object + "|" + v.str()));
    }
    out << "\nqc:" << turtle::percent_encode(stem) << " a qo:Concept";
    for (const auto& s : stmts) out << " ;\n    " << s;
    out << " .\n";
  }
  return out.str();
}

namespace turtle {

struct Tok {
  enum Kind { prefix_kw, iri, pname, literal, integer, a_kw, semicolon, comma, dot, end } kind;
  std::string text;
  std::size_t line;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Tok next() {
    skip();
    if (i_ >= s_.size()) return {Tok::end, {}, line_};
    const char c = s_[i_];
    const std::size_t line = line_;
    if (c == ';' || c == ',' || c == '.') {
      ++i_;
      return {c == ';' ? Tok::semicolon : c == ',' ? Tok::comma : Tok::dot, std::string(1, c), line};
    }
    if (c == '<') {
      const auto e = s_.find('>', i_);
      if (e == std::string_view::npos || s_.substr(i_, e - i_).find('\n') != std::string_view::npos)
        throw ParseError("ontology", line, "unterminated IRI");
      std::string iri(s_.substr(i_ + 1, e - i_ - 1));
      i_ = e + 1;
      return {Tok::iri, iri, line};
    }
    if (c == '"') {
      std::string lit;
      ++i_;
      while (true) {
        if (i_ >= s_.size() || s_[i_] == '\n') throw ParseError("ontology", line, "unterminated string literal");
        const char d = s_[i_++];
        if (d == '"') break;
        if (d != '\\') {
          lit.push_back(d);
          continue;
        }
        if (i_ >= s_.size()) throw ParseError("ontology", line, "unterminated escape");
        const char e = s_[i_++];
        switch (e) {
          case 'n': lit.push_back('\n'); break;
          case 'r': lit.push_back('\r'); break;
          case 't': lit.push_back('\t'); break;
          case '"': lit.push_back('"'); break;
          case '\\': lit.push_back('\\'); break;
          default: throw ParseError("ontology", line, std::string("unsupported escape \\") + e);
        }
      }
      return {Tok::literal, lit, line};
    }
    std::size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != ';' && s_[j] != ',' &&
           !(s_[j] == '.' && (j + 1 >= s_.size() || std::isspace(static_cast<unsigned char>(s_[j + 1])))))
      ++j;
    std::string word(s_.substr(i_, j - i_));
    i_ = j;
    if (word == "@prefix") return {Tok::prefix_kw, word, line};
    if (word == "a") return {Tok::a_kw, word, line};
    if (!word.empty() && std::all_of(word.begin(), word.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
      return {Tok::integer, word, line};
    if (word.find(':') != std::string::npos) return {Tok::pname, word, line};
    throw ParseError("ontology", line, "unexpected token '" + word + "'");
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (s_[i_] == '\n') {
        ++line_;
        ++i_;
      } else if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
};

}  // namespace turtle

/// Parses the subset written by export_turtle. Relation properties must be
/// declared with `qo:X a qo:RelationType` before use.
inline OntologyGraph import_turtle(std::string_view doc) {
  turtle::Lexer lex(doc);
  std::map<std::string, std::string> prefixes;
  std::set<std::string> relation_types;
  std::map<std::string, ConceptNode> nodes;
  std::map<EdgeKey, std::set<VerseRef>> edges;
  std::vector<std::tuple<std::string, std::string, std::size_t>> evidence;  // subject, literal, line

  const auto expect = [&](turtle::Tok::Kind k, const char* what) {
    auto t = lex.next();
    if (t.kind != k) throw ParseError("ontology", t.line, std::string("expected ") + what);
    return t;
  };
  const auto expand = [&](const turtle::Tok& t) {
    const auto colon = t.text.find(':');
    const auto p = prefixes.find(t.text.substr(0, colon));
    if (p == prefixes.end()) throw ParseError("ontology", t.line, "undeclared prefix in '" + t.text + "'");
    return p->second + turtle::percent_decode(t.text.substr(colon + 1), t.line);
  };

  std::string ns;
  const auto local = [&](const std::string& iri, const std::string& base) -> std::optional<std::string> {
    if (iri.size() >= base.size() && iri.compare(0, base.size(), base) == 0) return iri.substr(base.size());
    return std::nullopt;
  };

  for (auto t = lex.next(); t.kind != turtle::Tok::end; t = lex.next()) {
    if (t.kind == turtle::Tok::prefix_kw) {
      const auto name = expect(turtle::Tok::pname, "prefix name");
      if (name.text.back() != ':') throw ParseError("ontology", name.line, "prefix name must end with ':'");
      const auto iri = expect(turtle::Tok::iri, "prefix IRI");
      expect(turtle::Tok::dot, "'.'");
      prefixes[name.text.substr(0, name.text.size() - 1)] = iri.text;
      if (name.text == "qo:") ns = iri.text;
      continue;
    }
    if (t.kind != turtle::Tok::pname) throw ParseError("ontology", t.line, "expected a subject");
    if (ns.empty()) throw ParseError("ontology", t.line, "missing qo: prefix");
    const std::string concept_base = ns + "concept/";
    const std::string subject_iri = expand(t);
    const auto subj_line = t.line;
    expect(turtle::Tok::a_kw, "'a'");
    const auto type_tok = expect(turtle::Tok::pname, "a type");
    const std::string type_iri = expand(type_tok);

    if (type_iri == ns + "RelationType") {
      const auto name = local(subject_iri, ns);
      if (!name || name->empty()) throw ParseError("ontology", subj_line, "relation type outside namespace");
      relation_types.insert(*name);
      expect(turtle::Tok::dot, "'.'");
      continue;
    }
    if (type_iri != ns + "Concept") throw ParseError("ontology", type_tok.line, "unknown type '" + type_tok.text + "'");
    const auto stem = local(subject_iri, concept_base);
    if (!stem || stem->empty()) throw ParseError("ontology", subj_line, "concept IRI outside qc: namespace");
    auto& node = nodes[*stem];
    node.stem = *stem;

    while (true) {
      const auto sep = lex.next();
      if (sep.kind == turtle::Tok::dot) break;
      if (sep.kind != turtle::Tok::semicolon) throw ParseError("ontology", sep.line, "expected ';' or '.'");
      const auto pred = lex.next();
      if (pred.kind != turtle::Tok::pname) throw ParseError("ontology", pred.line, "expected a property");
      const std::string pred_iri = expand(pred);
      const auto obj = lex.next();
      if (obj.kind == turtle::Tok::end) throw ParseError("ontology", obj.line, "unexpected end of document");
      if (pred_iri == std::string(turtle::kRdfs) + "label") {
        if (obj.kind != turtle::Tok::literal || obj.text != *stem)
          throw ParseError("ontology", obj.line, "label must repeat the concept stem");
      } else if (pred_iri == ns + "occurrences") {
        if (obj.kind != turtle::Tok::integer) throw ParseError("ontology", obj.line, "occurrences must be an integer");
        node.occurrences = std::stoul(obj.text);
      } else if (pred_iri == ns + "surface") {
        if (obj.kind != turtle::Tok::literal) throw ParseError("ontology", obj.line, "surface must be a literal");
        node.surfaces.insert(obj.text);
      } else if (pred_iri == ns + "evidence") {
        if (obj.kind != turtle::Tok::literal) throw ParseError("ontology", obj.line, "evidence must be a literal");
        evidence.emplace_back(*stem, obj.text, obj.line);
      } else {
        const auto rel = local(pred_iri, ns);
        if (!rel || !relation_types.count(*rel))
          throw ParseError("ontology", pred.line, "unknown property '" + pred.text + "'");
        if (obj.kind != turtle::Tok::pname) throw ParseError("ontology", obj.line, "relation object must be a concept");
        const auto target = local(expand(obj), concept_base);
        if (!target || target->empty()) throw ParseError("ontology", obj.line, "relation object outside qc: namespace");
        edges[{*stem, *rel, *target}];
      }
    }
  }

  for (const auto& [subject, lit, line] : evidence) {
    const auto parts = text::split(lit, '|');
    if (parts.size() != 3) throw ParseError("ontology", line, "evidence literal must be 'relation|object|sura:aya'");
    const auto it = edges.find({subject, parts[0], parts[1]});
    if (it == edges.end()) throw ParseError("ontology", line, "evidence for an undeclared edge");
    it->second.insert(parse_verse_ref(parts[2], line, "ontology"));
  }
  for (const auto& [k, ev] : edges) {
    if (!nodes.count(k.object)) throw Error("ontology", "edge target '" + k.object + "' is not a concept");
  }
  if (ns.empty()) throw Error("ontology", "document declares no qo: prefix");

  OntologyGraph g(ns);
  GraphAccess::concepts(g) = std::move(nodes);
  GraphAccess::edges(g) = std::move(edges);
  return g;
}

enum class Direction { out, in, both };

struct QueryHit {
  std::string relation;
  std::string other;
  std::vector<VerseRef> evidence;
  bool outgoing = true;

  friend bool operator==(const QueryHit&, const QueryHit&) = default;
};

/// Incident edges; outgoing ones first, each group ordered by (relation, other).
inline std::vector<QueryHit> query(const OntologyGraph& g, const std::string& stem, Direction dir) {
  if (!g.has_concept(stem)) throw Error("ontology", "unknown concept '" + stem + "'");
  std::vector<QueryHit> out, in;
  for (const auto& [k, ev] : g.edges()) {
    if (dir != Direction::in && k.subject == stem)
      out.push_back({k.relation, k.object, {ev.begin(), ev.end()}, true});
    if (dir != Direction::out && k.object == stem)
      in.push_back({k.relation, k.subject, {ev.begin(), ev.end()}, false});
  }
  const auto order = [](const QueryHit& a, const QueryHit& b) {
    return std::tie(a.relation, a.other) < std::tie(b.relation, b.other);
  };
  std::sort(out.begin(), out.end(), order);
  std::sort(in.begin(), in.end(), order);
  out.insert(out.end(), in.begin(), in.end());
  return out;
}

/// `subject<TAB>relation<TAB>object<TAB>evidence_count`
inline void write_graph_report(std::ostream& out, const OntologyGraph& g) {
  for (const auto& [k, ev] : g.edges()) out << k.subject << '\t' << k.relation << '\t' << k.object << '\t' << ev.size() << '\n';
}

}  // namespace qonto
