#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "qonto/ontology.hpp"

using namespace qonto;

namespace {

const std::string kNs = "http://example.org/qonto#";

GraphBuild sample() {
  const std::vector<ConceptNode> concepts{{"نوح", {"نوحا", "نوح"}, 4}, {"قوم", {"قومه"}, 9}, {"كتاب", {}, 1}};
  const std::vector<RelationInstance> rels{{"نوح", "قوم", "prophet_nation", {{7, 59}, {11, 25}}, 0, 2},
                                           {"موس", "كتاب", "prophet_book", {{11, 110}}, 1, 1}};
  return build_graph(concepts, rels, kNs);
}

}  // namespace

TEST(BuildGraph, AddsMissingEndpointsWithWarning) {
  const auto b = sample();
  EXPECT_TRUE(b.graph.has_concept("موس"));
  EXPECT_EQ(b.graph.concepts().at("موس").occurrences, 0u);
  ASSERT_EQ(b.warnings.size(), 1u);
  EXPECT_NE(b.warnings[0].find("موس"), std::string::npos);
  EXPECT_EQ(b.graph.edges().size(), 2u);
  EXPECT_EQ(b.graph.relation_types(), (std::set<std::string>{"prophet_book", "prophet_nation"}));
}

TEST(BuildGraph, Errors) {
  const std::vector<ConceptNode> none;
  const std::vector<RelationInstance> self{{"a", "a", "t", {{1, 1}}, 0, 1}};
  EXPECT_THROW(build_graph(none, self, kNs), Error);
  EXPECT_THROW(build_graph(none, {}, ""), Error);
}

TEST(BuildGraph, MergesDuplicateTriples) {
  const std::vector<RelationInstance> rels{{"a", "b", "t", {{1, 1}}, 0, 1}, {"a", "b", "t", {{1, 2}}, 0, 1}};
  const auto b = build_graph(std::vector<ConceptNode>{}, rels, kNs);
  EXPECT_EQ(b.graph.edges().at({"a", "t", "b"}), (std::set<VerseRef>{{1, 1}, {1, 2}}));
}

TEST(Turtle, PercentEncoding) {
  EXPECT_EQ(turtle::percent_encode("a_b-1"), "a_b-1");
  EXPECT_EQ(turtle::percent_encode("ن"), "%D9%86");
  EXPECT_EQ(turtle::percent_decode("%D9%86x", 1), "نx");
  EXPECT_THROW(turtle::percent_decode("%D", 1), ParseError);
  EXPECT_EQ(turtle::quote("a\"b\\"), "\"a\\\"b\\\\\"");
}

TEST(Turtle, EmptyGraphIsHeaderOnly) {
  const std::string ttl = export_turtle(OntologyGraph(kNs));
  EXPECT_EQ(ttl, "@prefix qo: <" + kNs + "> .\n@prefix qc: <" + kNs + "concept/> .\n" +
                     "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n");
  EXPECT_EQ(import_turtle(ttl), OntologyGraph(kNs));
}

TEST(Turtle, ConceptBlockLayout) {
  const std::vector<ConceptNode> concepts{{"a", {"x"}, 2}, {"b", {}, 1}};
  const std::vector<RelationInstance> rels{{"a", "b", "kind_of", {{7, 1}}, 0, 1}};
  const std::string ttl = export_turtle(build_graph(concepts, rels, kNs).graph);
  EXPECT_NE(ttl.find("qo:kind_of a qo:RelationType .\n"), std::string::npos);
  EXPECT_NE(ttl.find("qc:a a qo:Concept ;\n    rdfs:label \"a\" ;\n    qo:occurrences 2 ;\n    qo:surface \"x\" ;\n"
                     "    qo:kind_of qc:b ;\n    qo:evidence \"kind_of|b|7:1\" .\n"),
            std::string::npos);
}

TEST(Turtle, RoundTripSample) {
  const auto g = sample().graph;
  const std::string ttl = export_turtle(g);
  EXPECT_EQ(import_turtle(ttl), g);
  EXPECT_EQ(export_turtle(import_turtle(ttl)), ttl);
}

TEST(Turtle, UnknownPropertyRejected) {
  const std::string doc = "@prefix qo: <" + kNs + "> .\n@prefix qc: <" + kNs + "concept/> .\n" +
                          "qc:a a qo:Concept ; qo:parent_of qc:b .\n";
  try {
    import_turtle(doc);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("unknown property 'qo:parent_of'"), std::string::npos);
  }
}

TEST(Turtle, SyntaxErrorsCarryLines) {
  const std::string head = "@prefix qo: <" + kNs + "> .\n@prefix qc: <" + kNs + "concept/> .\n";
  const auto line_of = [](const std::string& doc) -> std::size_t {
    try {
      import_turtle(doc);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of(head + "qc:a a qo:Concept ;\n  qo:occurrences \"x\" .\n"), 4u);
  EXPECT_EQ(line_of(head + "qc:a a qo:Concept\n"), 4u);
  EXPECT_EQ(line_of(head + "zz:a a qo:Concept .\n"), 3u);
  EXPECT_EQ(line_of(head + "qc:a a qo:Concept ; rdfs:label \"b\" .\n"), 3u);
  EXPECT_THROW(import_turtle("qc:a a qo:Concept .\n"), ParseError);
}

TEST(Turtle, CommentsAndWhitespaceTolerated) {
  const auto g = sample().graph;
  std::string ttl = "# generated\n" + export_turtle(g);
  EXPECT_EQ(import_turtle(ttl), g);
}

TEST(Query, OutgoingThenIncoming) {
  const std::vector<RelationInstance> rels{{"a", "c", "t2", {{1, 2}}, 0, 1},
                                           {"a", "b", "t1", {{1, 1}}, 0, 1},
                                           {"z", "a", "t1", {{1, 3}}, 0, 1}};
  const auto g = build_graph(std::vector<ConceptNode>{}, rels, kNs).graph;
  const auto hits = query(g, "a", Direction::both);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].other, "b");
  EXPECT_EQ(hits[1].other, "c");
  EXPECT_FALSE(hits[2].outgoing);
  EXPECT_EQ(hits[2].other, "z");
  EXPECT_EQ(query(g, "a", Direction::in).size(), 1u);
  EXPECT_EQ(query(g, "a", Direction::out).size(), 2u);
  EXPECT_THROW(query(g, "missing", Direction::both), Error);
}

TEST(GraphReport, Layout) {
  std::ostringstream out;
  write_graph_report(out, sample().graph);
  EXPECT_EQ(out.str(), "موس\tprophet_book\tكتاب\t1\nنوح\tprophet_nation\tقوم\t2\n");
}

TEST(Turtle, RandomGraphsRoundTrip) {
  std::mt19937 rng(17);
  const std::vector<std::string> letters{"ا", "ب", "ت", "ن", "و", "ح", "م", "س", "_", "a", "\"", " "};
  const auto word = [&](std::size_t max_len) {
    std::string w;
    const std::size_t len = 1 + rng() % max_len;
    for (std::size_t i = 0; i < len; ++i) w += letters[rng() % (letters.size() - 2)];
    return w;
  };
  for (int round = 0; round < 100; ++round) {
    std::vector<ConceptNode> concepts;
    const std::size_t n = 1 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      ConceptNode c{word(5), {}, rng() % 50};
      for (std::size_t s = rng() % 3; s > 0; --s) c.surfaces.insert(word(4) + letters[10 + rng() % 2]);
      concepts.push_back(c);
    }
    std::vector<RelationInstance> rels;
    for (std::size_t e = rng() % 10; e > 0; --e) {
      const auto& a = concepts[rng() % n].stem;
      const auto& b = concepts[rng() % n].stem;
      if (a == b) continue;
      std::vector<VerseRef> ev;
      for (std::size_t k = rng() % 3; k > 0; --k) ev.push_back({static_cast<int>(1 + rng() % 114), static_cast<int>(1 + rng() % 200)});
      rels.push_back({a, b, "rel_" + std::to_string(rng() % 3), ev, 0, ev.size()});
    }
    const auto g = build_graph(concepts, rels, kNs).graph;
    const std::string ttl = export_turtle(g);
    const auto back = import_turtle(ttl);
    ASSERT_EQ(back, g) << ttl;
    ASSERT_EQ(export_turtle(back), ttl);
  }
}
