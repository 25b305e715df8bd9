#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "qonto/relations.hpp"
#include "test_paths.hpp"

using namespace qonto;

namespace {

Lexicons load(const std::string& doc) {
  const auto cfg = qtest::shipped_config();
  std::istringstream in(doc);
  return load_lexicons(in, cfg.ncfg, cfg.scfg);
}

Lexicons load_file(const std::filesystem::path& p) { return load(qtest::slurp(p)); }

Transaction tx(int aya, std::vector<std::pair<std::string, std::size_t>> items) {
  std::sort(items.begin(), items.end());
  Transaction t;
  t.verse = {7, aya};
  for (auto& [i, p] : items) {
    t.items.push_back(i);
    t.positions.push_back(p);
  }
  return t;
}

AssociationRule rule(std::vector<std::string> ant, std::string cons) {
  return {std::move(ant), std::move(cons), Ratio(0), Ratio(0), 0};
}

const char* kDoc = R"(
[relation_types]
prophet_nation
kind_of

[categories]
نبي: نوح, هود
قوم: قوم
رتبة: الأنبياء

[triggers]
أرسلنا -> prophet_nation
الأنبياء -> kind_of

[patterns]
نبي + أرسلنا --> قوم @ prophet_nation
نبي + الأنبياء -> رتبة @ kind_of
)";

}  // namespace

TEST(LoadLexicons, WorkedExampleFixture) {
  const auto lx = load_file(qtest::fixture_dir() / "core_lexicon.txt");
  EXPECT_EQ(lx.triggers.size(), 3u);
  EXPECT_EQ(lx.patterns.size(), 4u);
  EXPECT_GE(lx.registry.size(), 4u);
  EXPECT_EQ(lx.patterns[2].category, "قوم");
  EXPECT_EQ(lx.patterns[2].consequent_category, "عذاب");
  EXPECT_EQ(lx.patterns[2].relation_type, "nation_torment");
  EXPECT_FALSE(lx.patterns[2].strict);
  EXPECT_EQ(lx.triggers[lx.patterns[1].trigger].name(), "أرسلنا");
}

TEST(LoadLexicons, ShippedLexiconResolves) {
  const auto lx = load_file(qtest::data_dir() / "lexicon.txt");
  EXPECT_TRUE(lx.lexicon.contains("نبي", "ادم"));
  EXPECT_TRUE(lx.lexicon.contains("نبي", "نوح"));
  for (const char* not_prophet : {"رسل", "رجل", "نفس", "هدي", "ريكم"}) EXPECT_FALSE(lx.lexicon.contains("نبي", not_prophet));
  for (const auto& p : lx.patterns) EXPECT_TRUE(lx.registry.contains(p.relation_type));
}

TEST(LoadLexicons, EmptyDocument) {
  const auto lx = load("");
  EXPECT_TRUE(lx.triggers.empty());
  EXPECT_TRUE(lx.patterns.empty());
  EXPECT_EQ(lx.registry.size(), 0u);
}

TEST(LoadLexicons, UnknownCategoryNamed) {
  try {
    load("[relation_types]\nx\n[categories]\nنبي: نوح\n[triggers]\nأرسلنا -> x\n[patterns]\nملاك + أرسلنا -> نبي @ x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("ملاك"), std::string::npos);
    EXPECT_EQ(e.line(), 8u);
  }
}

TEST(LoadLexicons, OtherErrors) {
  EXPECT_THROW(load("[relation_types]\nx\nx\n"), ParseError);
  EXPECT_THROW(load("[relation_types]\nevidence\n"), ParseError);
  EXPECT_THROW(load("[triggers]\nأرسلنا -> nope\n"), ParseError);
  EXPECT_THROW(load("[relation_types]\nx\n[categories]\nنبي: نوح\n[patterns]\nنبي + نبي -> نبي @ x\n"), ParseError);
  EXPECT_THROW(load("[relation_types]\nx\n[categories]\nنبي: نوح\n[triggers]\nب -> x\n[patterns]\nنبي + ب -> نبي\n"),
               ParseError);
  EXPECT_THROW(load("[colours]\nred\n"), ParseError);
  EXPECT_THROW(load("[categories]\nno colon here\n"), ParseError);
}

TEST(LoadLexicons, StrictFlagAndArrowForms) {
  const auto lx = load("[relation_types]\nx\n[categories]\nنبي: نوح\nقوم: قوم\n[triggers]\nأرسلنا -> x\n"
                       "[patterns]\nأرسلنا + نبي -> قوم @ x strict\n");
  ASSERT_EQ(lx.patterns.size(), 1u);
  EXPECT_TRUE(lx.patterns[0].strict);
  EXPECT_TRUE(lx.patterns[0].trigger_first);
  EXPECT_EQ(lx.patterns[0].category, "نبي");
}

TEST(TriggerCooccurrences, EarliestPositionPerVerse) {
  const auto lx = load(kDoc);
  const std::vector<Transaction> ts{tx(59, {{"ارسل", 1}, {"نوح", 2}}), tx(60, {{"قوم", 0}})};
  const auto hits = find_trigger_cooccurrences(ts, lx.triggers);
  ASSERT_EQ(hits.count(0), 1u);
  EXPECT_EQ(hits.at(0), (std::vector<TriggerHit>{{{7, 59}, 1}}));
  EXPECT_EQ(hits.count(1), 0u);
  EXPECT_TRUE(find_trigger_cooccurrences(std::vector<Transaction>{tx(1, {{"قوم", 0}})}, lx.triggers).empty());
}

TEST(MatchPatterns, CategoryTriggerAndPosition) {
  const auto lx = load(kDoc);
  // verse 1: trigger after the prophet; verse 2: trigger before it.
  const std::vector<Transaction> ts{tx(1, {{"نوح", 0}, {"ارسل", 1}, {"قوم", 3}}),
                                    tx(2, {{"ارسل", 0}, {"هود", 1}, {"قوم", 2}})};
  const EvidenceIndex index(ts, lx.triggers);
  const std::vector<AssociationRule> rules{rule({"ارسل", "نوح"}, "قوم"), rule({"ارسل", "هود"}, "قوم"),
                                           rule({"قوم", "نوح"}, "ارسل")};
  const auto res = match_patterns(rules, lx, &index);
  ASSERT_EQ(res.accepted.size(), 1u);
  EXPECT_EQ(res.rejected, 2u);
  EXPECT_EQ(res.accepted[0].rule, 0u);
  EXPECT_EQ(res.accepted[0].subject, "نوح");
  EXPECT_EQ(res.accepted[0].evidence, (std::vector<VerseRef>{{7, 1}}));
  // Without evidence only the lexical conditions apply.
  EXPECT_EQ(match_patterns(rules, lx, nullptr).accepted.size(), 2u);
}

TEST(MatchPatterns, StrictChecksConsequent) {
  auto lx = load(kDoc);
  const std::vector<AssociationRule> rules{rule({"ارسل", "نوح"}, "غير")};
  EXPECT_EQ(match_patterns(rules, lx, nullptr).accepted.size(), 1u);
  lx.patterns[0].strict = true;
  EXPECT_EQ(match_patterns(rules, lx, nullptr).accepted.size(), 0u);
}

TEST(MatchPatterns, EmptyPatternListRejectsAll) {
  const auto lx = load("");
  const std::vector<AssociationRule> rules{rule({"a", "b"}, "c")};
  const auto res = match_patterns(rules, lx, nullptr);
  EXPECT_TRUE(res.accepted.empty());
  EXPECT_EQ(res.rejected, 1u);
}

TEST(MatchPatterns, SingleAntecedentUsesTriggerHits) {
  // نوح -> الأنبياء: the consequent itself is the kind_of tag.
  const auto lx = load(kDoc);
  const auto key = lx.triggers[1].stems.begin();
  const std::vector<Transaction> ts{tx(1, {{"نوح", 0}, {*key, 3}})};
  const EvidenceIndex index(ts, lx.triggers);
  const std::vector<AssociationRule> rules{rule({"نوح"}, *key)};
  const auto res = match_patterns(rules, lx, &index);
  ASSERT_EQ(res.accepted.size(), 1u);
  const auto rels = typed_relations(res.accepted, rules, lx);
  ASSERT_EQ(rels.size(), 1u);
  EXPECT_EQ(rels[0].subject, "نوح");
  EXPECT_EQ(rels[0].object, *key);
  EXPECT_EQ(rels[0].relation_type, "kind_of");
}

TEST(TypedRelations, MergesDuplicateTriples) {
  const auto lx = load(kDoc);
  const std::vector<AssociationRule> rules{rule({"ارسل", "نوح"}, "قوم"), rule({"ارسل", "نوح"}, "قوم")};
  const std::vector<PatternMatch> matches{{0, 0, "نوح", "ارسل", {{7, 2}, {7, 1}}}, {1, 0, "نوح", "ارسل", {{7, 2}, {7, 3}}}};
  const auto rels = typed_relations(matches, rules, lx);
  ASSERT_EQ(rels.size(), 1u);
  EXPECT_EQ(rels[0].evidence, (std::vector<VerseRef>{{7, 1}, {7, 2}, {7, 3}}));
  EXPECT_EQ(rels[0].cooccurrence, 3u);
  // Idempotent: feeding the same matches again changes nothing.
  EXPECT_EQ(typed_relations(matches, rules, lx), rels);
  const std::vector<PatternMatch> none{{0, 0, "نوح", "ارسل", {}}};
  EXPECT_TRUE(typed_relations(none, rules, lx).empty());
}

TEST(ConfidenceFilter, Thresholds) {
  std::vector<RelationInstance> rels{{"a", "b", "t", {}, 0, 3}, {"a", "c", "t", {}, 0, 2}, {"a", "d", "t", {}, 0, 1}};
  EXPECT_EQ(confidence_filter(rels, 1), rels);
  EXPECT_EQ(confidence_filter(rels, 2).size(), 2u);
  EXPECT_TRUE(confidence_filter(rels, 4).empty());
  EXPECT_THROW(confidence_filter(rels, 0), Error);
}

TEST(RelationsFile, RoundTrip) {
  std::vector<RelationInstance> rels{{"نوح", "قوم", "prophet_nation", {{7, 59}, {11, 25}}, 0, 2}};
  std::ostringstream out;
  write_relations(out, rels);
  EXPECT_EQ(out.str(), "نوح\tprophet_nation\tقوم\t7:59 11:25\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_relations(in), rels);
  std::istringstream bad("a\tt\tb\t7-59\n");
  EXPECT_THROW(read_relations(bad), ParseError);
}

TEST(MatchReport, Layout) {
  const auto lx = load(kDoc);
  const std::vector<AssociationRule> rules{rule({"ارسل", "نوح"}, "قوم"), rule({"a", "b"}, "c")};
  std::ostringstream out;
  write_match_report(out, rules, match_patterns(rules, lx, nullptr), lx);
  EXPECT_EQ(out.str(), "ارسل + نوح --> قوم\tنبي + أرسلنا --> قوم @ prophet_nation\tAccepted\n"
                       "a + b --> c\t--\tRejected\n");
}
