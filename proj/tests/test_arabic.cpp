#include <gtest/gtest.h>

#include <sstream>

#include "qonto/arabic.hpp"
#include "qonto/textio.hpp"
#include "qonto/utf8.hpp"
#include "test_paths.hpp"

using namespace qonto;

namespace {

const char* kVerse1 =
    "لقد أرسلنا نوحا إلى قومه فقال يا قوم اعبدوا الله ما لكم من إله غيره إني أخاف عليكم عذاب يوم عظيم";
const char* kVerse2 = "وإلى عاد أخاهم هودا قال يا قوم اعبدوا الله ما لكم من إله غيره أفلا تتقون";

StemmerConfig small_stemmer() {
  StemmerConfig s;
  s.prefixes = {"ال", "و"};
  s.suffixes = {"ون", "ه"};
  s.canonicalize();
  return s;
}

}  // namespace

TEST(Utf8, DecodeEncodeRoundTrip) {
  const std::string s = "abc قال ٱ";
  EXPECT_EQ(utf8::encode(utf8::decode(s)), s);
  EXPECT_EQ(utf8::length("قال"), 3u);
  EXPECT_TRUE(utf8::valid(s));
}

TEST(Utf8, InvalidBytesBecomeReplacement) {
  const std::string bad = "a\xC3";
  EXPECT_FALSE(utf8::valid(bad));
  const auto cps = utf8::decode(bad);
  ASSERT_EQ(cps.size(), 2u);
  EXPECT_EQ(cps[1], utf8::kReplacement);
  EXPECT_FALSE(utf8::valid("\xED\xA0\x80"));  // surrogate
}

TEST(TextIo, SplitJoinTrim) {
  EXPECT_EQ(text::split("a\tb\t", '\t'), (std::vector<std::string>{"a", "b", ""}));
  EXPECT_EQ(text::join({"x", "y"}, "_"), "x_y");
  EXPECT_EQ(text::trim("  k \t"), "k");
}

TEST(TextIo, GetlineStripsBomAndCr) {
  std::istringstream in("\xEF\xBB\xBFone\r\ntwo\n");
  std::string line;
  std::size_t n = 0;
  ASSERT_TRUE(text::getline(in, line, n));
  EXPECT_EQ(line, "one");
  ASSERT_TRUE(text::getline(in, line, n));
  EXPECT_EQ(line, "two");
  EXPECT_EQ(n, 2u);
}

TEST(TextIo, MalformedSectionHeader) {
  std::istringstream in("[ok]\nx\n[bad\n");
  try {
    text::read_sections(in, "arabic");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Normalize, StripsDiacritics) {
  EXPECT_EQ(normalize("قَالَ", {}), "قال");
}

TEST(Normalize, UnifiesAlefAfterStripping) {
  EXPECT_EQ(normalize("أُولِي", {}), "اولي");
  EXPECT_EQ(normalize("آإٱأ", {}), "اااا");
}

TEST(Normalize, FlagsAreIndependent) {
  NormalizationConfig keep;
  keep.strip_diacritics = false;
  keep.unify_alef = false;
  keep.unify_ya = false;
  keep.strip_tatweel = false;
  EXPECT_EQ(normalize("قَالَ", keep), "قَالَ");
  EXPECT_EQ(normalize("إلى", keep), "إلى");
  EXPECT_EQ(normalize("قـال", keep), "قـال");
  EXPECT_EQ(normalize("قـال", {}), "قال");
  EXPECT_EQ(normalize("موسى", {}), "موسي");
  NormalizationConfig ta;
  ta.unify_ta_marbuta = true;
  EXPECT_EQ(normalize("رحمة", ta), "رحمه");
  EXPECT_EQ(normalize("رحمة", {}), "رحمة");
}

TEST(Normalize, SuperscriptAlefAndQuranicMarksRemoved) {
  // U+0670 and the small high marks U+06D6..06DC.
  EXPECT_EQ(normalize("إِلَٰهٍ", {}), "اله");
  EXPECT_EQ(normalize("عَلِيمٌۖ", {}), "عليم");
}

TEST(Tokenize, WhitespaceSplit) {
  EXPECT_EQ(tokenize("يا قوم اعبدوا الله"), (std::vector<std::string>{"يا", "قوم", "اعبدوا", "الله"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("  ،  ").empty());
}

TEST(Tokenize, PunctuationSplits) {
  EXPECT_EQ(tokenize("قال،قوم؟ نعم."), (std::vector<std::string>{"قال", "قوم", "نعم"}));
  EXPECT_EQ(tokenize("بني_اسرائيل"), (std::vector<std::string>{"بني", "اسرائيل"}));
}

TEST(Tokenize, FirstTransactionVerseCount) {
  // Counted word by word: لقد أرسلنا نوحا إلى قومه فقال يا قوم اعبدوا الله
  // ما لكم من إله غيره إني أخاف عليكم عذاب يوم عظيم.
  EXPECT_EQ(tokenize(normalize(kVerse1, {})).size(), 21u);
}

TEST(Stem, StripsConfiguredPrefix) {
  EXPECT_EQ(stem("الكتاب", small_stemmer()), "كتاب");
}

TEST(Stem, ShortTokenUnchanged) {
  EXPECT_EQ(stem("هن", small_stemmer()), "هن");
  EXPECT_EQ(stem("وه", small_stemmer()), "وه");
}

TEST(Stem, MinLengthGuard) {
  auto s = small_stemmer();
  EXPECT_EQ(stem("وله", s), "وله");  // either strip would leave two letters
  EXPECT_EQ(stem("وكتابه", s), "كتاب");
  s.min_stem_len = 5;
  s.validate();
  EXPECT_EQ(stem("الكتاب", s), "الكتاب");
}

TEST(Stem, LongestAffixFirst) {
  StemmerConfig s;
  s.prefixes = {"و", "وال"};
  s.suffixes = {};
  s.canonicalize();
  EXPECT_EQ(s.prefixes.front(), "وال");
  EXPECT_EQ(stem("والكتاب", s), "كتاب");
}

TEST(Stem, ProtectedWords) {
  auto s = small_stemmer();
  s.protected_words = {"الله"};
  s.min_stem_len = 2;
  EXPECT_EQ(stem("الله", s), "الله");
  EXPECT_EQ(stem("والله", s), "الله");
}

TEST(Stem, ConfigValidation) {
  StemmerConfig s;
  s.min_stem_len = 1;
  EXPECT_THROW(s.validate(), Error);
  StemmerConfig e;
  e.prefixes = {""};
  EXPECT_THROW(e.canonicalize(), Error);
  StemmerConfig u;
  u.prefixes = {"و", "ال"};
  EXPECT_THROW(u.validate(), Error);
}

TEST(Preprocess, SecondTransactionVerse) {
  const auto cfg = qtest::shipped_config();
  const auto toks = preprocess_verse({7, 65, kVerse2}, cfg.ncfg, cfg.scfg);
  std::vector<std::string> stems;
  for (const auto& t : toks) stems.push_back(t.stem);
  EXPECT_EQ(stems, (std::vector<std::string>{"عاد", "اخاهم", "هود", "قال", "قوم", "اعبد", "الله", "اله", "غير", "تتق"}));
  // Positions index the verse before stop-word removal: وإلى is token 0.
  EXPECT_EQ(toks.front().position, 1u);
  for (std::size_t i = 1; i < toks.size(); ++i) EXPECT_LT(toks[i - 1].position, toks[i].position);
  EXPECT_EQ(toks.front().verse, (VerseRef{7, 65}));
}

TEST(Preprocess, OnlyStopWords) {
  const auto cfg = qtest::shipped_config();
  EXPECT_TRUE(preprocess_verse({1, 1, "يا من ما"}, cfg.ncfg, cfg.scfg).empty());
}

TEST(Preprocess, NoStopWordsKeepsEveryToken) {
  auto cfg = qtest::shipped_config();
  cfg.scfg.stop_words.clear();
  EXPECT_EQ(preprocess_verse({7, 59, kVerse1}, cfg.ncfg, cfg.scfg).size(), tokenize(normalize(kVerse1, cfg.ncfg)).size());
}

TEST(CanonicalTerm, JoinsStemmedWords) {
  const auto cfg = qtest::shipped_config();
  EXPECT_EQ(canonical_term("بني إسرائيل", cfg.ncfg, cfg.scfg), "بني_اسرائيل");
  EXPECT_EQ(canonical_term("بني_اسرائيل", cfg.ncfg, cfg.scfg), "بني_اسرائيل");
  EXPECT_EQ(canonical_term("أرسلنا", cfg.ncfg, cfg.scfg), "ارسل");
}

TEST(ConfigDocument, RoundTrips) {
  const auto cfg = qtest::shipped_config();
  const std::string doc = format_config(cfg.ncfg, cfg.scfg);
  std::istringstream a(doc), b(doc);
  const auto n2 = parse_normalization_config(a);
  const auto s2 = parse_stemmer_config(b, n2);
  EXPECT_EQ(n2, cfg.ncfg);
  EXPECT_EQ(s2, cfg.scfg);
}

TEST(ConfigDocument, Errors) {
  std::istringstream unknown_key("[normalization]\nshout = true\n");
  EXPECT_THROW(parse_normalization_config(unknown_key), ParseError);
  std::istringstream bad_flag("[normalization]\nunify_ya = maybe\n");
  EXPECT_THROW(parse_normalization_config(bad_flag), ParseError);
  std::istringstream unknown_section("[affixes]\nال\n");
  EXPECT_THROW(parse_stemmer_config(unknown_section, {}), ParseError);
  std::istringstream bad_len("[stemmer]\nmin_stem_len = 1\n");
  EXPECT_THROW(parse_stemmer_config(bad_len, {}), Error);
}

TEST(Stoplist, BareLinesOrSection) {
  std::istringstream bare("يا\nإلى\n");
  EXPECT_EQ(parse_stoplist(bare, {}), (std::set<std::string>{"يا", "الي"}));
  std::istringstream sec("[stopwords]\nمن\n");
  EXPECT_EQ(parse_stoplist(sec, {}), (std::set<std::string>{"من"}));
}
