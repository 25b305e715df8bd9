#pragma once

// Arabic normalization, tokenization, stop-word removal and light stemming.
//
// Every routine here is a pure function of (input, config). Matching in the
// rest of the pipeline is always done on normalized, undiacritized text.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qonto/error.hpp"
#include "qonto/textio.hpp"
#include "qonto/utf8.hpp"
#include "qonto/verse.hpp"

namespace qonto {

struct NormalizationConfig {
  bool strip_diacritics = true;
  bool strip_tatweel = true;
  bool unify_alef = true;       // آ أ إ ٱ -> ا
  bool unify_ya = true;         // ى -> ي
  bool unify_ta_marbuta = false;  // ة -> ه

  friend bool operator==(const NormalizationConfig&, const NormalizationConfig&) = default;
};

/// Affix lists for the light stemmer. Lists are kept longest-first; the
/// first entry whose removal leaves at least `min_stem_len` letters wins.
struct StemmerConfig {
  std::vector<std::string> prefixes;
  std::vector<std::string> suffixes;
  std::size_t min_stem_len = 3;
  std::set<std::string> stop_words;
  /// Words returned unchanged (e.g. الله, which affix stripping mangles).
  std::set<std::string> protected_words;

  friend bool operator==(const StemmerConfig&, const StemmerConfig&) = default;

  /// Sorts both affix lists by descending letter count (stable) and checks
  /// the invariants.
  void canonicalize();
  void validate() const;
};

struct Token {
  std::string surface;  // normalized form
  std::string stem;
  VerseRef verse;
  std::size_t position = 0;  // index in the verse before stop-word removal

  friend bool operator==(const Token&, const Token&) = default;
};

namespace arabic {

inline bool is_diacritic(char32_t cp) {
  return (cp >= 0x0610 && cp <= 0x061A) || (cp >= 0x064B && cp <= 0x065F) || cp == 0x0670 ||
         (cp >= 0x06D6 && cp <= 0x06DC) || (cp >= 0x06DF && cp <= 0x06E8) ||
         (cp >= 0x06EA && cp <= 0x06ED);
}

inline bool is_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200F) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000 || cp == 0xFEFF;
}

inline bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
           (cp >= 0x7B && cp <= 0x7E);
  }
  return cp == 0xAB || cp == 0xBB || cp == 0x060C || cp == 0x060D || cp == 0x061B || cp == 0x061E ||
         cp == 0x061F || (cp >= 0x066A && cp <= 0x066D) || cp == 0x06D4 || cp == 0x06DD ||
         cp == 0x06DE || cp == 0x06E9 || (cp >= 0x2010 && cp <= 0x2027) ||
         (cp >= 0x2030 && cp <= 0x205E) || cp == 0xFD3E || cp == 0xFD3F;
}

}  // namespace arabic

inline std::string normalize(std::string_view text, const NormalizationConfig& cfg) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    char32_t cp = utf8::next(text, pos);
    if (cfg.strip_diacritics && arabic::is_diacritic(cp)) continue;
    if (cfg.strip_tatweel && cp == 0x0640) continue;
    if (cfg.unify_alef && (cp == 0x0622 || cp == 0x0623 || cp == 0x0625 || cp == 0x0671)) cp = 0x0627;
    if (cfg.unify_ya && cp == 0x0649) cp = 0x064A;
    if (cfg.unify_ta_marbuta && cp == 0x0629) cp = 0x0647;
    utf8::append(out, cp);
  }
  return out;
}

/// Splits on Unicode whitespace and punctuation. Never yields empty tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t cp = utf8::next(text, pos);
    if (arabic::is_space(cp) || arabic::is_punctuation(cp)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      utf8::append(cur, cp);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace detail {

inline bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
inline bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

}  // namespace detail

/// Light stemmer. One pass strips the longest admissible prefix, then the
/// longest admissible suffix; passes repeat until nothing changes, which
/// makes the result a fixed point (stem(stem(x)) == stem(x)).
inline std::string stem(std::string_view token, const StemmerConfig& cfg) {
  std::string cur(token);
  if (cur.empty() || cfg.protected_words.count(cur)) return cur;
  while (true) {
    const std::string before = cur;
    const std::size_t len = utf8::length(cur);
    for (const auto& p : cfg.prefixes) {
      if (detail::starts_with(cur, p) && len - utf8::length(p) >= cfg.min_stem_len &&
          utf8::length(p) < len) {
        cur.erase(0, p.size());
        break;
      }
    }
    if (cfg.protected_words.count(cur)) return cur;
    const std::size_t len2 = utf8::length(cur);
    for (const auto& s : cfg.suffixes) {
      if (detail::ends_with(cur, s) && utf8::length(s) < len2 && len2 - utf8::length(s) >= cfg.min_stem_len) {
        cur.erase(cur.size() - s.size());
        break;
      }
    }
    if (cur == before || cfg.protected_words.count(cur)) return cur;
  }
}

/// normalize -> tokenize -> drop stop-words -> stem.
inline std::vector<Token> preprocess_verse(const Verse& v, const NormalizationConfig& ncfg,
                                           const StemmerConfig& scfg) {
  std::vector<Token> out;
  const auto surfaces = tokenize(normalize(v.text, ncfg));
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    if (scfg.stop_words.count(surfaces[i])) continue;
    out.push_back(Token{surfaces[i], stem(surfaces[i], scfg), v.ref(), i});
  }
  return out;
}

/// Separator between the stems of a multi-word concept key ("بني_اسرائيل").
inline constexpr std::string_view kConceptJoiner = "_";

/// Canonical concept key for a raw word or phrase: each word normalized and
/// stemmed, words joined by `kConceptJoiner`. Mined keys map to themselves.
inline std::string canonical_term(std::string_view phrase, const NormalizationConfig& ncfg,
                                  const StemmerConfig& scfg) {
  std::vector<std::string> parts;
  // tokenize() splits on '_' as well, so joined keys decompose cleanly.
  for (const auto& w : tokenize(normalize(phrase, ncfg))) parts.push_back(stem(w, scfg));
  return text::join(parts, kConceptJoiner);
}

// ---------------------------------------------------------------------------
// Config documents

inline void StemmerConfig::canonicalize() {
  const auto by_len = [](const std::string& a, const std::string& b) {
    return utf8::length(a) > utf8::length(b);
  };
  std::stable_sort(prefixes.begin(), prefixes.end(), by_len);
  std::stable_sort(suffixes.begin(), suffixes.end(), by_len);
  validate();
}

inline void StemmerConfig::validate() const {
  if (min_stem_len < 2) throw Error("arabic", "min_stem_len must be >= 2");
  for (const auto* list : {&prefixes, &suffixes}) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      if ((*list)[i].empty()) throw Error("arabic", "empty affix entry");
      if (i && utf8::length((*list)[i]) > utf8::length((*list)[i - 1]))
        throw Error("arabic", "affix list not sorted longest-first at '" + (*list)[i] + "'");
    }
  }
}

namespace detail {

inline bool parse_flag(const text::SectionLine& l, std::string_view value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  throw ParseError("arabic", l.line_no, "expected true/false, got '" + std::string(value) + "'");
}

inline std::pair<std::string, std::string> key_value(const text::SectionLine& l) {
  const auto eq = l.content.find('=');
  if (eq == std::string::npos) throw ParseError("arabic", l.line_no, "expected key = value");
  return {std::string(text::trim(std::string_view(l.content).substr(0, eq))),
          std::string(text::trim(std::string_view(l.content).substr(eq + 1)))};
}

inline bool known_section(const std::string& s) {
  return s == "normalization" || s == "stemmer" || s == "prefixes" || s == "suffixes" || s == "stopwords" ||
         s == "protected";
}

}  // namespace detail

/// Reads the `[normalization]` section (`key = true|false`). Other known
/// sections are ignored so one file may carry both configs.
inline NormalizationConfig parse_normalization_config(std::istream& in) {
  NormalizationConfig cfg;
  for (const auto& l : text::read_sections(in, "arabic")) {
    if (!detail::known_section(l.section))
      throw ParseError("arabic", l.line_no, "unknown section '" + l.section + "'");
    if (l.section != "normalization") continue;
    const auto [key, value] = detail::key_value(l);
    const bool flag = detail::parse_flag(l, value);
    if (key == "strip_diacritics") cfg.strip_diacritics = flag;
    else if (key == "strip_tatweel") cfg.strip_tatweel = flag;
    else if (key == "unify_alef") cfg.unify_alef = flag;
    else if (key == "unify_ya") cfg.unify_ya = flag;
    else if (key == "unify_ta_marbuta") cfg.unify_ta_marbuta = flag;
    else throw ParseError("arabic", l.line_no, "unknown normalization key '" + key + "'");
  }
  return cfg;
}

/// Reads `[stemmer]`, `[prefixes]`, `[suffixes]`, `[stopwords]` and
/// `[protected]`. Entries are normalized with `ncfg` so they match
/// normalized text.
inline StemmerConfig parse_stemmer_config(std::istream& in, const NormalizationConfig& ncfg) {
  StemmerConfig cfg;
  for (const auto& l : text::read_sections(in, "arabic")) {
    if (!detail::known_section(l.section))
      throw ParseError("arabic", l.line_no, "unknown section '" + l.section + "'");
    if (l.section == "stemmer") {
      const auto [key, value] = detail::key_value(l);
      if (key != "min_stem_len") throw ParseError("arabic", l.line_no, "unknown stemmer key '" + key + "'");
      try {
        cfg.min_stem_len = std::stoul(value);
      } catch (const std::exception&) {
        throw ParseError("arabic", l.line_no, "min_stem_len is not a number");
      }
      continue;
    }
    if (l.section == "normalization") continue;
    if (l.section.empty()) throw ParseError("arabic", l.line_no, "entry outside of any section");
    const std::string entry = normalize(l.content, ncfg);
    if (l.section == "prefixes") cfg.prefixes.push_back(entry);
    else if (l.section == "suffixes") cfg.suffixes.push_back(entry);
    else if (l.section == "stopwords") cfg.stop_words.insert(entry);
    else cfg.protected_words.insert(entry);
  }
  cfg.canonicalize();
  return cfg;
}

/// Stop-word list file: either a `[stopwords]` section or bare lines.
inline std::set<std::string> parse_stoplist(std::istream& in, const NormalizationConfig& ncfg) {
  std::set<std::string> out;
  for (const auto& l : text::read_sections(in, "arabic")) {
    if (l.section.empty() || l.section == "stopwords") out.insert(normalize(l.content, ncfg));
  }
  return out;
}

inline std::string format_config(const NormalizationConfig& n, const StemmerConfig& s) {
  std::ostringstream out;
  const auto b = [](bool f) { return f ? "true" : "false"; };
  out << "[normalization]\n"
      << "strip_diacritics = " << b(n.strip_diacritics) << "\n"
      << "strip_tatweel = " << b(n.strip_tatweel) << "\n"
      << "unify_alef = " << b(n.unify_alef) << "\n"
      << "unify_ya = " << b(n.unify_ya) << "\n"
      << "unify_ta_marbuta = " << b(n.unify_ta_marbuta) << "\n"
      << "\n[stemmer]\nmin_stem_len = " << s.min_stem_len << "\n";
  out << "\n[prefixes]\n";
  for (const auto& p : s.prefixes) out << p << "\n";
  out << "\n[suffixes]\n";
  for (const auto& x : s.suffixes) out << x << "\n";
  out << "\n[stopwords]\n";
  for (const auto& w : s.stop_words) out << w << "\n";
  out << "\n[protected]\n";
  for (const auto& w : s.protected_words) out << w << "\n";
  return out.str();
}

}  // namespace qonto
