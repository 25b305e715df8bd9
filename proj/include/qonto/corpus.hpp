#pragma once

// Verse-per-line corpus ingestion (Tanzil `sura|aya|text`), sub-corpus
// selection and corpus statistics.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qonto/arabic.hpp"
#include "qonto/error.hpp"
#include "qonto/rational.hpp"
#include "qonto/textio.hpp"
#include "qonto/utf8.hpp"
#include "qonto/verse.hpp"

namespace qonto {

/// Half-open range of verse indices.
struct VerseRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const VerseRange&, const VerseRange&) = default;
};

/// Immutable, (sura, aya)-ordered collection of verses.
class Corpus {
 public:
  Corpus() = default;

  /// Validates, sorts and indexes `verses`. Throws on duplicates, sura
  /// numbers outside 1..114, aya < 1 or blank text.
  static Corpus from_verses(std::vector<Verse> verses) {
    for (const auto& v : verses) check_verse(v);
    std::sort(verses.begin(), verses.end(),
              [](const Verse& a, const Verse& b) { return a.ref() < b.ref(); });
    for (std::size_t i = 1; i < verses.size(); ++i) {
      if (verses[i].ref() == verses[i - 1].ref())
        throw Error("corpus", "duplicate verse " + verses[i].ref().str());
    }
    Corpus c;
    c.verses_ = std::move(verses);
    c.reindex();
    return c;
  }

  const std::vector<Verse>& verses() const { return verses_; }
  const std::map<int, VerseRange>& sura_index() const { return sura_index_; }
  std::size_t size() const { return verses_.size(); }
  bool empty() const { return verses_.empty(); }

  std::vector<int> suras() const {
    std::vector<int> out;
    for (const auto& [s, r] : sura_index_) out.push_back(s);
    return out;
  }

  std::span<const Verse> sura(int sura_no) const {
    const auto it = sura_index_.find(sura_no);
    if (it == sura_index_.end()) throw Error("corpus", "unknown sura " + std::to_string(sura_no));
    return std::span<const Verse>(verses_).subspan(it->second.begin, it->second.size());
  }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.verses_ == b.verses_; }

 private:
  static void check_verse(const Verse& v) {
    if (v.sura < 1 || v.sura > kMaxSura)
      throw Error("corpus", "sura number " + std::to_string(v.sura) + " out of range 1..114");
    if (v.aya < 1) throw Error("corpus", "aya number must be >= 1 in " + v.ref().str());
    if (text::trim(v.text).empty()) throw Error("corpus", "empty text in " + v.ref().str());
  }

  void reindex() {
    sura_index_.clear();
    for (std::size_t i = 0; i < verses_.size(); ++i) {
      auto [it, inserted] = sura_index_.try_emplace(verses_[i].sura, VerseRange{i, i + 1});
      if (!inserted) it->second.end = i + 1;
    }
  }

  std::vector<Verse> verses_;
  std::map<int, VerseRange> sura_index_;
};

enum class CorpusFormat { tanzil_pipe };

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty() || s.size() > 6) return false;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

/// Parses `sura|aya|text` lines. `#` comment lines and blank lines are
/// skipped; errors carry the offending line number.
inline Corpus parse_corpus(std::istream& in, CorpusFormat format = CorpusFormat::tanzil_pipe) {
  (void)format;
  std::vector<Verse> verses;
  std::set<VerseRef> seen;
  std::string line;
  std::size_t line_no = 0;
  while (text::getline(in, line, line_no)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!utf8::valid(line)) throw ParseError("corpus", line_no, "invalid UTF-8");
    const auto p1 = line.find('|');
    const auto p2 = p1 == std::string::npos ? std::string::npos : line.find('|', p1 + 1);
    if (p2 == std::string::npos) throw ParseError("corpus", line_no, "expected sura|aya|text");
    Verse v;
    if (!detail::parse_int(text::trim(std::string_view(line).substr(0, p1)), v.sura) ||
        !detail::parse_int(text::trim(std::string_view(line).substr(p1 + 1, p2 - p1 - 1)), v.aya))
      throw ParseError("corpus", line_no, "malformed sura/aya number");
    v.text = line.substr(p2 + 1);
    if (text::trim(v.text).empty()) throw ParseError("corpus", line_no, "empty verse text");
    if (v.sura < 1 || v.sura > kMaxSura)
      throw ParseError("corpus", line_no, "sura number " + std::to_string(v.sura) + " out of range 1..114");
    if (v.aya < 1) throw ParseError("corpus", line_no, "aya number must be >= 1");
    if (!seen.insert(v.ref()).second) throw ParseError("corpus", line_no, "duplicate verse " + v.ref().str());
    verses.push_back(std::move(v));
  }
  if (verses.empty()) throw Error("corpus", "empty input");
  return Corpus::from_verses(std::move(verses));
}

inline void write_corpus(std::ostream& out, const Corpus& c) {
  for (const auto& v : c.verses()) out << v.sura << '|' << v.aya << '|' << v.text << '\n';
}

/// Verses of the requested suras, in corpus order.
inline Corpus select_subcorpus(const Corpus& c, std::span<const int> sura_nos) {
  std::set<int> wanted;
  for (int s : sura_nos) {
    if (!c.sura_index().count(s)) throw Error("corpus", "unknown sura " + std::to_string(s));
    wanted.insert(s);
  }
  std::vector<Verse> out;
  for (int s : wanted) {
    const auto verses = c.sura(s);
    out.insert(out.end(), verses.begin(), verses.end());
  }
  return Corpus::from_verses(std::move(out));
}

struct SuraStats {
  int sura = 0;
  std::size_t n_verses = 0;
  std::size_t n_tokens = 0;

  friend bool operator==(const SuraStats&, const SuraStats&) = default;
};

struct CorpusStats {
  std::size_t n_suras = 0;
  std::size_t n_verses = 0;
  std::size_t n_tokens = 0;
  std::size_t n_distinct_tokens = 0;
  std::size_t n_letters = 0;
  Ratio avg_token_len;  // letters per token
  std::vector<SuraStats> per_sura;
};

/// Counts over tokenize(normalize(text)); letters are code points of the
/// normalized tokens, so diacritics are excluded when `ncfg` strips them.
inline CorpusStats corpus_stats(const Corpus& c, const NormalizationConfig& ncfg) {
  if (c.empty()) throw Error("corpus", "statistics of an empty corpus");
  CorpusStats st;
  std::unordered_set<std::string> distinct;
  for (const auto& [sura_no, range] : c.sura_index()) {
    SuraStats s{sura_no, range.size(), 0};
    for (const auto& v : c.sura(sura_no)) {
      for (auto& tok : tokenize(normalize(v.text, ncfg))) {
        ++s.n_tokens;
        st.n_letters += utf8::length(tok);
        distinct.insert(std::move(tok));
      }
    }
    st.n_tokens += s.n_tokens;
    st.per_sura.push_back(s);
  }
  st.n_suras = st.per_sura.size();
  st.n_verses = c.size();
  st.n_distinct_tokens = distinct.size();
  st.avg_token_len = st.n_tokens ? Ratio(static_cast<std::int64_t>(st.n_letters), static_cast<std::int64_t>(st.n_tokens))
                                 : Ratio(0);
  std::size_t sum = 0;
  for (const auto& s : st.per_sura) sum += s.n_verses;
  if (sum != st.n_verses) throw Error("corpus", "per-sura verse counts do not add up");
  return st;
}

/// `sura<TAB>verses<TAB>tokens` per sura, then a `total` row, then
/// `#`-prefixed summary lines.
inline void write_stats_report(std::ostream& out, const CorpusStats& st) {
  out << "sura\tverses\ttokens\n";
  for (const auto& s : st.per_sura) out << s.sura << '\t' << s.n_verses << '\t' << s.n_tokens << '\n';
  out << "total\t" << st.n_verses << '\t' << st.n_tokens << '\n';
  out << "# suras\t" << st.n_suras << '\n'
      << "# distinct_tokens\t" << st.n_distinct_tokens << '\n'
      << "# letters\t" << st.n_letters << '\n'
      << "# avg_token_len\t" << format_decimal(st.avg_token_len, 5) << '\n';
}

}  // namespace qonto
