#pragma once

// Key-term extraction: stop-word delimited stem n-grams scored by frequency
// with a multi-word boost, truncated to a per-sura term list that becomes the
// concept vocabulary for mining.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "qonto/arabic.hpp"
#include "qonto/error.hpp"
#include "qonto/rational.hpp"
#include "qonto/textio.hpp"

namespace qonto {

/// Earliest occurrence of a candidate: (verse index, token position).
struct TermPosition {
  std::size_t verse = 0;
  std::size_t token = 0;

  friend auto operator<=>(const TermPosition&, const TermPosition&) = default;
};

struct CandidateTerm {
  std::vector<std::string> stems;  // 1..3 contiguous stems
  std::size_t freq = 0;
  TermPosition first_pos;

  /// Concept identifier used by the mining stages.
  std::string key() const { return text::join(stems, kConceptJoiner); }

  friend bool operator==(const CandidateTerm&, const CandidateTerm&) = default;
};

struct ScoredTerm {
  CandidateTerm term;
  Ratio score;

  friend bool operator==(const ScoredTerm&, const ScoredTerm&) = default;
};

/// Per-sura vocabulary. `sura == 0` marks a vocabulary pooled over every
/// selected sura.
struct TermList {
  int sura = 0;
  std::vector<ScoredTerm> terms;

  friend bool operator==(const TermList&, const TermList&) = default;
};

/// Candidates are the maximal runs of adjacent (stop-word free) stems, cut
/// into windows of `max_len` when longer, plus every unigram. Adjacency uses
/// Token::position, so a removed stop-word breaks a run.
inline std::vector<CandidateTerm> extract_candidates(std::span<const std::vector<Token>> verses,
                                                     std::size_t max_len = 3) {
  if (max_len < 1 || max_len > 3) throw Error("terms", "max_len must be in [1,3]");
  std::map<std::vector<std::string>, CandidateTerm> acc;
  const auto add = [&](std::vector<std::string> stems, TermPosition pos) {
    auto [it, inserted] = acc.try_emplace(stems, CandidateTerm{stems, 0, pos});
    ++it->second.freq;
    if (pos < it->second.first_pos) it->second.first_pos = pos;
  };
  for (std::size_t vi = 0; vi < verses.size(); ++vi) {
    const auto& toks = verses[vi];
    std::size_t run_start = 0;
    for (std::size_t i = 0; i <= toks.size(); ++i) {
      const bool breaks = i == toks.size() || (i > run_start && toks[i].position != toks[i - 1].position + 1);
      if (!breaks) continue;
      const std::size_t len = i - run_start;
      for (std::size_t j = run_start; j < i; ++j) add({toks[j].stem}, {vi, toks[j].position});
      if (len > 1 && max_len > 1) {
        const std::size_t n = std::min(len, max_len);
        for (std::size_t j = run_start; j + n <= i; ++j) {
          std::vector<std::string> gram;
          for (std::size_t k = j; k < j + n; ++k) gram.push_back(toks[k].stem);
          add(std::move(gram), {vi, toks[j].position});
        }
      }
      run_start = i;
    }
  }
  std::vector<CandidateTerm> out;
  out.reserve(acc.size());
  for (auto& [k, c] : acc) out.push_back(std::move(c));
  return out;
}

/// Strict weak order of a term list: score desc, then first occurrence,
/// then stems lexicographically.
inline bool term_order(const ScoredTerm& a, const ScoredTerm& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.term.first_pos != b.term.first_pos) return a.term.first_pos < b.term.first_pos;
  return a.term.stems < b.term.stems;
}

inline std::vector<ScoredTerm> score_terms(std::span<const CandidateTerm> candidates,
                                           Ratio boost_multiword = Ratio(3, 2)) {
  std::vector<ScoredTerm> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    const Ratio base(static_cast<std::int64_t>(c.freq));
    out.push_back({c, c.stems.size() > 1 ? base * boost_multiword : base});
  }
  std::sort(out.begin(), out.end(), term_order);
  return out;
}

/// Exactly one of the two fields is set.
struct TermSelection {
  std::optional<std::size_t> limit;
  std::optional<std::size_t> min_freq;
};

inline TermList select_terms(std::span<const ScoredTerm> scored, const TermSelection& sel, int sura = 0) {
  if (sel.limit && sel.min_freq) throw Error("terms", "give either a limit or a min_freq, not both");
  if (!sel.min_freq && (!sel.limit || *sel.limit == 0))
    throw Error("terms", "term selection needs limit > 0 or min_freq");
  TermList out{sura, {}};
  if (sel.limit) {
    out.terms.assign(scored.begin(), scored.begin() + std::min(*sel.limit, scored.size()));
  } else {
    for (const auto& t : scored)
      if (t.term.freq >= *sel.min_freq) out.terms.push_back(t);
  }
  return out;
}

/// `sura<TAB>rank<TAB>score<TAB>stems<TAB>freq`, rank starting at 1, stems
/// space-joined.
inline void write_term_report(std::ostream& out, std::span<const TermList> lists) {
  for (const auto& l : lists) {
    for (std::size_t i = 0; i < l.terms.size(); ++i) {
      const auto& t = l.terms[i];
      out << l.sura << '\t' << (i + 1) << '\t' << format_decimal(t.score, 2) << '\t'
          << text::join(t.term.stems, " ") << '\t' << t.term.freq << '\n';
    }
  }
}

/// Reads a term report back, grouped per sura in file order. `first_pos`
/// is not stored; it is reconstructed from the rank so ordering survives.
inline std::vector<TermList> read_term_report(std::istream& in) {
  std::vector<TermList> out;
  std::string line;
  std::size_t line_no = 0;
  while (text::getline(in, line, line_no)) {
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 5) throw ParseError("terms", line_no, "expected 5 tab-separated columns");
    ScoredTerm t;
    int sura = 0;
    std::size_t rank = 0;
    try {
      sura = std::stoi(cols[0]);
      rank = std::stoul(cols[1]);
      t.term.freq = std::stoul(cols[4]);
      const BigRatio score = parse_decimal(cols[2]);
      t.score = Ratio(static_cast<std::int64_t>(numerator(score)), static_cast<std::int64_t>(denominator(score)));
    } catch (const std::exception&) {
      throw ParseError("terms", line_no, "malformed number");
    }
    for (auto& s : text::split(cols[3], ' '))
      if (!s.empty()) t.term.stems.push_back(std::move(s));
    if (t.term.stems.empty()) throw ParseError("terms", line_no, "empty stems column");
    t.term.first_pos = {rank, 0};
    if (out.empty() || out.back().sura != sura) out.push_back({sura, {}});
    out.back().terms.push_back(std::move(t));
  }
  return out;
}

}  // namespace qonto
