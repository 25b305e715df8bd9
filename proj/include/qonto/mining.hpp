#pragma once

// Verse transactions, concept supports, the average-based support band,
// level-wise Apriori over vertical bitsets, and association rules with
// confidence filtering.
//
// Counts are exact integers and every ratio is an exact rational; doubles
// only appear when a report is rendered.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qonto/arabic.hpp"
#include "qonto/corpus.hpp"
#include "qonto/error.hpp"
#include "qonto/rational.hpp"
#include "qonto/terms.hpp"
#include "qonto/textio.hpp"

namespace qonto {

/// One verse projected onto the concept vocabulary. `items` is sorted and
/// `positions[i]` is the first token position of `items[i]` in the verse.
struct Transaction {
  VerseRef verse;
  std::vector<std::string> items;
  std::vector<std::size_t> positions;

  bool contains(const std::string& item) const { return std::binary_search(items.begin(), items.end(), item); }

  std::optional<std::size_t> position_of(const std::string& item) const {
    const auto it = std::lower_bound(items.begin(), items.end(), item);
    if (it == items.end() || *it != item) return std::nullopt;
    return positions[static_cast<std::size_t>(it - items.begin())];
  }

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

namespace detail {

using TermHeads = std::unordered_map<std::string, std::vector<const CandidateTerm*>>;

inline TermHeads index_terms(const TermList& vocab) {
  TermHeads by_head;
  for (const auto& t : vocab.terms) by_head[t.term.stems.front()].push_back(&t.term);
  return by_head;
}

/// Calls fn(term, i) for every occurrence of a vocabulary term starting at
/// token i. Multi-word terms must occupy adjacent positions.
template <class Fn>
void for_each_term_occurrence(const std::vector<Token>& toks, const TermHeads& by_head, Fn&& fn) {
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto it = by_head.find(toks[i].stem);
    if (it == by_head.end()) continue;
    for (const CandidateTerm* term : it->second) {
      const auto& stems = term->stems;
      if (i + stems.size() > toks.size()) continue;
      bool ok = true;
      for (std::size_t k = 1; k < stems.size() && ok; ++k)
        ok = toks[i + k].stem == stems[k] && toks[i + k].position == toks[i].position + k;
      if (ok) fn(*term, i);
    }
  }
}

inline std::span<const Verse> vocabulary_verses(const Corpus& corpus, const TermList& vocab) {
  if (vocab.sura == 0) return corpus.verses();
  if (!corpus.sura_index().count(vocab.sura))
    throw Error("mining", "vocabulary is for sura " + std::to_string(vocab.sura) + " which is not in the corpus");
  return corpus.sura(vocab.sura);
}

}  // namespace detail

/// Projects every verse of the vocabulary's sura (every verse of the corpus
/// for a pooled vocabulary) onto the vocabulary.
inline std::vector<Transaction> build_transactions(const Corpus& corpus, const TermList& vocab,
                                                   const NormalizationConfig& ncfg, const StemmerConfig& scfg) {
  if (corpus.empty()) return {};
  const auto verses = detail::vocabulary_verses(corpus, vocab);
  const auto by_head = detail::index_terms(vocab);
  std::vector<Transaction> out;
  out.reserve(verses.size());
  for (const auto& v : verses) {
    const auto toks = preprocess_verse(v, ncfg, scfg);
    std::map<std::string, std::size_t> first;
    detail::for_each_term_occurrence(toks, by_head, [&](const CandidateTerm& term, std::size_t i) {
      first.try_emplace(term.key(), toks[i].position);
    });
    Transaction t{v.ref(), {}, {}};
    for (auto& [item, pos] : first) {
      t.items.push_back(item);
      t.positions.push_back(pos);
    }
    out.push_back(std::move(t));
  }
  return out;
}

/// Normalized surface forms under which each vocabulary concept occurs
/// (words of a multi-word term joined by a space).
inline std::map<std::string, std::set<std::string>> concept_surfaces(const Corpus& corpus, const TermList& vocab,
                                                                     const NormalizationConfig& ncfg,
                                                                     const StemmerConfig& scfg) {
  std::map<std::string, std::set<std::string>> out;
  if (corpus.empty()) return out;
  const auto by_head = detail::index_terms(vocab);
  for (const auto& v : detail::vocabulary_verses(corpus, vocab)) {
    const auto toks = preprocess_verse(v, ncfg, scfg);
    detail::for_each_term_occurrence(toks, by_head, [&](const CandidateTerm& term, std::size_t i) {
      std::string surface;
      for (std::size_t k = 0; k < term.stems.size(); ++k) surface += (k ? " " : "") + toks[i + k].surface;
      out[term.key()].insert(std::move(surface));
    });
  }
  return out;
}

/// Drops every item outside `keep`; transactions themselves are retained so
/// N is unchanged.
inline std::vector<Transaction> restrict_transactions(std::span<const Transaction> ts,
                                                      const std::set<std::string>& keep) {
  std::vector<Transaction> out;
  out.reserve(ts.size());
  for (const auto& t : ts) {
    Transaction r{t.verse, {}, {}};
    for (std::size_t i = 0; i < t.items.size(); ++i) {
      if (keep.count(t.items[i])) {
        r.items.push_back(t.items[i]);
        r.positions.push_back(t.positions[i]);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Supports and bands

struct SupportTable {
  std::size_t n_transactions = 0;
  std::map<std::string, std::size_t> counts;  // concept -> #transactions containing it

  Ratio support(const std::string& cpt) const {
    const auto it = counts.find(cpt);
    const std::int64_t n = it == counts.end() ? 0 : static_cast<std::int64_t>(it->second);
    return Ratio(n, static_cast<std::int64_t>(n_transactions));
  }
};

/// Presence per verse, not multiplicity.
inline SupportTable concept_support(std::span<const Transaction> ts) {
  if (ts.empty()) throw Error("mining", "support over zero transactions");
  SupportTable table;
  table.n_transactions = ts.size();
  for (const auto& t : ts)
    for (const auto& item : t.items) ++table.counts[item];
  return table;
}

/// Interval [ave/2, 3·ave/2] around a mean.
struct SupportBand {
  BigRatio ave;
  BigRatio max;
  BigRatio min;

  static SupportBand from_average(const BigRatio& ave) { return {ave, ave + ave / 2, ave - ave / 2}; }

  bool contains(const BigRatio& x) const { return min <= x && x <= max; }
};

/// Band around the mean support of every concept in the table.
inline SupportBand support_band(const SupportTable& table) {
  if (table.counts.empty()) throw Error("mining", "support band of an empty table");
  std::int64_t total = 0;
  for (const auto& [c, n] : table.counts) total += static_cast<std::int64_t>(n);
  const BigRatio ave(BigRatio(total) /
                     (BigRatio(static_cast<std::int64_t>(table.n_transactions)) *
                      BigRatio(static_cast<std::int64_t>(table.counts.size()))));
  return SupportBand::from_average(ave);
}

/// Concepts whose support lies in the band, bounds inclusive.
inline std::set<std::string> filter_concepts(const SupportTable& table, const SupportBand& band) {
  std::set<std::string> out;
  for (const auto& [c, n] : table.counts)
    if (band.contains(to_big(table.support(c)))) out.insert(c);
  return out;
}

// ---------------------------------------------------------------------------
// Apriori

/// Absolute count or fraction of N; a transaction set must reach it.
struct MinSupport {
  std::optional<std::size_t> count;
  std::optional<Ratio> fraction;

  static MinSupport absolute(std::size_t n) { return {n, std::nullopt}; }
  static MinSupport relative(Ratio f) { return {std::nullopt, f}; }

  /// Smallest integer count meeting the threshold over `n` transactions.
  std::size_t threshold(std::size_t n) const {
    if (count) return *count;
    const Ratio need = *fraction * Ratio(static_cast<std::int64_t>(n));
    const std::int64_t c = (need.numerator() + need.denominator() - 1) / need.denominator();
    return static_cast<std::size_t>(std::max<std::int64_t>(c, 1));
  }

  void validate() const {
    if (count.has_value() == fraction.has_value()) throw Error("mining", "min_support needs exactly one of count/fraction");
    if (count && *count == 0) throw Error("mining", "min_support count must be positive");
    if (fraction && (*fraction <= Ratio(0) || *fraction > Ratio(1)))
      throw Error("mining", "min_support fraction must be in (0,1]");
  }
};

struct Itemset {
  std::vector<std::string> items;  // sorted
  std::size_t count = 0;
  Ratio support;

  friend bool operator==(const Itemset&, const Itemset&) = default;
};

/// (size, lexicographic) order used for every itemset listing.
inline bool itemset_order(const Itemset& a, const Itemset& b) {
  if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
  return a.items < b.items;
}

namespace detail {

class Bitset {
 public:
  explicit Bitset(std::size_t bits = 0) : words_((bits + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  static std::size_t and_count(const Bitset& a, const Bitset& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) n += static_cast<std::size_t>(std::popcount(a.words_[i] & b.words_[i]));
    return n;
  }
  static Bitset intersect(const Bitset& a, const Bitset& b) {
    Bitset r;
    r.words_.resize(a.words_.size());
    for (std::size_t i = 0; i < a.words_.size(); ++i) r.words_[i] = a.words_[i] & b.words_[i];
    return r;
  }

 private:
  std::vector<std::uint64_t> words_;
};

using IdSet = std::vector<std::uint32_t>;

struct IdSetHash {
  std::size_t operator()(const IdSet& s) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (auto x : s) h = (h ^ x) * 0x100000001b3ull;
    return h;
  }
};

}  // namespace detail

/// Level-wise Apriori. Candidates of size k join two frequent (k-1)-sets
/// sharing their first k-2 items and are pruned unless every (k-1)-subset
/// is frequent; support is counted by intersecting per-item verse bitsets.
inline std::vector<Itemset> mine_frequent_itemsets(std::span<const Transaction> ts, std::size_t k_max,
                                                   const MinSupport& min_support) {
  if (ts.empty()) throw Error("mining", "no transactions to mine");
  if (k_max < 1 || k_max > 3) throw Error("mining", "k_max must be in [1,3]");
  min_support.validate();
  const std::size_t n = ts.size();
  const std::size_t need = min_support.threshold(n);

  // Item ids follow lexicographic order so id order is item order.
  std::set<std::string> vocab;
  for (const auto& t : ts) vocab.insert(t.items.begin(), t.items.end());
  const std::vector<std::string> names(vocab.begin(), vocab.end());
  std::unordered_map<std::string, std::uint32_t> id;
  for (std::uint32_t i = 0; i < names.size(); ++i) id.emplace(names[i], i);
  std::vector<detail::Bitset> cover(names.size(), detail::Bitset(n));
  for (std::size_t ti = 0; ti < n; ++ti)
    for (const auto& item : ts[ti].items) cover[id.at(item)].set(ti);

  std::vector<Itemset> out;
  const auto emit = [&](const detail::IdSet& ids, std::size_t count) {
    Itemset s;
    for (auto i : ids) s.items.push_back(names[i]);
    s.count = count;
    s.support = Ratio(static_cast<std::int64_t>(count), static_cast<std::int64_t>(n));
    out.push_back(std::move(s));
  };

  std::vector<detail::IdSet> level;
  std::vector<detail::Bitset> level_cover;
  for (std::uint32_t i = 0; i < names.size(); ++i) {
    const std::size_t c = cover[i].count();
    if (c >= need) {
      level.push_back({i});
      level_cover.push_back(cover[i]);
      emit(level.back(), c);
    }
  }

  for (std::size_t k = 2; k <= k_max && level.size() > 1; ++k) {
    const std::unordered_set<detail::IdSet, detail::IdSetHash> frequent(level.begin(), level.end());
    std::vector<detail::IdSet> next;
    std::vector<detail::Bitset> next_cover;
    // `level` is sorted lexicographically, so sets sharing a (k-2)-prefix are contiguous.
    for (std::size_t a = 0; a < level.size(); ++a) {
      for (std::size_t b = a + 1; b < level.size(); ++b) {
        if (!std::equal(level[a].begin(), level[a].end() - 1, level[b].begin())) break;
        detail::IdSet cand = level[a];
        cand.push_back(level[b].back());
        bool pruned = false;
        for (std::size_t drop = 0; drop + 2 < cand.size() && !pruned; ++drop) {
          detail::IdSet sub;
          for (std::size_t j = 0; j < cand.size(); ++j)
            if (j != drop) sub.push_back(cand[j]);
          pruned = !frequent.count(sub);
        }
        if (pruned) continue;
        const std::size_t c = detail::Bitset::and_count(level_cover[a], cover[cand.back()]);
        if (c < need) continue;
        emit(cand, c);
        next_cover.push_back(detail::Bitset::intersect(level_cover[a], cover[cand.back()]));
        next.push_back(std::move(cand));
      }
    }
    level = std::move(next);
    level_cover = std::move(next_cover);
  }
  std::sort(out.begin(), out.end(), itemset_order);
  return out;
}

// ---------------------------------------------------------------------------
// Rules

struct AssociationRule {
  std::vector<std::string> antecedent;  // sorted, 1 or 2 items
  std::string consequent;
  Ratio support;       // of antecedent ∪ {consequent}
  Ratio confidence;    // support(rule items) / support(antecedent)
  std::size_t cooccurrence = 0;  // #verses containing all rule items

  friend bool operator==(const AssociationRule&, const AssociationRule&) = default;
};

inline bool rule_order(const AssociationRule& a, const AssociationRule& b) {
  if (a.antecedent.size() != b.antecedent.size()) return a.antecedent.size() < b.antecedent.size();
  if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
  return a.consequent < b.consequent;
}

/// Which number a rule filter looks at.
enum class RuleMetric { confidence, cooccurrence };

struct RuleFilter {
  enum class Mode { none, fixed, band };
  Mode mode = Mode::band;
  RuleMetric metric = RuleMetric::confidence;
  BigRatio threshold = 0;  // fixed mode: keep metric >= threshold

  static RuleFilter none() { return {Mode::none, RuleMetric::confidence, 0}; }
  static RuleFilter fixed(BigRatio t, RuleMetric m = RuleMetric::confidence) { return {Mode::fixed, m, std::move(t)}; }
  static RuleFilter average_band(RuleMetric m = RuleMetric::confidence) { return {Mode::band, m, 0}; }
};

inline BigRatio rule_metric(const AssociationRule& r, RuleMetric m) {
  return m == RuleMetric::confidence ? to_big(r.confidence)
                                     : BigRatio(static_cast<std::int64_t>(r.cooccurrence));
}

namespace detail {

inline std::string itemset_key(const std::vector<std::string>& items) {
  std::string k;
  for (const auto& i : items) {
    k += i;
    k += '\x1f';
  }
  return k;
}

}  // namespace detail

/// Every rule derivable from the itemsets: A→B and B→A from each pair,
/// {X,Y}→Z for each of the three splits of a triple. Itemsets must be
/// downward closed (Apriori output is).
inline std::vector<AssociationRule> candidate_rules(std::span<const Itemset> itemsets,
                                                    std::span<const Transaction> ts) {
  std::unordered_map<std::string, std::size_t> count;
  count.reserve(itemsets.size() * 2);
  for (const auto& s : itemsets) count.emplace(detail::itemset_key(s.items), s.count);
  const auto n = static_cast<std::int64_t>(ts.size());
  const auto lookup = [&](const std::vector<std::string>& items) {
    const auto it = count.find(detail::itemset_key(items));
    if (it == count.end()) throw Error("mining", "itemsets are not downward closed");
    return it->second;
  };

  std::vector<AssociationRule> out;
  for (const auto& s : itemsets) {
    if (s.items.size() < 2) continue;
    for (std::size_t c = 0; c < s.items.size(); ++c) {
      AssociationRule r;
      for (std::size_t j = 0; j < s.items.size(); ++j)
        if (j != c) r.antecedent.push_back(s.items[j]);
      r.consequent = s.items[c];
      const std::size_t ant = lookup(r.antecedent);
      r.cooccurrence = s.count;
      r.support = Ratio(static_cast<std::int64_t>(s.count), n);
      r.confidence = Ratio(static_cast<std::int64_t>(s.count), static_cast<std::int64_t>(ant));
      out.push_back(std::move(r));
    }
  }
  std::sort(out.begin(), out.end(), rule_order);
  return out;
}

/// Band around the mean of `metric` over all rules (same 1.5x / 0.5x
/// construction as the support band).
inline SupportBand rule_band(std::span<const AssociationRule> rules, RuleMetric metric) {
  if (rules.empty()) throw Error("mining", "rule band over zero rules");
  if (metric == RuleMetric::cooccurrence) {
    std::int64_t total = 0;
    for (const auto& r : rules) total += static_cast<std::int64_t>(r.cooccurrence);
    return SupportBand::from_average(BigRatio(total) / BigRatio(static_cast<std::int64_t>(rules.size())));
  }
  // Confidence denominators are antecedent counts (<= N), so group by
  // denominator before summing to keep the big-rational work small.
  std::map<std::int64_t, std::int64_t> by_den;
  for (const auto& r : rules) {
    const std::int64_t den = r.confidence.denominator();
    by_den[den] += r.confidence.numerator();
  }
  BigRatio total = 0;
  for (const auto& [den, num] : by_den) total += BigRatio(num) / BigRatio(den);
  return SupportBand::from_average(total / BigRatio(static_cast<std::int64_t>(rules.size())));
}

inline std::vector<AssociationRule> filter_rules(std::span<const AssociationRule> rules, const RuleFilter& f) {
  std::vector<AssociationRule> out;
  if (f.mode == RuleFilter::Mode::none || rules.empty()) return {rules.begin(), rules.end()};
  if (f.mode == RuleFilter::Mode::fixed) {
    for (const auto& r : rules)
      if (rule_metric(r, f.metric) >= f.threshold) out.push_back(r);
    return out;
  }
  const SupportBand band = rule_band(rules, f.metric);
  for (const auto& r : rules)
    if (band.contains(rule_metric(r, f.metric))) out.push_back(r);
  return out;
}

inline std::vector<AssociationRule> generate_rules(std::span<const Itemset> itemsets, std::span<const Transaction> ts,
                                                   const RuleFilter& f) {
  const auto all = candidate_rules(itemsets, ts);
  return filter_rules(all, f);
}

// ---------------------------------------------------------------------------
// Artifacts

/// `antecedent<TAB>consequent<TAB>support<TAB>confidence<TAB>cooccurrence`.
inline void write_rules(std::ostream& out, std::span<const AssociationRule> rules) {
  for (const auto& r : rules) {
    out << text::join(r.antecedent, " ") << '\t' << r.consequent << '\t' << format_decimal(r.support, 5) << '\t'
        << format_decimal(r.confidence, 5) << '\t' << r.cooccurrence << '\n';
  }
}

/// Reads a rules file. Support and confidence come back at the printed
/// precision; `#` lines are comments.
inline std::vector<AssociationRule> read_rules(std::istream& in) {
  std::vector<AssociationRule> out;
  std::string line;
  std::size_t line_no = 0;
  const auto to_ratio = [](const std::string& s) {
    const BigRatio b = parse_decimal(s);
    return Ratio(static_cast<std::int64_t>(numerator(b)), static_cast<std::int64_t>(denominator(b)));
  };
  while (text::getline(in, line, line_no)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 5) throw ParseError("mining", line_no, "expected 5 tab-separated columns");
    AssociationRule r;
    for (auto& a : text::split(cols[0], ' '))
      if (!a.empty()) r.antecedent.push_back(std::move(a));
    r.consequent = std::string(text::trim(cols[1]));
    if (r.antecedent.empty() || r.consequent.empty()) throw ParseError("mining", line_no, "empty rule side");
    try {
      r.support = to_ratio(std::string(text::trim(cols[2])));
      r.confidence = to_ratio(std::string(text::trim(cols[3])));
      r.cooccurrence = std::stoul(cols[4]);
    } catch (const std::exception&) {
      throw ParseError("mining", line_no, "malformed number");
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// `sura<TAB>aya<TAB>item@pos item@pos ...`
inline void write_transactions(std::ostream& out, std::span<const Transaction> ts) {
  for (const auto& t : ts) {
    out << t.verse.sura << '\t' << t.verse.aya << '\t';
    for (std::size_t i = 0; i < t.items.size(); ++i) out << (i ? " " : "") << t.items[i] << '@' << t.positions[i];
    out << '\n';
  }
}

inline std::vector<Transaction> read_transactions(std::istream& in) {
  std::vector<Transaction> out;
  std::string line;
  std::size_t line_no = 0;
  while (text::getline(in, line, line_no)) {
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3) throw ParseError("mining", line_no, "expected sura<TAB>aya<TAB>items");
    Transaction t;
    try {
      t.verse = {std::stoi(cols[0]), std::stoi(cols[1])};
      std::vector<std::pair<std::string, std::size_t>> items;
      for (const auto& cell : text::split(cols[2], ' ')) {
        if (cell.empty()) continue;
        const auto at = cell.rfind('@');
        if (at == std::string::npos) throw ParseError("mining", line_no, "item without @position");
        items.emplace_back(cell.substr(0, at), std::stoul(cell.substr(at + 1)));
      }
      std::sort(items.begin(), items.end());
      for (auto& [item, pos] : items) {
        t.items.push_back(std::move(item));
        t.positions.push_back(pos);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("mining", line_no, "malformed number");
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace qonto
