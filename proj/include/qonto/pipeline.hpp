#pragma once

// Config-driven pipeline: stats -> terms -> mine -> relate -> export. Every
// stage reads its predecessor's artifacts from the output directory, so a
// full run and a sequence of single-stage runs produce the same files.

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qonto/arabic.hpp"
#include "qonto/corpus.hpp"
#include "qonto/error.hpp"
#include "qonto/mining.hpp"
#include "qonto/ontology.hpp"
#include "qonto/rational.hpp"
#include "qonto/relations.hpp"
#include "qonto/terms.hpp"
#include "qonto/textio.hpp"

namespace qonto {

namespace fs = std::filesystem;

enum class Stage { stats, terms, mine, relate, export_ };

inline constexpr std::array<std::string_view, 5> kStageNames{"stats", "terms", "mine", "relate", "export"};

inline std::string_view stage_name(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

inline Stage parse_stage(std::string_view name) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i)
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  throw Error("cli", "unknown stage '" + std::string(name) + "'");
}

enum class TermScope { sura, global };

struct PipelineConfig {
  fs::path corpus_path;
  std::optional<std::vector<int>> suras;  // nullopt selects every sura
  fs::path normalization_path;
  fs::path stemmer_path;
  fs::path stoplist_path;  // optional
  fs::path lexicon_path;
  TermSelection selection{150, std::nullopt};
  std::size_t max_ngram = 3;
  Ratio multiword_boost{3, 2};
  TermScope scope = TermScope::sura;
  std::size_t k_max = 3;
  MinSupport min_support = MinSupport::absolute(1);
  bool support_band = true;
  RuleFilter rule_filter = RuleFilter::average_band();
  std::size_t min_cooccurrence = 1;
  fs::path output_dir;
  std::string ns = "http://example.org/qonto#";
  bool requests_randomness = false;  // a "seed" key was present
};

namespace detail {

using Json = nlohmann::json;

struct ConfigReader {
  std::string source;

  [[noreturn]] void fail(const std::string& what) const { throw Error("cli", source + ": " + what); }

  void only_keys(const Json& obj, const std::string& where, std::initializer_list<std::string_view> keys) const {
    if (!obj.is_object()) fail(where + " must be an object");
    for (const auto& [k, v] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        fail("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
    }
  }

  std::string string_at(const Json& obj, const std::string& key, const std::string& where) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail("missing '" + where + key + "'");
    if (!it->is_string() || it->get<std::string>().empty()) fail("'" + where + key + "' must be a non-empty string");
    return it->get<std::string>();
  }

  std::size_t count_at(const Json& obj, const std::string& key, const std::string& where, std::size_t lo,
                       std::size_t hi) const {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) fail("'" + where + key + "' must be an integer");
    const auto n = v.get<long long>();
    if (n < static_cast<long long>(lo) || n > static_cast<long long>(hi))
      fail("'" + where + key + "' must be in [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
    return static_cast<std::size_t>(n);
  }

  /// Decimal given as a JSON number or a string; parsed exactly.
  BigRatio decimal_at(const Json& obj, const std::string& key, const std::string& where) const {
    const auto& v = obj.at(key);
    std::string s;
    if (v.is_string()) s = v.get<std::string>();
    else if (v.is_number()) s = v.dump();
    else fail("'" + where + key + "' must be a decimal number");
    try {
      return parse_decimal(s);
    } catch (const std::exception&) {
      fail("'" + where + key + "' is not a plain decimal: " + s);
    }
  }

  static Ratio to_ratio(const BigRatio& b) {
    return Ratio(static_cast<std::int64_t>(numerator(b)), static_cast<std::int64_t>(denominator(b)));
  }
};

}  // namespace detail

/// Parses a JSON pipeline config. Relative paths are resolved against
/// `base_dir`. Ranges are checked here; files are checked by load_inputs.
inline PipelineConfig parse_config(const std::string& doc, const fs::path& base_dir, const std::string& source) {
  using detail::Json;
  const detail::ConfigReader rd{source};
  Json j;
  try {
    j = Json::parse(doc);
  } catch (const Json::parse_error& e) {
    rd.fail(std::string("malformed JSON: ") + e.what());
  }
  rd.only_keys(j, "",
               {"corpus", "suras", "normalization", "stemmer", "stoplist", "lexicon", "terms", "mining", "relations",
                "output", "namespace", "seed"});
  PipelineConfig cfg;
  const auto path_of = [&](const std::string& key) { return (base_dir / rd.string_at(j, key, "")).lexically_normal(); };
  cfg.corpus_path = path_of("corpus");
  cfg.normalization_path = path_of("normalization");
  cfg.stemmer_path = path_of("stemmer");
  cfg.lexicon_path = path_of("lexicon");
  if (j.contains("stoplist")) cfg.stoplist_path = path_of("stoplist");
  cfg.output_dir = path_of("output");
  cfg.ns = rd.string_at(j, "namespace", "");
  if (cfg.ns.back() != '#' && cfg.ns.back() != '/') rd.fail("'namespace' must end with '#' or '/'");
  cfg.requests_randomness = j.contains("seed");

  if (j.contains("suras")) {
    const auto& s = j["suras"];
    if (s.is_string()) {
      if (s.get<std::string>() != "all") rd.fail("'suras' must be a list of numbers or \"all\"");
    } else if (s.is_array()) {
      std::vector<int> list;
      for (const auto& n : s) {
        if (!n.is_number_integer() || n.get<int>() < 1 || n.get<int>() > kMaxSura)
          rd.fail("'suras' entries must be integers in [1,114]");
        list.push_back(n.get<int>());
      }
      cfg.suras = std::move(list);
    } else {
      rd.fail("'suras' must be a list of numbers or \"all\"");
    }
  }

  if (j.contains("terms")) {
    const auto& t = j["terms"];
    rd.only_keys(t, "terms", {"limit", "min_freq", "max_ngram", "multiword_boost", "scope"});
    if (t.contains("limit") && t.contains("min_freq")) rd.fail("'terms' takes either limit or min_freq, not both");
    if (t.contains("limit")) cfg.selection = {rd.count_at(t, "limit", "terms.", 1, 1'000'000), std::nullopt};
    if (t.contains("min_freq")) cfg.selection = {std::nullopt, rd.count_at(t, "min_freq", "terms.", 1, 1'000'000)};
    if (t.contains("max_ngram")) cfg.max_ngram = rd.count_at(t, "max_ngram", "terms.", 1, 3);
    if (t.contains("multiword_boost")) {
      const BigRatio b = rd.decimal_at(t, "multiword_boost", "terms.");
      if (b < 1 || b > 100) rd.fail("'terms.multiword_boost' must be in [1,100]");
      cfg.multiword_boost = detail::ConfigReader::to_ratio(b);
    }
    if (t.contains("scope")) {
      const auto scope = rd.string_at(t, "scope", "terms.");
      if (scope == "sura") cfg.scope = TermScope::sura;
      else if (scope == "global") cfg.scope = TermScope::global;
      else rd.fail("'terms.scope' must be \"sura\" or \"global\"");
    }
  }

  if (j.contains("mining")) {
    const auto& m = j["mining"];
    rd.only_keys(m, "mining", {"k_max", "min_support", "support_band", "rule_filter"});
    if (m.contains("k_max")) cfg.k_max = rd.count_at(m, "k_max", "mining.", 1, 3);
    if (m.contains("min_support")) {
      const auto& ms = m["min_support"];
      rd.only_keys(ms, "mining.min_support", {"count", "fraction"});
      if (ms.contains("count") == ms.contains("fraction"))
        rd.fail("'mining.min_support' needs exactly one of count or fraction");
      if (ms.contains("count")) {
        cfg.min_support = MinSupport::absolute(rd.count_at(ms, "count", "mining.min_support.", 1, 1'000'000));
      } else {
        const BigRatio f = rd.decimal_at(ms, "fraction", "mining.min_support.");
        if (f <= 0 || f > 1) rd.fail("'mining.min_support.fraction' must be in (0,1]");
        cfg.min_support = MinSupport::relative(detail::ConfigReader::to_ratio(f));
      }
    }
    if (m.contains("support_band")) {
      if (!m["support_band"].is_boolean()) rd.fail("'mining.support_band' must be true or false");
      cfg.support_band = m["support_band"].get<bool>();
    }
    if (m.contains("rule_filter")) {
      const auto& f = m["rule_filter"];
      rd.only_keys(f, "mining.rule_filter", {"mode", "metric", "threshold"});
      RuleMetric metric = RuleMetric::confidence;
      if (f.contains("metric")) {
        const auto name = rd.string_at(f, "metric", "mining.rule_filter.");
        if (name == "cooccurrence") metric = RuleMetric::cooccurrence;
        else if (name != "confidence") rd.fail("'mining.rule_filter.metric' must be confidence or cooccurrence");
      }
      const auto mode = f.contains("mode") ? rd.string_at(f, "mode", "mining.rule_filter.") : std::string("band");
      if (mode == "none") {
        cfg.rule_filter = RuleFilter::none();
      } else if (mode == "band") {
        cfg.rule_filter = RuleFilter::average_band(metric);
      } else if (mode == "fixed") {
        if (!f.contains("threshold")) rd.fail("'mining.rule_filter' in fixed mode needs a threshold");
        const BigRatio t = rd.decimal_at(f, "threshold", "mining.rule_filter.");
        if (t < 0 || (metric == RuleMetric::confidence && t > 1))
          rd.fail("'mining.rule_filter.threshold' out of range");
        cfg.rule_filter = RuleFilter::fixed(t, metric);
      } else {
        rd.fail("'mining.rule_filter.mode' must be none, fixed or band");
      }
      if (mode != "fixed" && f.contains("threshold")) rd.fail("'mining.rule_filter.threshold' only applies to fixed mode");
    }
  }

  if (j.contains("relations")) {
    const auto& r = j["relations"];
    rd.only_keys(r, "relations", {"min_cooccurrence"});
    if (r.contains("min_cooccurrence"))
      cfg.min_cooccurrence = rd.count_at(r, "min_cooccurrence", "relations.", 1, 1'000'000);
  }
  return cfg;
}

inline PipelineConfig load_config(const fs::path& path) {
  const std::string doc = text::read_file(path.string(), "cli");
  return parse_config(doc, path.parent_path(), path.string());
}

/// Everything the stages need, parsed once up front.
struct PipelineInputs {
  PipelineConfig config;
  NormalizationConfig ncfg;
  StemmerConfig scfg;
  Lexicons lexicons;
  Corpus corpus;  // the selection
};

namespace detail {

inline std::ifstream open_input(const fs::path& p, const std::string& what) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cli", "cannot open " + what + " '" + p.string() + "'");
  return in;
}

/// Re-throws module errors with the file they came from as locus.
template <class Fn>
auto with_locus(const fs::path& p, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw Error("cli", p.string() + ": " + e.what());
  }
}

}  // namespace detail

/// Configs, stoplist and lexicon; everything but the corpus.
inline PipelineInputs load_resources(const PipelineConfig& cfg) {
  PipelineInputs in{cfg, {}, {}, {}, {}};
  {
    auto f = detail::open_input(cfg.normalization_path, "normalization config");
    in.ncfg = detail::with_locus(cfg.normalization_path, [&] { return parse_normalization_config(f); });
  }
  {
    auto f = detail::open_input(cfg.stemmer_path, "stemmer config");
    in.scfg = detail::with_locus(cfg.stemmer_path, [&] { return parse_stemmer_config(f, in.ncfg); });
  }
  if (!cfg.stoplist_path.empty()) {
    auto f = detail::open_input(cfg.stoplist_path, "stoplist");
    const auto words = detail::with_locus(cfg.stoplist_path, [&] { return parse_stoplist(f, in.ncfg); });
    in.scfg.stop_words.insert(words.begin(), words.end());
  }
  auto f = detail::open_input(cfg.lexicon_path, "lexicon");
  in.lexicons = detail::with_locus(cfg.lexicon_path, [&] { return load_lexicons(f, in.ncfg, in.scfg); });
  return in;
}

/// Parses every referenced file and applies the sura selection; throws
/// before any artifact is written.
inline PipelineInputs load_inputs(const PipelineConfig& cfg) {
  PipelineInputs in = load_resources(cfg);
  if (cfg.suras && cfg.suras->empty()) throw Error("cli", "empty selection");
  auto f = detail::open_input(cfg.corpus_path, "corpus");
  const Corpus full = detail::with_locus(cfg.corpus_path, [&] { return parse_corpus(f); });
  in.corpus = cfg.suras ? select_subcorpus(full, *cfg.suras) : full;
  if (in.corpus.empty()) throw Error("cli", "empty selection");
  return in;
}

// ---------------------------------------------------------------------------
// Artifact helpers

namespace detail {

inline std::ifstream read_artifact(const fs::path& dir, const std::string& name) {
  const fs::path p = dir / name;
  if (!fs::exists(p)) throw Error("cli", "missing upstream artifact '" + p.string() + "'");
  return open_input(p, "artifact");
}

/// Writes via a sibling temp file so a failed stage leaves no half file.
inline void write_artifact(const fs::path& dir, const std::string& name, const std::function<void(std::ostream&)>& fn) {
  const fs::path p = dir / name;
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cli", "cannot write '" + tmp.string() + "'");
    fn(out);
    out.flush();
    if (!out) throw Error("cli", "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, p);
}

inline std::string rules_file(int sura) {
  std::string n = std::to_string(sura);
  while (n.size() < 3) n.insert(n.begin(), '0');
  return "rules/sura_" + n + ".tsv";
}

inline Corpus read_corpus_artifact(const fs::path& dir) {
  auto in = read_artifact(dir, "corpus.txt");
  return with_locus(dir / "corpus.txt", [&] { return parse_corpus(in); });
}

/// Rows of a headed TSV report, header dropped.
inline std::vector<std::vector<std::string>> read_table(const fs::path& dir, const std::string& name,
                                                        std::size_t columns) {
  auto in = read_artifact(dir, name);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (text::getline(in, line, line_no)) {
    if (line_no == 1 || text::trim(line).empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != columns)
      throw Error("cli", (dir / name).string() + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(columns) + " columns");
    rows.push_back(std::move(cols));
  }
  return rows;
}

inline std::size_t to_count(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error("cli", where + ": malformed count '" + s + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stages

/// corpus.txt (the selection) and stats.tsv.
inline void stage_stats(const PipelineInputs& in, const fs::path& dir) {
  const auto st = corpus_stats(in.corpus, in.ncfg);
  detail::write_artifact(dir, "corpus.txt", [&](std::ostream& o) { write_corpus(o, in.corpus); });
  detail::write_artifact(dir, "stats.tsv", [&](std::ostream& o) { write_stats_report(o, st); });
}

inline std::vector<TermList> extract_term_lists(const Corpus& corpus, const PipelineInputs& in) {
  const auto& cfg = in.config;
  const auto list_for = [&](std::span<const Verse> verses, int sura) {
    std::vector<std::vector<Token>> toks;
    toks.reserve(verses.size());
    for (const auto& v : verses) toks.push_back(preprocess_verse(v, in.ncfg, in.scfg));
    const auto scored = score_terms(extract_candidates(toks, cfg.max_ngram), cfg.multiword_boost);
    return select_terms(scored, cfg.selection, sura);
  };
  std::vector<TermList> out;
  if (cfg.scope == TermScope::global) {
    out.push_back(list_for(corpus.verses(), 0));
  } else {
    for (int s : corpus.suras()) out.push_back(list_for(corpus.sura(s), s));
  }
  return out;
}

/// terms.tsv from corpus.txt.
inline void stage_terms(const PipelineInputs& in, const fs::path& dir) {
  const Corpus corpus = detail::read_corpus_artifact(dir);
  const auto lists = extract_term_lists(corpus, in);
  detail::write_artifact(dir, "terms.tsv", [&](std::ostream& o) { write_term_report(o, lists); });
}

/// Per-vocabulary counts of the mining funnel.
struct MiningSummary {
  int sura = 0;
  std::size_t transactions = 0;
  std::size_t concepts = 0;
  std::size_t retained = 0;
  std::size_t frequent_itemsets = 0;
  std::size_t candidate_rules = 0;
  std::size_t generated_rules = 0;
};

struct MiningOutcome {
  MiningSummary summary;
  std::vector<Transaction> transactions;  // before the support band
  SupportTable supports;
  std::optional<SupportBand> band;
  std::set<std::string> retained;
  std::vector<Itemset> itemsets;
  std::optional<SupportBand> rule_band;
  std::vector<AssociationRule> rules;
};

/// Transactions, support band, Apriori and rule filtering for one vocabulary.
inline MiningOutcome mine_vocabulary(const Corpus& corpus, const TermList& vocab, const PipelineInputs& in) {
  const auto& cfg = in.config;
  MiningOutcome m;
  m.summary.sura = vocab.sura;
  m.transactions = build_transactions(corpus, vocab, in.ncfg, in.scfg);
  m.supports = concept_support(m.transactions);
  m.summary.transactions = m.transactions.size();
  m.summary.concepts = m.supports.counts.size();
  if (!m.supports.counts.empty()) {
    m.band = support_band(m.supports);
    if (cfg.support_band) m.retained = filter_concepts(m.supports, *m.band);
  }
  if (!cfg.support_band)
    for (const auto& [c, n] : m.supports.counts) m.retained.insert(c);
  m.summary.retained = m.retained.size();
  const auto kept = restrict_transactions(m.transactions, m.retained);
  m.itemsets = mine_frequent_itemsets(kept, cfg.k_max, cfg.min_support);
  m.summary.frequent_itemsets = m.itemsets.size();
  const auto candidates = candidate_rules(m.itemsets, kept);
  m.summary.candidate_rules = candidates.size();
  if (cfg.rule_filter.mode == RuleFilter::Mode::band && !candidates.empty())
    m.rule_band = qonto::rule_band(candidates, cfg.rule_filter.metric);
  m.rules = filter_rules(candidates, cfg.rule_filter);
  m.summary.generated_rules = m.rules.size();
  return m;
}

/// transactions.tsv, supports.tsv, bands.tsv, rules/, mining.tsv and
/// concepts.tsv from corpus.txt and terms.tsv.
inline void stage_mine(const PipelineInputs& in, const fs::path& dir) {
  const Corpus corpus = detail::read_corpus_artifact(dir);
  auto terms_in = detail::read_artifact(dir, "terms.tsv");
  const auto lists = detail::with_locus(dir / "terms.tsv", [&] { return read_term_report(terms_in); });

  std::ostringstream transactions, supports, bands, mining;
  supports << "sura\tconcept\toccurrences\tsupport\tretained\n";
  bands << "sura\tmetric\tave\tmax\tmin\n";
  mining << "sura\ttransactions\tconcepts\tretained\tfrequent_itemsets\tcandidate_rules\tgenerated_rules\n";
  std::map<std::string, ConceptNode> nodes;

  fs::remove_all(dir / "rules");
  for (const auto& vocab : lists) {
    const auto m = mine_vocabulary(corpus, vocab, in);
    const auto& s = m.summary;
    write_transactions(transactions, m.transactions);
    for (const auto& [c, n] : m.supports.counts) {
      supports << s.sura << '\t' << c << '\t' << n << '\t' << format_decimal(m.supports.support(c), 5) << '\t'
               << (m.retained.count(c) ? "yes" : "no") << '\n';
    }
    const auto band_row = [&](std::string_view metric, const SupportBand& b) {
      bands << s.sura << '\t' << metric << '\t' << format_decimal(b.ave, 5) << '\t' << format_decimal(b.max, 5)
            << '\t' << format_decimal(b.min, 5) << '\n';
    };
    if (m.band) band_row("support", *m.band);
    if (m.rule_band)
      band_row(in.config.rule_filter.metric == RuleMetric::confidence ? "confidence" : "cooccurrence", *m.rule_band);
    mining << s.sura << '\t' << s.transactions << '\t' << s.concepts << '\t' << s.retained << '\t'
           << s.frequent_itemsets << '\t' << s.candidate_rules << '\t' << s.generated_rules << '\n';
    detail::write_artifact(dir, detail::rules_file(s.sura), [&](std::ostream& o) { write_rules(o, m.rules); });

    for (const auto& [c, n] : m.supports.counts) {
      auto& node = nodes[c];
      node.stem = c;
      node.occurrences += n;
    }
    for (auto& [c, surf] : concept_surfaces(corpus, vocab, in.ncfg, in.scfg)) nodes[c].surfaces.insert(surf.begin(), surf.end());
  }

  detail::write_artifact(dir, "transactions.tsv", [&](std::ostream& o) { o << transactions.str(); });
  detail::write_artifact(dir, "supports.tsv", [&](std::ostream& o) { o << supports.str(); });
  detail::write_artifact(dir, "bands.tsv", [&](std::ostream& o) { o << bands.str(); });
  detail::write_artifact(dir, "mining.tsv", [&](std::ostream& o) { o << mining.str(); });
  detail::write_artifact(dir, "concepts.tsv", [&](std::ostream& o) {
    for (const auto& [c, node] : nodes) {
      o << c << '\t' << node.occurrences << '\t';
      std::size_t i = 0;
      for (const auto& s : node.surfaces) o << (i++ ? "|" : "") << s;
      o << '\n';
    }
  });
}

/// Rule items of a hand-written rules file mapped onto concept keys.
inline std::vector<AssociationRule> canonical_rules(std::span<const AssociationRule> rules,
                                                    const NormalizationConfig& ncfg, const StemmerConfig& scfg) {
  std::vector<AssociationRule> out(rules.begin(), rules.end());
  for (auto& r : out) {
    for (auto& a : r.antecedent) a = canonical_term(a, ncfg, scfg);
    r.consequent = canonical_term(r.consequent, ncfg, scfg);
  }
  return out;
}

struct ReplaySummary {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Pattern filter over a rules file without corpus evidence; prints the
/// accept/reject listing with the rules as written.
inline ReplaySummary replay_rules(std::istream& rules_in, const Lexicons& lx, const NormalizationConfig& ncfg,
                                  const StemmerConfig& scfg, std::ostream& report) {
  const auto written = read_rules(rules_in);
  const auto keyed = canonical_rules(written, ncfg, scfg);
  const auto res = match_patterns(keyed, lx, nullptr);
  write_match_report(report, written, res, lx);
  return {res.accepted.size(), res.rejected};
}

/// relations.tsv, accepted.tsv and funnel.tsv from the mining artifacts.
inline void stage_relate(const PipelineInputs& in, const fs::path& dir) {
  const auto& lx = in.lexicons;
  auto ts_in = detail::read_artifact(dir, "transactions.tsv");
  const auto all_ts = detail::with_locus(dir / "transactions.tsv", [&] { return read_transactions(ts_in); });
  auto terms_in = detail::read_artifact(dir, "terms.tsv");
  const auto lists = detail::with_locus(dir / "terms.tsv", [&] { return read_term_report(terms_in); });
  std::map<int, std::size_t> term_count;
  for (const auto& l : lists) term_count[l.sura] = l.terms.size();
  const auto mining = detail::read_table(dir, "mining.tsv", 7);

  std::ostringstream accepted, funnel;
  accepted << "sura\trule\tpattern\tevidence\n";
  funnel << "sura\tterm_count\ttransactions\tfrequent_itemsets\tgenerated_rules\taccepted_rules\trelation_instances\n";
  std::map<std::tuple<std::string, std::string, std::string>, RelationInstance> merged;

  for (const auto& row : mining) {
    const std::string where = (dir / "mining.tsv").string();
    const int sura = static_cast<int>(detail::to_count(row[0], where));
    std::vector<Transaction> ts;
    for (const auto& t : all_ts)
      if (sura == 0 || t.verse.sura == sura) ts.push_back(t);
    auto rules_in = detail::read_artifact(dir, detail::rules_file(sura));
    const auto rules = detail::with_locus(dir / detail::rules_file(sura), [&] { return read_rules(rules_in); });
    if (rules.size() != detail::to_count(row[6], where))
      throw Error("cli", detail::rules_file(sura) + " does not match mining.tsv");

    const EvidenceIndex index(ts, lx.triggers);
    const auto res = match_patterns(rules, lx, &index);
    const auto rels = confidence_filter(typed_relations(res.accepted, rules, lx), in.config.min_cooccurrence);
    for (const auto& m : res.accepted) {
      const auto& r = rules[m.rule];
      accepted << sura << '\t' << text::join(r.antecedent, " + ") << " --> " << r.consequent << '\t'
               << lx.patterns[m.pattern].text << '\t';
      for (std::size_t i = 0; i < m.evidence.size(); ++i) accepted << (i ? " " : "") << m.evidence[i].str();
      accepted << '\n';
    }
    for (const auto& r : rels) {
      auto [it, inserted] = merged.try_emplace({r.subject, r.relation_type, r.object}, r);
      if (!inserted) {
        auto& ev = it->second.evidence;
        ev.insert(ev.end(), r.evidence.begin(), r.evidence.end());
        std::sort(ev.begin(), ev.end());
        ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
        it->second.cooccurrence = ev.size();
        it->second.pattern = std::min(it->second.pattern, r.pattern);
      }
    }
    const std::size_t generated = rules.size();
    if (res.accepted.size() > generated) throw Error("cli", "accepted rules exceed generated rules");
    funnel << sura << '\t' << term_count[sura] << '\t' << row[1] << '\t' << row[4] << '\t' << generated << '\t'
           << res.accepted.size() << '\t' << rels.size() << '\n';
  }

  std::vector<RelationInstance> relations;
  for (auto& [k, r] : merged) relations.push_back(std::move(r));
  detail::write_artifact(dir, "relations.tsv", [&](std::ostream& o) { write_relations(o, relations); });
  detail::write_artifact(dir, "accepted.tsv", [&](std::ostream& o) { o << accepted.str(); });
  detail::write_artifact(dir, "funnel.tsv", [&](std::ostream& o) { o << funnel.str(); });
}

/// `concept<TAB>occurrences<TAB>surface|surface...`
inline std::vector<ConceptNode> read_concepts(std::istream& in, const std::string& source) {
  std::vector<ConceptNode> out;
  std::string line;
  std::size_t line_no = 0;
  while (text::getline(in, line, line_no)) {
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    const std::string where = source + ": line " + std::to_string(line_no);
    if (cols.size() != 3) throw Error("cli", where + ": expected 3 columns");
    ConceptNode n{cols[0], {}, detail::to_count(cols[1], where)};
    for (auto& s : text::split(cols[2], '|'))
      if (!s.empty()) n.surfaces.insert(std::move(s));
    out.push_back(std::move(n));
  }
  return out;
}

/// ontology.ttl and ontology.tsv from relations.tsv (concepts.tsv is used
/// when present). Returns the graph builder's warnings.
inline std::vector<std::string> stage_export(const PipelineInputs& in, const fs::path& dir) {
  auto rel_in = detail::read_artifact(dir, "relations.tsv");
  const auto relations = detail::with_locus(dir / "relations.tsv", [&] { return read_relations(rel_in); });
  std::vector<ConceptNode> concepts;
  if (fs::exists(dir / "concepts.tsv")) {
    auto c_in = detail::open_input(dir / "concepts.tsv", "artifact");
    concepts = read_concepts(c_in, (dir / "concepts.tsv").string());
  }
  auto built = build_graph(concepts, relations, in.config.ns);
  const std::string ttl = export_turtle(built.graph);
  detail::write_artifact(dir, "ontology.ttl", [&](std::ostream& o) { o << ttl; });
  detail::write_artifact(dir, "ontology.tsv", [&](std::ostream& o) { write_graph_report(o, built.graph); });
  return std::move(built.warnings);
}

/// Runs one stage in place on `dir`.
inline void run_stage(Stage s, const PipelineInputs& in, const fs::path& dir, std::ostream& log) {
  fs::create_directories(dir);
  switch (s) {
    case Stage::stats: stage_stats(in, dir); break;
    case Stage::terms: stage_terms(in, dir); break;
    case Stage::mine: stage_mine(in, dir); break;
    case Stage::relate: stage_relate(in, dir); break;
    case Stage::export_:
      for (const auto& w : stage_export(in, dir)) log << "warning: " << w << '\n';
      break;
  }
}

/// Runs stats..`last` into a scratch directory next to the output and
/// swaps it into place only when every stage succeeded.
inline void run_pipeline(const PipelineInputs& in, Stage last, std::ostream& log) {
  const fs::path out = in.config.output_dir;
  if (out.empty()) throw Error("cli", "no output directory");
  if (fs::exists(out) && !fs::is_directory(out)) throw Error("cli", "output '" + out.string() + "' is not a directory");
  if (fs::exists(out) && !fs::is_empty(out) && !fs::exists(out / "stats.tsv"))
    throw Error("cli", "refusing to replace non-empty directory '" + out.string() + "' that holds no pipeline output");
  const fs::path tmp = out.string() + ".partial";
  fs::remove_all(tmp);
  try {
    for (std::size_t i = 0; i <= static_cast<std::size_t>(last); ++i) {
      log << "stage " << kStageNames[i] << '\n';
      run_stage(static_cast<Stage>(i), in, tmp, log);
    }
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  fs::remove_all(out);
  fs::rename(tmp, out);
}

}  // namespace qonto
