// Command-line driver for the ontology pipeline.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qonto/pipeline.hpp"

namespace {

/// "7,10-12" or "all".
std::optional<std::vector<int>> parse_sura_list(const std::string& s) {
  if (s == "all") return std::nullopt;
  std::vector<int> out;
  for (const auto& part : qonto::text::split(s, ',')) {
    const std::string item(qonto::text::trim(part));
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-');
      std::size_t used = 0;
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } else {
        const int lo = std::stoi(item.substr(0, dash));
        const int hi = std::stoi(item.substr(dash + 1), &used);
        if (used != item.size() - dash - 1 || lo > hi) throw std::invalid_argument(item);
        for (int i = lo; i <= hi; ++i) out.push_back(i);
      }
    } catch (const std::exception&) {
      throw qonto::Error("cli", "malformed --suras entry '" + item + "'");
    }
  }
  for (int n : out)
    if (n < 1 || n > qonto::kMaxSura) throw qonto::Error("cli", "sura " + std::to_string(n) + " out of range 1..114");
  return out;
}

struct Options {
  std::string config;
  std::string corpus;
  std::string suras;
  std::string out;
  std::string stage = "export";
  bool seedless = false;
  std::string rules;
  std::string lexicon;
};

qonto::PipelineConfig resolve(const Options& o) {
  auto cfg = qonto::load_config(o.config);
  if (!o.corpus.empty()) cfg.corpus_path = o.corpus;
  if (!o.suras.empty()) cfg.suras = parse_sura_list(o.suras);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.lexicon.empty()) cfg.lexicon_path = o.lexicon;
  if (o.seedless && cfg.requests_randomness)
    throw qonto::Error("cli", "config sets a seed but --seedless was given; the pipeline takes no randomness");
  return cfg;
}

int replay(const Options& o, const qonto::PipelineConfig& cfg) {
  const auto in = qonto::load_resources(cfg);
  std::ifstream rules(o.rules, std::ios::binary);
  if (!rules) throw qonto::Error("cli", "cannot open rules file '" + o.rules + "'");
  const auto sum = qonto::replay_rules(rules, in.lexicons, in.ncfg, in.scfg, std::cout);
  std::cout << "# accepted\t" << sum.accepted << "\n# rejected\t" << sum.rejected << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept ontology extraction from a verse-segmented Arabic corpus"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  Options o;
  app.add_option("--config", o.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--corpus", o.corpus, "Corpus file, overrides the config")->check(CLI::ExistingFile);
  app.add_option("--suras", o.suras, "Sura selection: comma list with ranges, or 'all'");
  app.add_option("--out", o.out, "Output directory, overrides the config");
  app.add_option("--stage", o.stage, "Last stage of a full run")
      ->check(CLI::IsMember({"stats", "terms", "mine", "relate", "export"}));
  app.add_flag("--seedless", o.seedless, "Fail if the config asks for any randomness");

  std::vector<CLI::App*> stage_cmds;
  for (const auto name : qonto::kStageNames) {
    auto* sub = app.add_subcommand(std::string(name), "Run only the " + std::string(name) +
                                                          " stage on the artifacts in the output directory");
    stage_cmds.push_back(sub);
  }
  auto* relate = app.get_subcommand("relate");
  relate->add_option("--rules", o.rules, "Replay a rules file against the lexicon and print accept/reject")
      ->check(CLI::ExistingFile);
  relate->add_option("--lexicon", o.lexicon, "Lexicon file, overrides the config")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve(o);
    if (!o.rules.empty()) return replay(o, cfg);
    const auto in = qonto::load_inputs(cfg);
    for (auto* sub : stage_cmds) {
      if (!sub->parsed()) continue;
      qonto::run_stage(qonto::parse_stage(sub->get_name()), in, cfg.output_dir, std::cerr);
      return 0;
    }
    qonto::run_pipeline(in, qonto::parse_stage(o.stage), std::cerr);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
