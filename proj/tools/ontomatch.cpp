#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ontomatch/errors.hpp"
#include "ontomatch/pipeline.hpp"

namespace {

using ontomatch::ConfigError;
using ontomatch::RunConfig;

struct CliValues {
  std::string src_onto;
  std::string tgt_onto;
  std::string refs;
  std::string vocab;
  std::string subset;
  std::string cache_dir;
  std::string out_dir = "out";
  std::uint64_t n_matched = 50;
  std::uint64_t n_unmatched = 50;
  std::uint64_t candidates = 100;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string scorer = "mock";
  std::string endpoint;
  std::string model;
  std::string llm_mode = "labels";
  double threshold = 0.0;
  double edit_threshold = 0.9;
  bool with_hierarchy = false;
  std::uint64_t context_cap = 5;
  std::uint64_t concurrency = 4;
  std::vector<std::string> label_properties;
};

// Config-file values become the defaults that explicit flags override.
void apply_config_file(const std::string& path, CliValues& v) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) {
    throw ConfigError("config file not found: " + path);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config file " + path + " must hold a JSON object");
  }
  auto str = [&](const char* key, std::string& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_string()) {
      throw ConfigError(std::string("config key ") + key + " must be a string");
    }
    out = doc[key].get<std::string>();
  };
  auto num = [&](const char* key, std::uint64_t& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_unsigned()) {
      throw ConfigError(std::string("config key ") + key +
                        " must be a non-negative integer");
    }
    out = doc[key].get<std::uint64_t>();
  };
  auto real = [&](const char* key, double& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) {
      throw ConfigError(std::string("config key ") + key + " must be a number");
    }
    out = doc[key].get<double>();
  };
  auto flag = [&](const char* key, bool& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_boolean()) {
      throw ConfigError(std::string("config key ") + key + " must be a boolean");
    }
    out = doc[key].get<bool>();
  };

  static const std::set<std::string> known{
      "src_onto",    "tgt_onto",   "refs",           "vocab",
      "subset",      "cache_dir",  "out_dir",        "n_matched",
      "n_unmatched", "candidates", "seed",           "scorer",
      "endpoint",    "model",      "llm_mode",       "threshold",
      "edit_threshold", "with_hierarchy", "context_cap", "concurrency",
      "label_properties"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown config key: " + key);
    }
  }

  str("src_onto", v.src_onto);
  str("tgt_onto", v.tgt_onto);
  str("refs", v.refs);
  str("vocab", v.vocab);
  str("subset", v.subset);
  str("cache_dir", v.cache_dir);
  str("out_dir", v.out_dir);
  num("n_matched", v.n_matched);
  num("n_unmatched", v.n_unmatched);
  num("candidates", v.candidates);
  if (doc.contains("seed")) {
    num("seed", v.seed);
    v.seed_set = true;
  }
  str("scorer", v.scorer);
  str("endpoint", v.endpoint);
  str("model", v.model);
  str("llm_mode", v.llm_mode);
  real("threshold", v.threshold);
  real("edit_threshold", v.edit_threshold);
  flag("with_hierarchy", v.with_hierarchy);
  num("context_cap", v.context_cap);
  num("concurrency", v.concurrency);
  if (doc.contains("label_properties")) {
    if (!doc["label_properties"].is_array()) {
      throw ConfigError("config key label_properties must be an array");
    }
    v.label_properties.clear();
    for (const auto& item : doc["label_properties"]) {
      if (!item.is_string()) {
        throw ConfigError("label_properties entries must be strings");
      }
      v.label_properties.push_back(item.get<std::string>());
    }
  }
}

RunConfig to_run_config(const CliValues& v) {
  RunConfig cfg;
  cfg.src_onto = v.src_onto;
  cfg.tgt_onto = v.tgt_onto;
  cfg.refs = v.refs;
  cfg.vocab = v.vocab;
  cfg.subset = v.subset;
  cfg.cache_dir = v.cache_dir;
  cfg.out_dir = v.out_dir;
  cfg.n_matched = v.n_matched;
  cfg.n_unmatched = v.n_unmatched;
  cfg.candidates = v.candidates;
  cfg.seed = v.seed;
  cfg.seed_set = v.seed_set;
  cfg.threshold = v.threshold;
  cfg.with_hierarchy = v.with_hierarchy;
  cfg.context_cap = v.context_cap;
  cfg.label_properties = v.label_properties;

  if (v.scorer == "llm") {
    cfg.scorer.kind = ontomatch::ScorerKind::LlmEndpoint;
  } else if (v.scorer == "edit") {
    cfg.scorer.kind = ontomatch::ScorerKind::EditSimilarity;
  } else if (v.scorer == "mock") {
    cfg.scorer.kind = ontomatch::ScorerKind::Mock;
  } else {
    throw ConfigError("unknown scorer: " + v.scorer +
                      " (expected llm, edit, or mock)");
  }
  if (v.llm_mode == "labels") {
    cfg.scorer.llm_mode = ontomatch::LlmMode::LabelProbs;
  } else if (v.llm_mode == "completion") {
    cfg.scorer.llm_mode = ontomatch::LlmMode::Completion;
  } else {
    throw ConfigError("unknown llm mode: " + v.llm_mode +
                      " (expected labels or completion)");
  }
  cfg.scorer.endpoint_url = v.endpoint;
  cfg.scorer.model_id = v.model;
  cfg.scorer.edit_threshold = v.edit_threshold;
  if (v.concurrency < 1) {
    throw ConfigError("concurrency must be at least 1");
  }
  cfg.scorer.concurrency_limit = static_cast<int>(v.concurrency);
  if (const char* key = std::getenv("ALIGN_LLM_API_KEY")) {
    cfg.scorer.api_key = key;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CliValues v;

  // The config file loads first so every explicit flag overrides it.
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = std::string(arg.substr(9));
    }
    if (!path.empty()) {
      try {
        apply_config_file(path, v);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }
  }

  CLI::App app{"Zero-shot ontology alignment: ingest, index, subset, score, evaluate"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--src-onto", v.src_onto, "Source ontology (RDF/XML or JSON dump)");
  app.add_option("--tgt-onto", v.tgt_onto, "Target ontology (RDF/XML or JSON dump)");
  app.add_option("--refs", v.refs, "Reference alignment TSV");
  app.add_option("--vocab", v.vocab, "Subword vocabulary file (one token per line)");
  app.add_option("--subset", v.subset, "Task subset JSONL (defaults to <out-dir>/subset.jsonl)");
  app.add_option("--cache-dir", v.cache_dir, "Verdict cache directory (defaults to <out-dir>/cache)");
  app.add_option("--out-dir", v.out_dir, "Artifact output directory");
  app.add_option("--n-matched", v.n_matched, "Matched sources to sample");
  app.add_option("--n-unmatched", v.n_unmatched, "Unmatched sources to sample");
  app.add_option("--candidates", v.candidates, "Candidates per source");
  auto* seed_opt = app.add_option("--seed", v.seed, "Sampling seed (required for make-subset)");
  app.add_option("--scorer", v.scorer, "Scorer: llm, edit, or mock")
      ->check(CLI::IsMember({"llm", "edit", "mock"}));
  app.add_option("--endpoint", v.endpoint, "LLM endpoint URL")
      ->envname("ALIGN_LLM_ENDPOINT");
  app.add_option("--model", v.model, "Model identifier sent to the endpoint");
  app.add_option("--llm-mode", v.llm_mode,
                 "Endpoint mode: labels (Yes/No probabilities) or completion")
      ->check(CLI::IsMember({"labels", "completion"}));
  app.add_option("--threshold", v.threshold, "Prediction threshold on yes_prob (0 keeps every Yes)");
  app.add_option("--edit-threshold", v.edit_threshold, "Edit-similarity Yes threshold");
  app.add_flag("--with-hierarchy", v.with_hierarchy, "Include parent/child context in prompts");
  app.add_option("--context-cap", v.context_cap, "Max parents/children quoted per concept");
  app.add_option("--concurrency", v.concurrency, "Max in-flight endpoint requests");
  app.add_option("--label-property", v.label_properties,
                 "Extra RDF label property IRI (repeatable; replaces defaults)");

  CLI::App* cmd_ingest = app.add_subcommand("ingest", "Parse both ontologies into canonical JSON dumps");
  CLI::App* cmd_index = app.add_subcommand("index", "Build the subword inverted index of the target ontology");
  CLI::App* cmd_subset = app.add_subcommand("make-subset", "Sample the challenging evaluation subset");
  CLI::App* cmd_score = app.add_subcommand("score", "Classify every subset pair with the chosen scorer");
  CLI::App* cmd_evaluate = app.add_subcommand("evaluate", "Compute metrics from a scored run");
  for (CLI::App* sub : {cmd_ingest, cmd_index, cmd_subset, cmd_score, cmd_evaluate}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (seed_opt->count() > 0) v.seed_set = true;

  ontomatch::Command cmd = ontomatch::Command::Ingest;
  if (cmd_ingest->parsed()) cmd = ontomatch::Command::Ingest;
  if (cmd_index->parsed()) cmd = ontomatch::Command::Index;
  if (cmd_subset->parsed()) cmd = ontomatch::Command::MakeSubset;
  if (cmd_score->parsed()) cmd = ontomatch::Command::Score;
  if (cmd_evaluate->parsed()) cmd = ontomatch::Command::Evaluate;

  RunConfig cfg;
  try {
    cfg = to_run_config(v);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return ontomatch::run_pipeline(cfg, cmd, std::cout, std::cerr);
}
