#include "ontomatch/pipeline.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ontomatch/cache.hpp"
#include "ontomatch/errors.hpp"
#include "ontomatch/eval.hpp"
#include "ontomatch/hash.hpp"
#include "ontomatch/prompt.hpp"
#include "ontomatch/rdfxml.hpp"
#include "ontomatch/retrieval.hpp"

namespace ontomatch {

namespace {

std::string read_input_file(const std::filesystem::path& path,
                            const std::string& role) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) {
    throw MissingArtifactError(role + " not found: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output_file(const std::filesystem::path& path,
                       const std::string& bytes) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.is_open()) {
    throw Error("cannot write " + path.string());
  }
  out << bytes;
  if (!out.good()) {
    throw Error("write failed for " + path.string());
  }
}

bool is_json_dump(const std::filesystem::path& path) {
  return path.extension() == ".json";
}

Ontology load_ontology_input(const std::filesystem::path& path,
                             const std::string& role, const RunConfig& cfg,
                             std::string* bytes_out) {
  const std::string bytes = read_input_file(path, role);
  if (bytes_out) *bytes_out = bytes;
  if (is_json_dump(path)) {
    return parse_json_dump(bytes);
  }
  RdfParseConfig rdf = RdfParseConfig::defaults();
  if (!cfg.label_properties.empty()) {
    rdf.label_properties = cfg.label_properties;
  }
  return parse_rdfxml(bytes, rdf);
}

SubwordVocab load_vocab(const RunConfig& cfg, std::string* bytes_out) {
  if (cfg.vocab.empty()) {
    if (bytes_out) bytes_out->clear();
    return SubwordVocab::builtin_minimal();
  }
  const std::string bytes = read_input_file(cfg.vocab, "vocabulary file");
  if (bytes_out) *bytes_out = bytes;
  return SubwordVocab::parse(bytes);
}

std::filesystem::path cache_file(const RunConfig& cfg) {
  const std::filesystem::path dir =
      cfg.cache_dir.empty() ? cfg.out_dir / "cache" : cfg.cache_dir;
  return dir / "verdicts.jsonl";
}

const char* scorer_kind_name(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::LlmEndpoint:
      return "llm";
    case ScorerKind::EditSimilarity:
      return "edit";
    case ScorerKind::Mock:
    default:
      return "mock";
  }
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["src_onto"] = cfg.src_onto.string();
  j["tgt_onto"] = cfg.tgt_onto.string();
  j["refs"] = cfg.refs.string();
  j["vocab"] = cfg.vocab.empty() ? nlohmann::ordered_json(nullptr)
                                 : nlohmann::ordered_json(cfg.vocab.string());
  j["subset"] = cfg.subset.string();
  j["cache_dir"] = cache_file(cfg).parent_path().string();
  j["out_dir"] = cfg.out_dir.string();
  j["n_matched"] = cfg.n_matched;
  j["n_unmatched"] = cfg.n_unmatched;
  j["candidates"] = cfg.candidates;
  if (cfg.seed_set) {
    j["seed"] = cfg.seed;
  } else {
    j["seed"] = nullptr;
  }
  j["scorer"] = scorer_kind_name(cfg.scorer.kind);
  j["endpoint"] = cfg.scorer.endpoint_url;
  j["model"] = cfg.scorer.model_id;
  j["llm_mode"] =
      cfg.scorer.llm_mode == LlmMode::LabelProbs ? "labels" : "completion";
  j["threshold"] = cfg.threshold;
  j["with_hierarchy"] = cfg.with_hierarchy;
  j["context_cap"] = cfg.context_cap;
  return j;
}

// Every command records what it ran with and the hashes of what it read.
void write_manifest(const RunConfig& cfg, Command cmd,
                    const std::map<std::string, std::string>& input_hashes,
                    const std::map<std::string, nlohmann::ordered_json>& extra =
                        {}) {
  nlohmann::ordered_json j;
  j["command"] = to_string(cmd);
  j["config"] = config_echo(cfg);
  nlohmann::ordered_json inputs;
  for (const auto& [path, digest] : input_hashes) inputs[path] = digest;
  j["inputs"] = inputs;
  for (const auto& [key, value] : extra) j[key] = value;

  std::string name = std::string("manifest_") + to_string(cmd) + ".json";
  for (char& c : name) {
    if (c == '-') c = '_';
  }
  write_output_file(cfg.out_dir / name, j.dump(2) + "\n");
}

std::optional<nlohmann::json> read_manifest(const RunConfig& cfg,
                                            const char* name) {
  std::ifstream in(cfg.out_dir / name, std::ios::binary);
  if (!in.is_open()) return std::nullopt;
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error&) {
    return std::nullopt;
  }
}

void require_positive(std::size_t value, const char* what) {
  if (value == 0) {
    throw ConfigError(std::string(what) + " must be positive");
  }
}

void validate_common(const RunConfig& cfg) {
  if (cfg.threshold < 0.0 || cfg.threshold > 1.0) {
    throw ConfigError("threshold must lie in [0,1]");
  }
  if (cfg.out_dir.empty()) {
    throw ConfigError("output directory must be set");
  }
}

int run_ingest(const RunConfig& cfg, std::ostream& err) {
  if (cfg.src_onto.empty() || cfg.tgt_onto.empty()) {
    throw ConfigError("ingest needs --src-onto and --tgt-onto");
  }
  std::string src_bytes;
  std::string tgt_bytes;
  const Ontology src =
      load_ontology_input(cfg.src_onto, "source ontology", cfg, &src_bytes);
  const Ontology tgt =
      load_ontology_input(cfg.tgt_onto, "target ontology", cfg, &tgt_bytes);

  write_output_file(src_dump_path(cfg), serialize_json_dump(src));
  write_output_file(tgt_dump_path(cfg), serialize_json_dump(tgt));
  write_manifest(cfg, Command::Ingest,
                 {{cfg.src_onto.string(), sha256_hex(src_bytes)},
                  {cfg.tgt_onto.string(), sha256_hex(tgt_bytes)}});
  err << "ingested " << src.size() << " source and " << tgt.size()
      << " target concepts -> " << src_dump_path(cfg).string() << ", "
      << tgt_dump_path(cfg).string() << "\n";
  return 0;
}

int run_index(const RunConfig& cfg, std::ostream& err) {
  const std::string tgt_bytes =
      read_input_file(tgt_dump_path(cfg), "ingested target ontology");
  const Ontology tgt = parse_json_dump(tgt_bytes);
  std::string vocab_bytes;
  const SubwordVocab vocab = load_vocab(cfg, &vocab_bytes);
  const InvertedIndex ix = InvertedIndex::build(tgt, vocab);

  write_output_file(index_path(cfg), serialize_index(ix));
  std::map<std::string, std::string> hashes{
      {tgt_dump_path(cfg).string(), sha256_hex(tgt_bytes)}};
  if (!cfg.vocab.empty()) {
    hashes[cfg.vocab.string()] = sha256_hex(vocab_bytes);
  }
  write_manifest(cfg, Command::Index, hashes);
  err << "indexed " << ix.doc_count() << " concepts over "
      << ix.postings().size() << " tokens -> " << index_path(cfg).string()
      << "\n";
  return 0;
}

int run_make_subset(const RunConfig& cfg, std::ostream& err) {
  if (!cfg.seed_set) {
    throw ConfigError("make-subset needs an explicit --seed");
  }
  if (cfg.refs.empty()) {
    throw ConfigError("make-subset needs --refs");
  }
  require_positive(cfg.n_matched, "n-matched");
  require_positive(cfg.n_unmatched, "n-unmatched");
  require_positive(cfg.candidates, "candidate count");

  const std::string src_bytes =
      read_input_file(src_dump_path(cfg), "ingested source ontology");
  const std::string tgt_bytes =
      read_input_file(tgt_dump_path(cfg), "ingested target ontology");
  const std::string refs_bytes = read_input_file(cfg.refs, "reference TSV");
  const Ontology src = parse_json_dump(src_bytes);
  const Ontology tgt = parse_json_dump(tgt_bytes);
  const std::vector<MappingPair> refs = parse_reference_tsv(refs_bytes);
  std::string vocab_bytes;
  const SubwordVocab vocab = load_vocab(cfg, &vocab_bytes);
  const InvertedIndex ix = InvertedIndex::build(tgt, vocab);

  const AssembledSubset assembled =
      assemble_subset(src, tgt, refs, ix, cfg.n_matched, cfg.n_unmatched,
                      cfg.candidates, cfg.seed, ExecMode::Serial);

  write_output_file(subset_path(cfg), serialize_subset_jsonl(assembled.subset));
  const std::vector<MappingPair> matched(assembled.reference.matched.begin(),
                                         assembled.reference.matched.end());
  write_output_file(subset_refs_path(cfg), serialize_reference_tsv(matched));

  std::map<std::string, std::string> hashes{
      {src_dump_path(cfg).string(), sha256_hex(src_bytes)},
      {tgt_dump_path(cfg).string(), sha256_hex(tgt_bytes)},
      {cfg.refs.string(), sha256_hex(refs_bytes)}};
  if (!cfg.vocab.empty()) {
    hashes[cfg.vocab.string()] = sha256_hex(vocab_bytes);
  }
  write_manifest(cfg, Command::MakeSubset, hashes);
  err << "subset: " << assembled.subset.matched_sets.size() << " matched + "
      << assembled.subset.unmatched_sets.size() << " unmatched sources, "
      << assembled.subset.total_pairs() << " pairs -> "
      << subset_path(cfg).string() << "\n";
  return 0;
}

int run_score(const RunConfig& cfg, std::ostream& err) {
  const std::filesystem::path subset_file = subset_path(cfg);
  const std::string subset_bytes =
      read_input_file(subset_file, "subset file");
  const TaskSubset subset = parse_subset_jsonl(subset_bytes);
  const std::string src_bytes =
      read_input_file(src_dump_path(cfg), "ingested source ontology");
  const std::string tgt_bytes =
      read_input_file(tgt_dump_path(cfg), "ingested target ontology");
  const Ontology src = parse_json_dump(src_bytes);
  const Ontology tgt = parse_json_dump(tgt_bytes);

  const ReferenceAlignment ref = reference_of(subset);
  std::unique_ptr<PairScorer> scorer = make_scorer(cfg.scorer, &ref.matched);
  const bool needs_prompt = cfg.scorer.kind == ScorerKind::LlmEndpoint;

  std::vector<PairTask> tasks;
  tasks.reserve(subset.total_pairs());
  auto add_tasks = [&](const std::vector<CandidateSet>& sets) {
    for (const CandidateSet& cs : sets) {
      const Concept& source = src.at(cs.source);
      ConceptView src_view;
      if (needs_prompt) {
        src_view = gather_context(src, cs.source, cfg.context_cap, cfg.seed);
      }
      for (const ConceptIri& cand : cs.candidates) {
        const Concept& target = tgt.at(cand);
        PairTask t;
        t.source = cs.source;
        t.target = cand;
        t.source_labels = source.labels;
        t.target_labels = target.labels;
        if (needs_prompt) {
          const ConceptView tgt_view =
              gather_context(tgt, cand, cfg.context_cap, cfg.seed);
          t.prompt = render_prompt(src_view, tgt_view, cfg.with_hierarchy);
        }
        tasks.push_back(std::move(t));
      }
    }
  };
  add_tasks(subset.matched_sets);
  add_tasks(subset.unmatched_sets);

  VerdictCache cache(cache_file(cfg));
  const int threads = cfg.scorer.kind == ScorerKind::LlmEndpoint
                          ? cfg.scorer.concurrency_limit
                          : 0;
  const BatchOutcome outcome =
      score_pairs(tasks, *scorer, &cache, ExecMode::Parallel, threads);

  std::vector<ScoredMapping> run;
  run.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    run.push_back({tasks[i].source, tasks[i].target, outcome.verdicts[i]});
  }
  write_output_file(scored_run_path(cfg), serialize_scored_run(run));

  std::map<std::string, nlohmann::ordered_json> extra;
  extra["scorer_id"] = scorer->id();
  extra["pairs"] = tasks.size();
  extra["cache_hits"] = outcome.cache_hits;
  extra["classified"] = outcome.classified;
  write_manifest(cfg, Command::Score,
                 {{subset_file.string(), sha256_hex(subset_bytes)},
                  {src_dump_path(cfg).string(), sha256_hex(src_bytes)},
                  {tgt_dump_path(cfg).string(), sha256_hex(tgt_bytes)}},
                 extra);
  err << "scored " << tasks.size() << " pairs (" << outcome.cache_hits
      << " from cache, " << outcome.classified << " classified) -> "
      << scored_run_path(cfg).string() << "\n";
  if (auto* llm = dynamic_cast<LlmEndpointScorer*>(scorer.get());
      llm && llm->unparseable_count() > 0) {
    err << "warning: " << llm->unparseable_count()
        << " completion(s) had no recognizable yes/no and were counted as "
           "No\n";
  }
  return 0;
}

int run_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::filesystem::path subset_file = subset_path(cfg);
  const std::string subset_bytes =
      read_input_file(subset_file, "subset file");
  const TaskSubset subset = parse_subset_jsonl(subset_bytes);
  const std::string run_bytes =
      read_input_file(scored_run_path(cfg), "scored run");
  const std::vector<ScoredMapping> run = parse_scored_run(run_bytes);

  EvalSettings settings;
  settings.threshold = cfg.threshold;
  settings.with_hierarchy = cfg.with_hierarchy;
  settings.seed = cfg.seed;
  settings.scorer_id = scorer_kind_name(cfg.scorer.kind);
  if (auto manifest = read_manifest(cfg, "manifest_score.json")) {
    if (manifest->contains("scorer_id") && (*manifest)["scorer_id"].is_string()) {
      settings.scorer_id = (*manifest)["scorer_id"].get<std::string>();
    }
  }
  if (!cfg.seed_set) {
    if (auto manifest = read_manifest(cfg, "manifest_make_subset.json")) {
      const auto& config = (*manifest)["config"];
      if (config.is_object() && config.contains("seed") &&
          config["seed"].is_number_unsigned()) {
        settings.seed = config["seed"].get<std::uint64_t>();
      }
    }
  }

  const EvalReport report = build_report(subset, reference_of(subset), run,
                                         settings, ExecMode::Serial);
  const std::string rendered = serialize_report(report);
  write_output_file(report_path(cfg), rendered);
  write_manifest(cfg, Command::Evaluate,
                 {{subset_file.string(), sha256_hex(subset_bytes)},
                  {scored_run_path(cfg).string(), sha256_hex(run_bytes)}});
  out << rendered;
  err << "report -> " << report_path(cfg).string() << "\n";
  return 0;
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "ingest") return Command::Ingest;
  if (name == "index") return Command::Index;
  if (name == "make-subset") return Command::MakeSubset;
  if (name == "score") return Command::Score;
  if (name == "evaluate") return Command::Evaluate;
  throw ConfigError("unknown command: " + std::string(name));
}

const char* to_string(Command cmd) {
  switch (cmd) {
    case Command::Ingest:
      return "ingest";
    case Command::Index:
      return "index";
    case Command::MakeSubset:
      return "make-subset";
    case Command::Score:
      return "score";
    case Command::Evaluate:
    default:
      return "evaluate";
  }
}

std::filesystem::path src_dump_path(const RunConfig& cfg) {
  return cfg.out_dir / "src_ontology.json";
}
std::filesystem::path tgt_dump_path(const RunConfig& cfg) {
  return cfg.out_dir / "tgt_ontology.json";
}
std::filesystem::path index_path(const RunConfig& cfg) {
  return cfg.out_dir / "index.json";
}
std::filesystem::path subset_path(const RunConfig& cfg) {
  return cfg.subset.empty() ? cfg.out_dir / "subset.jsonl" : cfg.subset;
}
std::filesystem::path subset_refs_path(const RunConfig& cfg) {
  return cfg.out_dir / "subset_refs.tsv";
}
std::filesystem::path scored_run_path(const RunConfig& cfg) {
  return cfg.out_dir / "scored_run.jsonl";
}
std::filesystem::path report_path(const RunConfig& cfg) {
  return cfg.out_dir / "report.json";
}

ReferenceAlignment reference_of(const TaskSubset& subset) {
  ReferenceAlignment ref;
  for (const CandidateSet& cs : subset.matched_sets) {
    if (!cs.ground_truth) {
      throw DataError("matched set for " + cs.source + " lacks a ground truth");
    }
    ref.matched.insert({cs.source, *cs.ground_truth});
  }
  for (const CandidateSet& cs : subset.unmatched_sets) {
    ref.unmatched_sources.insert(cs.source);
  }
  return ref;
}

int run_pipeline(const RunConfig& cfg, Command cmd, std::ostream& out,
                 std::ostream& err) {
  try {
    validate_common(cfg);
    switch (cmd) {
      case Command::Ingest:
        return run_ingest(cfg, err);
      case Command::Index:
        return run_index(cfg, err);
      case Command::MakeSubset:
        return run_make_subset(cfg, err);
      case Command::Score:
        return run_score(cfg, err);
      case Command::Evaluate:
        return run_evaluate(cfg, out, err);
    }
    throw ConfigError("unknown command");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const MissingArtifactError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const TransportError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace ontomatch
