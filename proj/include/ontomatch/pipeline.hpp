#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ontomatch/dataset.hpp"
#include "ontomatch/scorers.hpp"

namespace ontomatch {

enum class Command { Ingest, Index, MakeSubset, Score, Evaluate };

// Throws ConfigError for anything else.
Command parse_command(std::string_view name);
const char* to_string(Command cmd);

// Everything a pipeline run can be told. Paths left empty fall back to
// the conventional artifact names under out_dir.
struct RunConfig {
  std::filesystem::path src_onto;  // RDF/XML or JSON dump
  std::filesystem::path tgt_onto;
  std::filesystem::path refs;   // reference TSV
  std::filesystem::path vocab;  // subword vocabulary; empty = builtin
  std::filesystem::path subset;
  std::filesystem::path cache_dir;  // empty = <out_dir>/cache
  std::filesystem::path out_dir = "out";

  std::size_t n_matched = 50;
  std::size_t n_unmatched = 50;
  std::size_t candidates = 100;
  std::uint64_t seed = 0;
  bool seed_set = false;

  ScorerSpec scorer;
  double threshold = 0.0;
  bool with_hierarchy = false;
  std::size_t context_cap = 5;

  // Extra label annotation properties for RDF/XML inputs; empty keeps
  // the defaults.
  std::vector<std::string> label_properties;
};

// Artifact names each command writes under out_dir.
std::filesystem::path src_dump_path(const RunConfig& cfg);
std::filesystem::path tgt_dump_path(const RunConfig& cfg);
std::filesystem::path index_path(const RunConfig& cfg);
std::filesystem::path subset_path(const RunConfig& cfg);
std::filesystem::path subset_refs_path(const RunConfig& cfg);
std::filesystem::path scored_run_path(const RunConfig& cfg);
std::filesystem::path report_path(const RunConfig& cfg);

// The subset's ground truth: pairs of the matched sets, sources of the
// unmatched ones.
ReferenceAlignment reference_of(const TaskSubset& subset);

// Runs one command against the configured artifacts. Progress and
// diagnostics go to err; `evaluate` prints the report JSON to out.
// Exit status: 0 success, 1 invalid configuration, 2 missing input
// artifact, 3 endpoint failure after retries, 4 any other error.
int run_pipeline(const RunConfig& cfg, Command cmd, std::ostream& out,
                 std::ostream& err);

}  // namespace ontomatch
