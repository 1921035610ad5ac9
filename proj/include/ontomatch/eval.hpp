#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ontomatch/dataset.hpp"
#include "ontomatch/exec.hpp"
#include "ontomatch/scorers.hpp"

namespace ontomatch {

// One classified pair. (source, target) is unique within a run.
struct ScoredMapping {
  ConceptIri source;
  ConceptIri target;
  Verdict verdict;

  bool operator==(const ScoredMapping&) const = default;
};

// Echoed into every report so a result is attributable to its run.
struct EvalSettings {
  double threshold = 0.0;  // 0 keeps every Yes answer
  bool with_hierarchy = false;
  std::string scorer_id;
  std::uint64_t seed = 0;

  bool operator==(const EvalSettings&) const = default;
};

struct EvalCounts {
  std::size_t predicted = 0;
  std::size_t reference = 0;
  std::size_t unmatched_sources = 0;
  std::size_t true_positives = 0;

  bool operator==(const EvalCounts&) const = default;
};

// hits_at_1 and mrr are absent when any verdict in the run carries no
// probabilities; set metrics and the rejection rate are always present.
struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> hits_at_1;
  std::optional<double> mrr;
  double rejection_rate = 0.0;
  EvalCounts counts;
  EvalSettings settings;

  bool operator==(const EvalReport&) const = default;
};

// Candidate order for one source: Yes answers by yes_prob descending,
// then No answers by no_prob ascending, ties by target IRI. All entries
// must share one source and carry probabilities.
std::vector<ConceptIri> rank_candidates(const std::vector<ScoredMapping>& ms);

// Pairs predicted true: answer Yes, and yes_prob >= threshold when a
// probability is present. Probability-free Yes answers survive only at
// threshold 0.
std::set<MappingPair> apply_threshold(const std::vector<ScoredMapping>& ms,
                                      double threshold);

struct PrfMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision is 0 for an empty prediction set. Throws DataError when ref
// is empty.
PrfMetrics prf_metrics(const std::set<MappingPair>& pred,
                       const std::set<MappingPair>& ref);

struct RankingMetrics {
  double hits_at_k = 0.0;
  double mrr = 0.0;
};

// Hits@K and MRR over 1-based ranks of each reference target within its
// source's ordered candidate list. Throws DataError naming the source
// when a ranked list is missing or lacks the ground truth.
RankingMetrics ranking_metrics(
    const std::map<ConceptIri, std::vector<ConceptIri>>& ranked,
    const std::set<MappingPair>& ref, std::size_t k);

// Fraction of unmatched sources whose candidates are all predicted
// false. Throws DataError when unmatched_sets is empty.
double rejection_rate(const std::set<MappingPair>& pred,
                      const std::vector<CandidateSet>& unmatched_sets);

// Composes thresholding, set metrics, ranking metrics (only when every
// verdict has probabilities), and the rejection rate. ms must cover each
// (source, candidate) pair of the subset exactly once; gaps and strays
// raise DataError listing the offending pairs. Parallel mode shards by
// candidate set and merges in a fixed order, so both modes produce
// bit-identical reports.
EvalReport build_report(const TaskSubset& subset,
                        const ReferenceAlignment& ref,
                        const std::vector<ScoredMapping>& ms,
                        const EvalSettings& settings,
                        ExecMode mode = ExecMode::Serial);

// Single JSON object, metric rates and the threshold rendered with six
// decimal places, absent ranking fields as null.
std::string serialize_report(const EvalReport& report);

// JSON Lines {"source","target","answer","yes_prob","no_prob"} with
// nullable probabilities.
std::string serialize_scored_run(const std::vector<ScoredMapping>& ms);
std::vector<ScoredMapping> parse_scored_run(std::string_view text);

}  // namespace ontomatch
