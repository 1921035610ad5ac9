#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "ontomatch/exec.hpp"
#include "ontomatch/ontology.hpp"
#include "ontomatch/retrieval.hpp"

namespace ontomatch {

struct MappingPair {
  ConceptIri source;
  ConceptIri target;
  auto operator<=>(const MappingPair&) const = default;
};

// Ground truth restricted to a sampled subset: the matched pairs plus the
// sources known to have no match.
struct ReferenceAlignment {
  std::set<MappingPair> matched;
  std::set<ConceptIri> unmatched_sources;

  bool operator==(const ReferenceAlignment&) const = default;
};

// One evaluation unit: a source concept with its fixed-size candidate
// list. ground_truth is present for matched sources and contained in
// candidates; no other candidate is a reference match of the source.
struct CandidateSet {
  ConceptIri source;
  std::optional<ConceptIri> ground_truth;
  std::vector<ConceptIri> candidates;

  bool operator==(const CandidateSet&) const = default;
};

struct TaskSubset {
  std::vector<CandidateSet> matched_sets;
  std::vector<CandidateSet> unmatched_sets;
  std::uint64_t seed = 0;

  std::size_t total_pairs() const;
  bool operator==(const TaskSubset&) const = default;
};

// TSV with header "SrcEntity\tTgtEntity\tScore"; the score column is
// ignored on input and written as 1.0 on output.
std::vector<MappingPair> parse_reference_tsv(std::string_view text);
std::vector<MappingPair> load_reference_tsv(const std::filesystem::path&);
std::string serialize_reference_tsv(const std::vector<MappingPair>& pairs);

// Retains exactly the pairs whose normalized label sets are disjoint.
// Throws LookupError naming any unresolvable IRI. Output sorted.
std::vector<MappingPair> filter_string_matched(
    const std::vector<MappingPair>& pairs, const Ontology& src_onto,
    const Ontology& tgt_onto);

// Uniform sample of n sources without replacement; a source with several
// matches contributes one chosen at random. Deterministic for a fixed
// seed. Throws DataError when fewer than n distinct sources exist.
std::vector<MappingPair> sample_matched_sources(
    const std::vector<MappingPair>& filtered, std::size_t n,
    std::uint64_t seed);

// Uniform sample of n source concepts that appear in no reference pair.
// Throws DataError when fewer than n exist.
std::vector<ConceptIri> sample_unmatched_sources(
    const Ontology& src_onto, const std::vector<MappingPair>& full_reference,
    std::size_t n, std::uint64_t seed);

// Candidate list for one source: idf-ranked negatives (reference matches
// of the source excluded), ground truth appended when present, shortfall
// topped up with IRI-ordered unexcluded target concepts. Result has
// exactly `size` distinct entries. Throws DataError when the target
// ontology cannot supply `size` candidates.
CandidateSet build_candidate_set(
    const ConceptIri& source, const std::optional<ConceptIri>& ground_truth,
    const Ontology& src_onto, const Ontology& tgt_onto,
    const InvertedIndex& ix,
    const std::map<ConceptIri, std::set<ConceptIri>>& reference_targets,
    std::size_t size);

struct AssembledSubset {
  TaskSubset subset;
  ReferenceAlignment reference;
};

// Full construction: string-match filtering, matched/unmatched sampling,
// candidate retrieval per source (parallelizable), and a per-set shuffle
// derived from the seed so candidate position carries no signal.
// Identical inputs and seed produce byte-identical serialized output.
AssembledSubset assemble_subset(const Ontology& src_onto,
                                const Ontology& tgt_onto,
                                const std::vector<MappingPair>& reference,
                                const InvertedIndex& ix, std::size_t n_matched,
                                std::size_t n_unmatched,
                                std::size_t candidate_size, std::uint64_t seed,
                                ExecMode mode = ExecMode::Parallel);

// JSON Lines, one object per source:
// {"source": iri, "ground_truth": iri|null, "candidates": [iri, ...]}
// Matched sets first, then unmatched sets, in sampling order.
std::string serialize_subset_jsonl(const TaskSubset& subset);
TaskSubset parse_subset_jsonl(std::string_view text);

}  // namespace ontomatch
