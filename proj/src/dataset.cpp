#include "ontomatch/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "ontomatch/rng.hpp"

namespace ontomatch {

std::size_t TaskSubset::total_pairs() const {
  std::size_t n = 0;
  for (const CandidateSet& s : matched_sets) n += s.candidates.size();
  for (const CandidateSet& s : unmatched_sets) n += s.candidates.size();
  return n;
}

std::vector<MappingPair> parse_reference_tsv(std::string_view text) {
  std::vector<MappingPair> pairs;
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++lineno;
    if (lineno == 1) {
      if (line != "SrcEntity\tTgtEntity\tScore") {
        throw ParseError(
            "reference TSV must start with header "
            "\"SrcEntity\\tTgtEntity\\tScore\", got: " +
            line);
      }
    } else if (!line.empty()) {
      const std::size_t t1 = line.find('\t');
      if (t1 == std::string::npos) {
        throw ParseError("reference TSV line " + std::to_string(lineno) +
                         ": expected tab-separated fields");
      }
      std::size_t t2 = line.find('\t', t1 + 1);
      if (t2 == std::string::npos) t2 = line.size();
      MappingPair p{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1)};
      if (p.source.empty() || p.target.empty()) {
        throw ParseError("reference TSV line " + std::to_string(lineno) +
                         ": empty IRI");
      }
      pairs.push_back(std::move(p));
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<MappingPair> load_reference_tsv(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read reference TSV: " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_reference_tsv(buf.str());
}

std::string serialize_reference_tsv(const std::vector<MappingPair>& pairs) {
  std::string out = "SrcEntity\tTgtEntity\tScore\n";
  for (const MappingPair& p : pairs) {
    out += p.source;
    out += '\t';
    out += p.target;
    out += "\t1.0\n";
  }
  return out;
}

namespace {

std::unordered_set<std::string> normalized_label_set(const Concept& c) {
  std::unordered_set<std::string> out;
  for (const std::string& l : c.labels) out.insert(normalize_label(l));
  return out;
}

bool share_normalized_label(const Concept& a, const Concept& b) {
  const auto sa = normalized_label_set(a);
  for (const std::string& l : b.labels) {
    if (sa.count(normalize_label(l)) > 0) return true;
  }
  return false;
}

}  // namespace

std::vector<MappingPair> filter_string_matched(
    const std::vector<MappingPair>& pairs, const Ontology& src_onto,
    const Ontology& tgt_onto) {
  std::vector<MappingPair> kept;
  kept.reserve(pairs.size());
  for (const MappingPair& p : pairs) {
    const Concept& s = src_onto.at(p.source);
    const Concept& t = tgt_onto.at(p.target);
    if (!share_normalized_label(s, t)) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return kept;
}

std::vector<MappingPair> sample_matched_sources(
    const std::vector<MappingPair>& filtered, std::size_t n,
    std::uint64_t seed) {
  // Group by source, sorted; each source contributes one pair.
  std::map<ConceptIri, std::vector<ConceptIri>> by_source;
  for (const MappingPair& p : filtered) by_source[p.source].push_back(p.target);
  if (by_source.size() < n) {
    throw DataError("insufficient matched pairs: " +
                    std::to_string(by_source.size()) +
                    " distinct sources after filtering, need " +
                    std::to_string(n));
  }
  Rng rng(seed);
  std::vector<MappingPair> one_per_source;
  one_per_source.reserve(by_source.size());
  for (auto& [src, targets] : by_source) {
    std::sort(targets.begin(), targets.end());
    const std::size_t pick =
        targets.size() == 1 ? 0 : static_cast<std::size_t>(rng.below(targets.size()));
    one_per_source.push_back({src, targets[pick]});
  }
  std::vector<MappingPair> out;
  out.reserve(n);
  for (std::size_t i : rng.sample_indices(one_per_source.size(), n)) {
    out.push_back(one_per_source[i]);
  }
  return out;
}

std::vector<ConceptIri> sample_unmatched_sources(
    const Ontology& src_onto, const std::vector<MappingPair>& full_reference,
    std::size_t n, std::uint64_t seed) {
  std::unordered_set<ConceptIri> matched;
  for (const MappingPair& p : full_reference) matched.insert(p.source);
  std::vector<ConceptIri> pool;
  for (const auto& [iri, c] : src_onto.concepts()) {
    if (matched.find(iri) == matched.end()) pool.push_back(iri);
  }
  if (pool.size() < n) {
    throw DataError("insufficient unmatched source concepts: " +
                    std::to_string(pool.size()) + " available, need " +
                    std::to_string(n));
  }
  Rng rng(seed);
  std::vector<ConceptIri> out;
  out.reserve(n);
  for (std::size_t i : rng.sample_indices(pool.size(), n)) {
    out.push_back(pool[i]);
  }
  return out;
}

CandidateSet build_candidate_set(
    const ConceptIri& source, const std::optional<ConceptIri>& ground_truth,
    const Ontology& src_onto, const Ontology& tgt_onto,
    const InvertedIndex& ix,
    const std::map<ConceptIri, std::set<ConceptIri>>& reference_targets,
    std::size_t size) {
  if (size < 1 || (ground_truth && size < 2)) {
    throw DataError("candidate set size too small: " + std::to_string(size));
  }
  const Concept& src = src_onto.at(source);
  if (ground_truth && !tgt_onto.contains(*ground_truth)) {
    throw LookupError("ground-truth target not in target ontology: " +
                      *ground_truth);
  }

  std::unordered_set<ConceptIri> excluded;
  if (auto it = reference_targets.find(source); it != reference_targets.end()) {
    excluded.insert(it->second.begin(), it->second.end());
  }

  const std::size_t k = size - (ground_truth ? 1 : 0);
  CandidateSet set;
  set.source = source;
  set.ground_truth = ground_truth;
  std::unordered_set<ConceptIri> taken;
  for (const auto& cand : ix.top_k(src.labels, k, excluded)) {
    set.candidates.push_back(cand.iri);
    taken.insert(cand.iri);
  }
  if (ground_truth) {
    set.candidates.push_back(*ground_truth);
    taken.insert(*ground_truth);
  }
  if (set.candidates.size() < size) {
    // idf retrieval came up short; fill with IRI-ordered target concepts.
    for (const auto& [iri, c] : tgt_onto.concepts()) {
      if (set.candidates.size() >= size) break;
      if (excluded.count(iri) > 0 || taken.count(iri) > 0) continue;
      set.candidates.push_back(iri);
      taken.insert(iri);
    }
    if (set.candidates.size() < size) {
      throw DataError("target ontology too small for source " + source +
                      ": need " + std::to_string(size) + " candidates, found " +
                      std::to_string(set.candidates.size()));
    }
  }
  return set;
}

namespace {

void shuffle_candidates(CandidateSet& set, std::uint64_t subset_seed) {
  Rng rng(splitmix64(subset_seed ^ fnv1a64(set.source)));
  rng.shuffle(set.candidates);
}

void check_no_shared_labels(const std::vector<MappingPair>& pairs,
                            const Ontology& src_onto,
                            const Ontology& tgt_onto) {
  for (const MappingPair& p : pairs) {
    if (share_normalized_label(src_onto.at(p.source), tgt_onto.at(p.target))) {
      throw DataError("assembled subset contains string-matched pair " +
                      p.source + " -> " + p.target);
    }
  }
}

}  // namespace

AssembledSubset assemble_subset(const Ontology& src_onto,
                                const Ontology& tgt_onto,
                                const std::vector<MappingPair>& reference,
                                const InvertedIndex& ix, std::size_t n_matched,
                                std::size_t n_unmatched,
                                std::size_t candidate_size, std::uint64_t seed,
                                ExecMode mode) {
  const auto filtered = filter_string_matched(reference, src_onto, tgt_onto);
  const auto matched =
      sample_matched_sources(filtered, n_matched, derive_seed(seed, "matched"));
  const auto unmatched = sample_unmatched_sources(
      src_onto, reference, n_unmatched, derive_seed(seed, "unmatched"));

  std::map<ConceptIri, std::set<ConceptIri>> reference_targets;
  for (const MappingPair& p : reference) {
    reference_targets[p.source].insert(p.target);
  }

  AssembledSubset out;
  out.subset.seed = seed;
  out.subset.matched_sets.resize(matched.size());
  out.subset.unmatched_sets.resize(unmatched.size());

  const std::int64_t total =
      static_cast<std::int64_t>(matched.size() + unmatched.size());
  std::exception_ptr first_error;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::Parallel)
#endif
  for (std::int64_t idx = 0; idx < total; ++idx) {
    try {
      const std::size_t i = static_cast<std::size_t>(idx);
      CandidateSet set;
      if (i < matched.size()) {
        set = build_candidate_set(matched[i].source, matched[i].target,
                                  src_onto, tgt_onto, ix, reference_targets,
                                  candidate_size);
        shuffle_candidates(set, seed);
        out.subset.matched_sets[i] = std::move(set);
      } else {
        const std::size_t j = i - matched.size();
        set = build_candidate_set(unmatched[j], std::nullopt, src_onto,
                                  tgt_onto, ix, reference_targets,
                                  candidate_size);
        shuffle_candidates(set, seed);
        out.subset.unmatched_sets[j] = std::move(set);
      }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  check_no_shared_labels(matched, src_onto, tgt_onto);

  out.reference.matched.insert(matched.begin(), matched.end());
  out.reference.unmatched_sources.insert(unmatched.begin(), unmatched.end());
  return out;
}

std::string serialize_subset_jsonl(const TaskSubset& subset) {
  std::string out;
  auto emit = [&out](const CandidateSet& s) {
    nlohmann::ordered_json line;
    line["source"] = s.source;
    if (s.ground_truth) {
      line["ground_truth"] = *s.ground_truth;
    } else {
      line["ground_truth"] = nullptr;
    }
    line["candidates"] = s.candidates;
    out += line.dump();
    out += '\n';
  };
  for (const CandidateSet& s : subset.matched_sets) emit(s);
  for (const CandidateSet& s : subset.unmatched_sets) emit(s);
  return out;
}

TaskSubset parse_subset_jsonl(std::string_view text) {
  TaskSubset subset;
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("subset line " + std::to_string(lineno) +
                       " is not valid JSON: " + e.what());
    }
    if (!rec.is_object() || !rec.contains("source") ||
        !rec["source"].is_string() || !rec.contains("ground_truth") ||
        !rec.contains("candidates") || !rec["candidates"].is_array()) {
      throw ParseError("subset line " + std::to_string(lineno) +
                       ": expected {source, ground_truth, candidates}");
    }
    CandidateSet s;
    s.source = rec["source"].get<std::string>();
    if (!rec["ground_truth"].is_null()) {
      s.ground_truth = rec["ground_truth"].get<std::string>();
    }
    for (const auto& c : rec["candidates"]) {
      s.candidates.push_back(c.get<std::string>());
    }
    if (s.ground_truth) {
      subset.matched_sets.push_back(std::move(s));
    } else {
      subset.unmatched_sets.push_back(std::move(s));
    }
  }
  return subset;
}

}  // namespace ontomatch
