#pragma once

// Shared fixtures and independent oracles. The oracles recompute results
// from first principles (full-matrix DP, brute-force scoring, direct
// formula evaluation) so they share no logic with the library paths they
// check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ontomatch/dataset.hpp"
#include "ontomatch/eval.hpp"
#include "ontomatch/ontology.hpp"
#include "ontomatch/retrieval.hpp"
#include "ontomatch/utf8.hpp"

namespace testutil {

inline ontomatch::Concept make_concept(
    std::string iri, std::vector<std::string> labels,
    std::vector<std::string> parents = {}) {
  ontomatch::Concept c;
  c.iri = std::move(iri);
  c.labels = std::move(labels);
  c.parents = std::move(parents);
  return c;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const std::uint64_t id = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("ontomatch_test_" + std::to_string(id) + "_" +
             std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& bytes) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Full-matrix edit distance, no row reuse.
inline std::size_t levenshtein_oracle(const std::u32string& a,
                                      const std::u32string& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1,
                                          std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[n][m];
}

inline std::size_t levenshtein_oracle(const std::string& a,
                                      const std::string& b) {
  return levenshtein_oracle(ontomatch::decode_utf8(a), ontomatch::decode_utf8(b));
}

// ---------------------------------------------------------------------
// Random scored runs and an independent metric calculator.

// Candidate ordering by repeated selection of the pairwise-first entry;
// shares no code with the production comparator.
inline std::vector<ontomatch::ConceptIri> brute_force_rank(
    std::vector<ontomatch::ScoredMapping> ms) {
  using ontomatch::Answer;
  auto precedes = [](const ontomatch::ScoredMapping& a,
                     const ontomatch::ScoredMapping& b) {
    const bool ay = a.verdict.answer == Answer::Yes;
    const bool by = b.verdict.answer == Answer::Yes;
    if (ay != by) return ay;
    if (ay) {
      if (*a.verdict.yes_prob != *b.verdict.yes_prob) {
        return *a.verdict.yes_prob > *b.verdict.yes_prob;
      }
    } else {
      if (*a.verdict.no_prob != *b.verdict.no_prob) {
        return *a.verdict.no_prob < *b.verdict.no_prob;
      }
    }
    return a.target < b.target;
  };
  std::vector<ontomatch::ConceptIri> out;
  while (!ms.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < ms.size(); ++i) {
      if (precedes(ms[i], ms[best])) best = i;
    }
    out.push_back(ms[best].target);
    ms.erase(ms.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

// Subset pairs get probability verdicts honoring answer = argmax
// (ties -> No); some runs use sub-normalized probabilities.
inline ontomatch::Verdict random_prob_verdict(std::mt19937_64& g) {
  ontomatch::Verdict v;
  const double yes = static_cast<double>(g() % 1001) / 1000.0;
  double no = 1.0 - yes;
  if (g() % 4 == 0) no *= 0.5;  // unnormalized endpoints exist
  v.yes_prob = yes;
  v.no_prob = no;
  v.answer = yes > no ? ontomatch::Answer::Yes : ontomatch::Answer::No;
  return v;
}

struct RandomRun {
  ontomatch::TaskSubset subset;
  ontomatch::ReferenceAlignment reference;
  std::vector<ontomatch::ScoredMapping> run;
};

inline RandomRun random_run(std::mt19937_64& g, std::size_t max_sources,
                            std::size_t max_candidates,
                            bool with_probs = true) {
  RandomRun r;
  const std::size_t n_matched = 1 + g() % max_sources;
  const std::size_t n_unmatched = 1 + g() % max_sources;
  const std::size_t n_targets = std::max<std::size_t>(max_candidates, 4);
  std::size_t src_id = 0;
  auto add_set = [&](bool matched) {
    ontomatch::CandidateSet cs;
    cs.source = "s:" + std::to_string(src_id++);
    const std::size_t n_cands = 1 + g() % max_candidates;
    std::vector<std::size_t> pool(n_targets);
    for (std::size_t i = 0; i < n_targets; ++i) pool[i] = i;
    for (std::size_t i = 0; i < n_cands; ++i) {
      std::swap(pool[i], pool[i + g() % (n_targets - i)]);
    }
    for (std::size_t i = 0; i < n_cands; ++i) {
      cs.candidates.push_back("t:" + std::to_string(pool[i]));
    }
    if (matched) {
      cs.ground_truth = cs.candidates[g() % cs.candidates.size()];
      r.subset.matched_sets.push_back(cs);
      r.reference.matched.insert({cs.source, *cs.ground_truth});
    } else {
      r.subset.unmatched_sets.push_back(cs);
      r.reference.unmatched_sources.insert(cs.source);
    }
  };
  for (std::size_t i = 0; i < n_matched; ++i) add_set(true);
  for (std::size_t i = 0; i < n_unmatched; ++i) add_set(false);

  for (const auto* sets : {&r.subset.matched_sets, &r.subset.unmatched_sets}) {
    for (const ontomatch::CandidateSet& cs : *sets) {
      for (const ontomatch::ConceptIri& cand : cs.candidates) {
        ontomatch::ScoredMapping m;
        m.source = cs.source;
        m.target = cand;
        if (with_probs) {
          m.verdict = random_prob_verdict(g);
        } else {
          m.verdict.answer =
              g() % 2 ? ontomatch::Answer::Yes : ontomatch::Answer::No;
        }
        r.run.push_back(std::move(m));
      }
    }
  }
  return r;
}

struct OracleReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> hits_at_1;
  std::optional<double> mrr;
  double rejection_rate = 0.0;
  std::size_t predicted = 0;
  std::size_t true_positives = 0;
};

// Straight transcription of the metric definitions: prediction requires
// a Yes answer passing the threshold; ranking sorts Yes by descending
// yes score then No by ascending no score with IRI tie-break; Hits@1 and
// MRR average indicator and reciprocal rank over matched sources; RR is
// the all-candidates-rejected fraction of unmatched sources.
inline OracleReport oracle_report(const ontomatch::TaskSubset& subset,
                                  const std::vector<ontomatch::ScoredMapping>& run,
                                  double tau) {
  using ontomatch::Answer;
  std::map<std::pair<std::string, std::string>, ontomatch::Verdict> v;
  bool all_probs = true;
  for (const ontomatch::ScoredMapping& m : run) {
    v[{m.source, m.target}] = m.verdict;
    all_probs = all_probs && m.verdict.has_probs();
  }
  auto is_pred = [&](const std::string& s, const std::string& t) {
    const ontomatch::Verdict& verdict = v.at({s, t});
    if (verdict.answer != Answer::Yes) return false;
    if (!verdict.yes_prob.has_value()) return tau == 0.0;
    return *verdict.yes_prob >= tau;
  };

  OracleReport r;
  std::size_t n_pred = 0;
  std::size_t tp = 0;
  for (const ontomatch::CandidateSet& cs : subset.matched_sets) {
    for (const auto& cand : cs.candidates) {
      if (is_pred(cs.source, cand)) {
        ++n_pred;
        if (cand == *cs.ground_truth) ++tp;
      }
    }
  }
  for (const ontomatch::CandidateSet& cs : subset.unmatched_sets) {
    for (const auto& cand : cs.candidates) {
      if (is_pred(cs.source, cand)) ++n_pred;
    }
  }
  const double n_ref = static_cast<double>(subset.matched_sets.size());
  r.predicted = n_pred;
  r.true_positives = tp;
  r.precision = n_pred == 0 ? 0.0 : static_cast<double>(tp) / n_pred;
  r.recall = static_cast<double>(tp) / n_ref;
  r.f1 = (r.precision + r.recall) == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);

  if (all_probs) {
    std::size_t hits = 0;
    double mrr_sum = 0.0;
    for (const ontomatch::CandidateSet& cs : subset.matched_sets) {
      // Count candidates that must precede the ground truth.
      const ontomatch::Verdict& gt = v.at({cs.source, *cs.ground_truth});
      std::size_t before = 0;
      for (const auto& cand : cs.candidates) {
        if (cand == *cs.ground_truth) continue;
        const ontomatch::Verdict& other = v.at({cs.source, cand});
        const bool gt_yes = gt.answer == Answer::Yes;
        const bool other_yes = other.answer == Answer::Yes;
        bool precedes;
        if (other_yes != gt_yes) {
          precedes = other_yes;
        } else if (gt_yes) {
          precedes = *other.yes_prob > *gt.yes_prob ||
                     (*other.yes_prob == *gt.yes_prob && cand < *cs.ground_truth);
        } else {
          precedes = *other.no_prob < *gt.no_prob ||
                     (*other.no_prob == *gt.no_prob && cand < *cs.ground_truth);
        }
        if (precedes) ++before;
      }
      const std::size_t rank = before + 1;
      if (rank == 1) ++hits;
      mrr_sum += 1.0 / static_cast<double>(rank);
    }
    r.hits_at_1 = static_cast<double>(hits) / n_ref;
    r.mrr = mrr_sum / n_ref;
  }

  std::size_t rejected = 0;
  for (const ontomatch::CandidateSet& cs : subset.unmatched_sets) {
    bool any = false;
    for (const auto& cand : cs.candidates) {
      if (is_pred(cs.source, cand)) any = true;
    }
    if (!any) ++rejected;
  }
  r.rejection_rate = static_cast<double>(rejected) /
                     static_cast<double>(subset.unmatched_sets.size());
  return r;
}

// ---------------------------------------------------------------------
// Synthetic ontology pair. Matched pairs share word tokens but never a
// full normalized label, so they survive string-match filtering while
// staying reachable through the inverted index.

struct World {
  ontomatch::Ontology src;
  ontomatch::Ontology tgt;
  std::vector<ontomatch::MappingPair> refs;
  ontomatch::SubwordVocab vocab;
  std::string vocab_text;
};

namespace detail {

inline const std::vector<std::string>& qualifiers() {
  static const std::vector<std::string> words{
      "acute",    "chronic",  "benign",   "malignant", "primary",
      "secondary", "acquired", "congenital", "focal",  "diffuse",
      "mild",     "severe",   "partial",  "complete",  "proximal",
      "distal",   "anterior", "posterior", "medial",   "lateral"};
  return words;
}

inline const std::vector<std::string>& sites() {
  static const std::vector<std::string> words{
      "cardiac",  "hepatic", "renal",    "neural",   "dermal",
      "gastric",  "pulmonary", "skeletal", "vascular", "lymphoid",
      "thyroid",  "adrenal", "ocular",   "cochlear", "spinal",
      "cranial",  "arterial", "venous",  "mucosal",  "glandular"};
  return words;
}

inline const std::vector<std::string>& src_heads() {
  static const std::vector<std::string> words{"disorder", "lesion", "syndrome",
                                              "anomaly", "defect"};
  return words;
}

inline const std::vector<std::string>& tgt_heads() {
  static const std::vector<std::string> words{"disease", "neoplasm",
                                              "malformation", "abnormality",
                                              "finding"};
  return words;
}

inline std::string pad4(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(4 - std::min<std::size_t>(4, s.size()), '0') + s;
}

}  // namespace detail

// n_refs matched source/target pairs, n_unmatched extra sources without
// any reference entry, n_fillers extra targets.
inline World make_world(std::size_t n_refs, std::size_t n_unmatched,
                        std::size_t n_fillers) {
  using namespace detail;
  World w;
  const auto& qs = qualifiers();
  const auto& ss = sites();
  std::vector<ontomatch::Concept> src;
  std::vector<ontomatch::Concept> tgt;

  for (std::size_t i = 0; i < n_refs; ++i) {
    const std::string q = qs[i % qs.size()];
    const std::string s = ss[(i / qs.size()) % ss.size()];
    const std::string tag = pad4(i);
    const std::string src_iri = "src:m" + tag;
    const std::string tgt_iri = "tgt:m" + tag;

    std::vector<std::string> src_labels{q + " " + s + " " +
                                        src_heads()[i % src_heads().size()]};
    if (i % 3 == 0) {
      src_labels.push_back(s + " " + q + " variant " + tag);
    }
    std::vector<std::string> src_parents;
    if (i % 4 != 0 && i > 0) src_parents.push_back("src:m" + pad4(i - 1));
    src.push_back(make_concept(src_iri, src_labels, src_parents));

    std::vector<std::string> tgt_labels{q + " " + s + " " +
                                        tgt_heads()[(i + 2) % tgt_heads().size()]};
    std::vector<std::string> tgt_parents;
    if (i % 5 != 0 && i > 0) tgt_parents.push_back("tgt:m" + pad4(i - 1));
    tgt.push_back(make_concept(tgt_iri, tgt_labels, tgt_parents));

    w.refs.push_back({src_iri, tgt_iri});
  }
  for (std::size_t j = 0; j < n_unmatched; ++j) {
    const std::string tag = pad4(j);
    src.push_back(make_concept(
        "src:u" + tag,
        {"orphan " + qs[j % qs.size()] + " " + ss[(j * 3 + 1) % ss.size()] +
         " trait " + tag}));
  }
  for (std::size_t f = 0; f < n_fillers; ++f) {
    const std::string tag = pad4(f);
    std::vector<std::string> parents;
    if (f % 2 == 0 && f > 0) parents.push_back("tgt:f" + pad4(f - 1));
    tgt.push_back(make_concept(
        "tgt:f" + tag,
        {"spare " + qs[f % qs.size()] + " " + ss[(f * 7 + 3) % ss.size()] +
         " entity " + tag},
        parents));
  }

  w.src = ontomatch::Ontology::from_concepts(std::move(src));
  w.tgt = ontomatch::Ontology::from_concepts(std::move(tgt));

  std::vector<std::string> entries;
  for (const auto& pool : {qs, ss, src_heads(), tgt_heads()}) {
    entries.insert(entries.end(), pool.begin(), pool.end());
  }
  for (const char* extra : {"orphan", "trait", "spare", "entity", "variant"}) {
    entries.push_back(extra);
  }
  for (char d = '0'; d <= '9'; ++d) entries.push_back(std::string(1, d));
  std::sort(entries.begin(), entries.end());
  for (const std::string& e : entries) {
    w.vocab_text += e;
    w.vocab_text += '\n';
  }
  w.vocab = ontomatch::SubwordVocab::parse(w.vocab_text);
  return w;
}

inline std::string serialize_refs(const World& w) {
  return ontomatch::serialize_reference_tsv(w.refs);
}

}  // namespace testutil
