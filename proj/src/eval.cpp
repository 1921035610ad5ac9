#include "ontomatch/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ontomatch/errors.hpp"

namespace ontomatch {

namespace {

bool ranks_before(const ScoredMapping& a, const ScoredMapping& b) {
  const bool a_yes = a.verdict.answer == Answer::Yes;
  const bool b_yes = b.verdict.answer == Answer::Yes;
  if (a_yes != b_yes) return a_yes;
  if (a_yes) {
    if (*a.verdict.yes_prob != *b.verdict.yes_prob) {
      return *a.verdict.yes_prob > *b.verdict.yes_prob;
    }
  } else {
    if (*a.verdict.no_prob != *b.verdict.no_prob) {
      return *a.verdict.no_prob < *b.verdict.no_prob;
    }
  }
  return a.target < b.target;
}

bool predicted_true(const Verdict& v, double threshold) {
  if (v.answer != Answer::Yes) return false;
  if (!v.yes_prob.has_value()) return threshold == 0.0;
  return *v.yes_prob >= threshold;
}

std::string pair_text(const MappingPair& p) {
  return p.source + " -> " + p.target;
}

std::string list_pairs(const std::vector<MappingPair>& pairs,
                       std::size_t cap = 20) {
  std::string out;
  const std::size_t shown = std::min(cap, pairs.size());
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) out += ", ";
    out += pair_text(pairs[i]);
  }
  if (pairs.size() > shown) {
    out += " (+" + std::to_string(pairs.size() - shown) + " more)";
  }
  return out;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt6_or_null(const std::optional<double>& v) {
  return v ? fmt6(*v) : "null";
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

// Per-candidate-set results, merged after the (possibly parallel) sweep.
struct SetResult {
  std::vector<MappingPair> predicted;
  std::size_t gt_rank = 0;  // 1-based; matched sets under a full-probability run
};

}  // namespace

std::vector<ConceptIri> rank_candidates(const std::vector<ScoredMapping>& ms) {
  if (ms.empty()) return {};
  for (const ScoredMapping& m : ms) {
    if (m.source != ms.front().source) {
      throw DataError("rank_candidates got mixed sources: " +
                      ms.front().source + " and " + m.source);
    }
    if (!m.verdict.has_probs()) {
      throw DataError("pair " + pair_text({m.source, m.target}) +
                      " carries no probabilities and cannot be ranked");
    }
  }
  std::vector<ScoredMapping> sorted = ms;
  std::sort(sorted.begin(), sorted.end(), ranks_before);
  std::vector<ConceptIri> out;
  out.reserve(sorted.size());
  for (const ScoredMapping& m : sorted) out.push_back(m.target);
  return out;
}

std::set<MappingPair> apply_threshold(const std::vector<ScoredMapping>& ms,
                                      double threshold) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw ConfigError("threshold must lie in [0,1]");
  }
  std::set<MappingPair> pred;
  for (const ScoredMapping& m : ms) {
    if (predicted_true(m.verdict, threshold)) {
      pred.insert({m.source, m.target});
    }
  }
  return pred;
}

PrfMetrics prf_metrics(const std::set<MappingPair>& pred,
                       const std::set<MappingPair>& ref) {
  if (ref.empty()) {
    throw DataError("reference set is empty; precision and recall undefined");
  }
  std::size_t tp = 0;
  for (const MappingPair& p : pred) tp += ref.count(p);
  PrfMetrics m;
  m.precision = pred.empty()
                    ? 0.0
                    : static_cast<double>(tp) / static_cast<double>(pred.size());
  m.recall = static_cast<double>(tp) / static_cast<double>(ref.size());
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

RankingMetrics ranking_metrics(
    const std::map<ConceptIri, std::vector<ConceptIri>>& ranked,
    const std::set<MappingPair>& ref, std::size_t k) {
  if (ref.empty()) {
    throw DataError("reference set is empty; ranking metrics undefined");
  }
  std::size_t hits = 0;
  double mrr_sum = 0.0;
  for (const MappingPair& p : ref) {
    auto it = ranked.find(p.source);
    if (it == ranked.end()) {
      throw DataError("no ranked candidates for source " + p.source);
    }
    const auto& order = it->second;
    auto pos = std::find(order.begin(), order.end(), p.target);
    if (pos == order.end()) {
      throw DataError("ground truth " + p.target +
                      " missing from the ranked candidates of " + p.source);
    }
    const std::size_t rank = static_cast<std::size_t>(pos - order.begin()) + 1;
    if (rank <= k) ++hits;
    mrr_sum += 1.0 / static_cast<double>(rank);
  }
  RankingMetrics m;
  m.hits_at_k = static_cast<double>(hits) / static_cast<double>(ref.size());
  m.mrr = mrr_sum / static_cast<double>(ref.size());
  return m;
}

double rejection_rate(const std::set<MappingPair>& pred,
                      const std::vector<CandidateSet>& unmatched_sets) {
  if (unmatched_sets.empty()) {
    throw DataError("no unmatched sources; rejection rate undefined");
  }
  std::size_t rejected = 0;
  for (const CandidateSet& cs : unmatched_sets) {
    bool all_false = true;
    for (const ConceptIri& cand : cs.candidates) {
      if (pred.count({cs.source, cand})) {
        all_false = false;
        break;
      }
    }
    if (all_false) ++rejected;
  }
  return static_cast<double>(rejected) /
         static_cast<double>(unmatched_sets.size());
}

EvalReport build_report(const TaskSubset& subset, const ReferenceAlignment& ref,
                        const std::vector<ScoredMapping>& ms,
                        const EvalSettings& settings, ExecMode mode) {
  if (settings.threshold < 0.0 || settings.threshold > 1.0) {
    throw ConfigError("threshold must lie in [0,1]");
  }

  // The reference must describe exactly this subset.
  std::set<MappingPair> subset_matched;
  std::set<ConceptIri> subset_unmatched;
  for (const CandidateSet& cs : subset.matched_sets) {
    if (!cs.ground_truth) {
      throw DataError("matched set for " + cs.source + " lacks a ground truth");
    }
    subset_matched.insert({cs.source, *cs.ground_truth});
  }
  for (const CandidateSet& cs : subset.unmatched_sets) {
    subset_unmatched.insert(cs.source);
  }
  if (subset_matched != ref.matched || subset_unmatched != ref.unmatched_sources) {
    throw DataError("reference alignment does not match the subset contents");
  }

  // Verdict lookup with exactly-once coverage of the subset pairs.
  std::map<MappingPair, Verdict> by_pair;
  for (const ScoredMapping& m : ms) {
    const MappingPair p{m.source, m.target};
    if (!by_pair.emplace(p, m.verdict).second) {
      throw DataError("scored run repeats pair " + pair_text(p));
    }
  }
  std::vector<const CandidateSet*> sets;
  sets.reserve(subset.matched_sets.size() + subset.unmatched_sets.size());
  for (const CandidateSet& cs : subset.matched_sets) sets.push_back(&cs);
  for (const CandidateSet& cs : subset.unmatched_sets) sets.push_back(&cs);

  std::set<MappingPair> subset_pairs;
  std::vector<MappingPair> missing;
  for (const CandidateSet* cs : sets) {
    for (const ConceptIri& cand : cs->candidates) {
      const MappingPair p{cs->source, cand};
      subset_pairs.insert(p);
      if (!by_pair.count(p)) missing.push_back(p);
    }
  }
  if (!missing.empty()) {
    throw DataError("scored run misses " + std::to_string(missing.size()) +
                    " subset pair(s): " + list_pairs(missing));
  }
  if (ms.size() != subset_pairs.size()) {
    std::vector<MappingPair> strays;
    for (const auto& [pair, verdict] : by_pair) {
      if (!subset_pairs.count(pair)) strays.push_back(pair);
    }
    throw DataError("scored run contains " + std::to_string(strays.size()) +
                    " pair(s) outside the subset: " + list_pairs(strays));
  }

  const bool all_probs = std::all_of(
      ms.begin(), ms.end(),
      [](const ScoredMapping& m) { return m.verdict.has_probs(); });

  // Per-set sweep: thresholding and (when eligible) the ground-truth
  // rank. Sets are independent, so the parallel sweep fills the same
  // slots the serial one does.
  const std::size_t n_matched = subset.matched_sets.size();
  std::vector<SetResult> results(sets.size());
  std::exception_ptr error;
  std::mutex error_mu;

  auto sweep = [&](std::size_t i) {
    try {
      const CandidateSet& cs = *sets[i];
      SetResult& r = results[i];
      std::vector<ScoredMapping> scored;
      scored.reserve(cs.candidates.size());
      for (const ConceptIri& cand : cs.candidates) {
        const MappingPair p{cs.source, cand};
        const Verdict& v = by_pair.find(p)->second;
        scored.push_back({cs.source, cand, v});
        if (predicted_true(v, settings.threshold)) r.predicted.push_back(p);
      }
      if (i < n_matched && all_probs) {
        const std::vector<ConceptIri> order = rank_candidates(scored);
        auto pos = std::find(order.begin(), order.end(), *cs.ground_truth);
        if (pos == order.end()) {
          throw DataError("ground truth " + *cs.ground_truth +
                          " missing from the candidates of " + cs.source);
        }
        r.gt_rank = static_cast<std::size_t>(pos - order.begin()) + 1;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
    }
  };

  const auto n_sets = static_cast<std::int64_t>(sets.size());
#ifdef _OPENMP
  if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n_sets; ++i) sweep(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < n_sets; ++i) sweep(static_cast<std::size_t>(i));
  }
#else
  (void)mode;
  for (std::int64_t i = 0; i < n_sets; ++i) sweep(static_cast<std::size_t>(i));
#endif
  if (error) std::rethrow_exception(error);

  // Deterministic merge, independent of sweep scheduling.
  std::set<MappingPair> pred;
  for (const SetResult& r : results) {
    pred.insert(r.predicted.begin(), r.predicted.end());
  }

  EvalReport report;
  report.settings = settings;
  const PrfMetrics prf = prf_metrics(pred, ref.matched);
  report.precision = prf.precision;
  report.recall = prf.recall;
  report.f1 = prf.f1;
  report.rejection_rate = rejection_rate(pred, subset.unmatched_sets);

  if (all_probs) {
    // 1/rank terms accumulate in sorted-source order, matching
    // ranking_metrics over a source-keyed map.
    std::map<ConceptIri, std::size_t> rank_by_source;
    for (std::size_t i = 0; i < n_matched; ++i) {
      rank_by_source[sets[i]->source] = results[i].gt_rank;
    }
    std::size_t hits = 0;
    double mrr_sum = 0.0;
    for (const auto& [source, rank] : rank_by_source) {
      if (rank <= 1) ++hits;
      mrr_sum += 1.0 / static_cast<double>(rank);
    }
    report.hits_at_1 =
        static_cast<double>(hits) / static_cast<double>(n_matched);
    report.mrr = mrr_sum / static_cast<double>(n_matched);
  }

  report.counts.predicted = pred.size();
  report.counts.reference = ref.matched.size();
  report.counts.unmatched_sources = subset.unmatched_sets.size();
  std::size_t tp = 0;
  for (const MappingPair& p : pred) tp += ref.matched.count(p);
  report.counts.true_positives = tp;
  return report;
}

std::string serialize_report(const EvalReport& report) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"precision\": " << fmt6(report.precision) << ",\n";
  out << "  \"recall\": " << fmt6(report.recall) << ",\n";
  out << "  \"f1\": " << fmt6(report.f1) << ",\n";
  out << "  \"hits_at_1\": " << fmt6_or_null(report.hits_at_1) << ",\n";
  out << "  \"mrr\": " << fmt6_or_null(report.mrr) << ",\n";
  out << "  \"rejection_rate\": " << fmt6(report.rejection_rate) << ",\n";
  out << "  \"counts\": {\n";
  out << "    \"predicted\": " << report.counts.predicted << ",\n";
  out << "    \"reference\": " << report.counts.reference << ",\n";
  out << "    \"unmatched_sources\": " << report.counts.unmatched_sources
      << ",\n";
  out << "    \"true_positives\": " << report.counts.true_positives << "\n";
  out << "  },\n";
  out << "  \"settings\": {\n";
  out << "    \"threshold\": " << fmt6(report.settings.threshold) << ",\n";
  out << "    \"with_hierarchy\": "
      << (report.settings.with_hierarchy ? "true" : "false") << ",\n";
  out << "    \"scorer_id\": " << quoted(report.settings.scorer_id) << ",\n";
  out << "    \"seed\": " << report.settings.seed << "\n";
  out << "  }\n";
  out << "}\n";
  return out.str();
}

std::string serialize_scored_run(const std::vector<ScoredMapping>& ms) {
  std::string out;
  for (const ScoredMapping& m : ms) {
    nlohmann::ordered_json rec;
    rec["source"] = m.source;
    rec["target"] = m.target;
    rec["answer"] = to_string(m.verdict.answer);
    if (m.verdict.yes_prob) {
      rec["yes_prob"] = *m.verdict.yes_prob;
    } else {
      rec["yes_prob"] = nullptr;
    }
    if (m.verdict.no_prob) {
      rec["no_prob"] = *m.verdict.no_prob;
    } else {
      rec["no_prob"] = nullptr;
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::vector<ScoredMapping> parse_scored_run(std::string_view text) {
  std::vector<ScoredMapping> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "scored run line " + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("source") ||
        !rec["source"].is_string() || !rec.contains("target") ||
        !rec["target"].is_string() || !rec.contains("answer") ||
        !rec["answer"].is_string()) {
      throw ParseError(where +
                       ": record needs string \"source\", \"target\", and "
                       "\"answer\"");
    }
    ScoredMapping m;
    m.source = rec["source"].get<std::string>();
    m.target = rec["target"].get<std::string>();
    const std::string answer = rec["answer"].get<std::string>();
    if (answer == "Yes") {
      m.verdict.answer = Answer::Yes;
    } else if (answer == "No") {
      m.verdict.answer = Answer::No;
    } else {
      throw ParseError(where + ": answer must be \"Yes\" or \"No\", got \"" +
                       answer + "\"");
    }
    auto prob = [&](const char* field) -> std::optional<double> {
      if (!rec.contains(field) || rec[field].is_null()) return std::nullopt;
      if (!rec[field].is_number()) {
        throw ParseError(where + ": \"" + field +
                         "\" must be a number or null");
      }
      return rec[field].get<double>();
    };
    m.verdict.yes_prob = prob("yes_prob");
    m.verdict.no_prob = prob("no_prob");
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace ontomatch
