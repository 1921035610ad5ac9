#include "ontomatch/cache.hpp"

#include <atomic>
#include <fstream>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ontomatch/hash.hpp"

namespace ontomatch {

namespace {

std::string verdict_line(const std::string& key, const std::string& scorer_id,
                         const Verdict& v) {
  nlohmann::ordered_json rec;
  rec["key"] = key;
  rec["scorer_id"] = scorer_id;
  rec["answer"] = to_string(v.answer);
  if (v.yes_prob) {
    rec["yes_prob"] = *v.yes_prob;
  } else {
    rec["yes_prob"] = nullptr;
  }
  if (v.no_prob) {
    rec["no_prob"] = *v.no_prob;
  } else {
    rec["no_prob"] = nullptr;
  }
  return rec.dump();
}

Verdict parse_record(const nlohmann::json& rec, const std::string& where) {
  if (!rec.is_object() || !rec.contains("key") || !rec["key"].is_string() ||
      !rec.contains("answer") || !rec["answer"].is_string()) {
    throw CacheError(where + ": record needs string \"key\" and \"answer\"");
  }
  const std::string answer = rec["answer"].get<std::string>();
  Verdict v;
  if (answer == "Yes") {
    v.answer = Answer::Yes;
  } else if (answer == "No") {
    v.answer = Answer::No;
  } else {
    throw CacheError(where + ": answer must be \"Yes\" or \"No\", got \"" +
                     answer + "\"");
  }
  auto prob = [&](const char* field) -> std::optional<double> {
    if (!rec.contains(field) || rec[field].is_null()) return std::nullopt;
    if (!rec[field].is_number()) {
      throw CacheError(where + ": \"" + field + "\" must be a number or null");
    }
    return rec[field].get<double>();
  };
  v.yes_prob = prob("yes_prob");
  v.no_prob = prob("no_prob");
  return v;
}

}  // namespace

VerdictCache::VerdictCache(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file_.parent_path(), ec);
  }
  std::ifstream in(file_);
  if (!in.is_open()) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where =
        "cache file " + file_.string() + " line " + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CacheError(where + ": " + e.what());
    }
    Verdict v = parse_record(rec, where);
    entries_[rec["key"].get<std::string>()] = v;  // last record wins
  }
}

std::string VerdictCache::make_key(std::string_view scorer_id,
                                   std::string_view key_material) {
  std::string material;
  material.reserve(scorer_id.size() + 1 + key_material.size());
  material.append(scorer_id);
  material.push_back('\n');
  material.append(key_material);
  return sha256_hex(material);
}

std::optional<Verdict> VerdictCache::lookup(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void VerdictCache::store(const std::string& key, const std::string& scorer_id,
                         const Verdict& v) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_[key] = v;
  if (!out_.is_open()) {
    out_.open(file_, std::ios::app);
    if (!out_.is_open()) {
      throw CacheError("cannot open cache file for append: " + file_.string());
    }
  }
  out_ << verdict_line(key, scorer_id, v) << '\n';
  out_.flush();
}

std::size_t VerdictCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

Verdict cached_classify(VerdictCache* cache, PairScorer& scorer,
                        const PairTask& task, bool* was_hit) {
  if (was_hit) *was_hit = false;
  if (!cache) return scorer.classify(task);
  const std::string key =
      VerdictCache::make_key(scorer.id(), scorer.key_material(task));
  if (auto hit = cache->lookup(key)) {
    if (was_hit) *was_hit = true;
    return *hit;
  }
  Verdict v = scorer.classify(task);
  cache->store(key, scorer.id(), v);
  return v;
}

BatchOutcome score_pairs(const std::vector<PairTask>& tasks, PairScorer& scorer,
                         VerdictCache* cache, ExecMode mode, int threads) {
  BatchOutcome out;
  out.verdicts.resize(tasks.size());
  std::atomic<std::size_t> hits{0};
  std::atomic<std::size_t> classified{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto body = [&](std::size_t i) {
    if (failed.load(std::memory_order_relaxed)) return;
    try {
      bool hit = false;
      out.verdicts[i] = cached_classify(cache, scorer, tasks[i], &hit);
      if (hit) {
        hits.fetch_add(1, std::memory_order_relaxed);
      } else {
        classified.fetch_add(1, std::memory_order_relaxed);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  };

  const auto n = static_cast<std::int64_t>(tasks.size());
#ifdef _OPENMP
  if (mode == ExecMode::Parallel) {
    const int want = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(want)
    for (std::int64_t i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
  }
#else
  (void)threads;
  (void)mode;
  for (std::int64_t i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
#endif

  if (error) std::rethrow_exception(error);
  out.cache_hits = hits.load();
  out.classified = classified.load();
  return out;
}

}  // namespace ontomatch
