#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "ontomatch/scorers.hpp"

namespace ontomatch {

// Persistent verdict store. Append-only JSON Lines
// {"key","scorer_id","answer","yes_prob","no_prob"}; the last record for
// a key wins. Appends are serialized through one writer; lookups may run
// concurrently with it.
class VerdictCache {
 public:
  // Loads existing records; the file is created on first store.
  // Throws CacheError identifying the first unreadable record.
  explicit VerdictCache(std::filesystem::path file);

  static std::string make_key(std::string_view scorer_id,
                              std::string_view key_material);

  std::optional<Verdict> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& scorer_id,
             const Verdict& v);

  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  std::unordered_map<std::string, Verdict> entries_;
  std::ofstream out_;
  mutable std::mutex mu_;
};

// Cache-through classification: stored verdict on hit, otherwise the
// inner scorer runs and its verdict is persisted. Inner errors propagate
// without touching the cache. cache may be null (plain classify).
Verdict cached_classify(VerdictCache* cache, PairScorer& inner,
                        const PairTask& task, bool* was_hit = nullptr);

struct BatchOutcome {
  std::vector<Verdict> verdicts;  // aligned with the task list
  std::size_t cache_hits = 0;
  std::size_t classified = 0;
};

// Classifies every task, optionally through a cache. The Parallel mode
// runs the loop with OpenMP using `threads` workers (0 = library
// default); results are written into per-task slots so the outcome is
// identical to Serial regardless of scheduling. The first error wins and
// is rethrown after the loop drains.
BatchOutcome score_pairs(const std::vector<PairTask>& tasks, PairScorer& scorer,
                         VerdictCache* cache, ExecMode mode, int threads = 0);

}  // namespace ontomatch
