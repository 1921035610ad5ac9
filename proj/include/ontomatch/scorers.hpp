#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ontomatch/dataset.hpp"
#include "ontomatch/errors.hpp"
#include "ontomatch/exec.hpp"

namespace ontomatch {

enum class Answer { Yes, No };

inline const char* to_string(Answer a) { return a == Answer::Yes ? "Yes" : "No"; }

// Yes/No classification of one concept pair. Probabilities are carried
// for scorers that expose them (label-probability endpoint, edit
// similarity, mock); completion-mode verdicts carry none and are
// ineligible for ranking.
struct Verdict {
  Answer answer = Answer::No;
  std::optional<double> yes_prob;
  std::optional<double> no_prob;

  bool has_probs() const { return yes_prob.has_value() && no_prob.has_value(); }
  bool operator==(const Verdict&) const = default;
};

enum class CompletionAnswer { Yes, No, Unparseable };

// Extracts a yes/no from free-form completion text: first a leading
// "yes"/"no" token on the first line (markup and punctuation stripped),
// then the first standalone "yes"/"no" word anywhere in the text.
CompletionAnswer parse_completion_answer(std::string_view text);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{100};  // doubles per attempt
};

enum class ScorerKind { LlmEndpoint, EditSimilarity, Mock };
enum class LlmMode { LabelProbs, Completion };

struct ScorerSpec {
  ScorerKind kind = ScorerKind::Mock;
  std::string endpoint_url;
  std::string model_id;
  std::string api_key;  // sent as a bearer token when non-empty
  int concurrency_limit = 4;
  RetryPolicy retry;
  LlmMode llm_mode = LlmMode::LabelProbs;
  int max_completion_tokens = 64;
  double edit_threshold = 0.9;
};

// One (source, target) classification job. Labels are the raw stored
// labels; prompt is the rendered task prompt (LLM scorers only).
struct PairTask {
  ConceptIri source;
  ConceptIri target;
  std::vector<std::string> source_labels;
  std::vector<std::string> target_labels;
  std::string prompt;
};

class PairScorer {
 public:
  virtual ~PairScorer() = default;

  // Stable identity; part of every cache key.
  virtual std::string id() const = 0;

  // The scorer-relevant content of a task, canonical enough that equal
  // material implies an equal verdict.
  virtual std::string key_material(const PairTask& task) const = 0;

  virtual Verdict classify(const PairTask& task) = 0;
};

// Max normalized edit similarity over all label pairs; answers Yes at or
// above the threshold. yes_prob carries the similarity.
class EditSimilarityScorer : public PairScorer {
 public:
  explicit EditSimilarityScorer(double threshold);

  std::string id() const override;
  std::string key_material(const PairTask& task) const override;
  Verdict classify(const PairTask& task) override;

  // Exposed for direct use and testing.
  static double similarity(const std::vector<std::string>& src_labels,
                           const std::vector<std::string>& tgt_labels);

 private:
  double threshold_;
};

inline Verdict edit_similarity_classify(
    const std::vector<std::string>& src_labels,
    const std::vector<std::string>& tgt_labels, double threshold) {
  EditSimilarityScorer scorer(threshold);
  PairTask t;
  t.source_labels = src_labels;
  t.target_labels = tgt_labels;
  return scorer.classify(t);
}

// Answers Yes (probability 1) exactly on the given reference pairs.
class MockScorer : public PairScorer {
 public:
  explicit MockScorer(std::set<MappingPair> truth) : truth_(std::move(truth)) {}

  std::string id() const override { return "mock"; }
  std::string key_material(const PairTask& task) const override {
    return task.source + "\t" + task.target;
  }
  Verdict classify(const PairTask& task) override {
    const bool hit = truth_.count({task.source, task.target}) > 0;
    return hit ? Verdict{Answer::Yes, 1.0, 0.0} : Verdict{Answer::No, 0.0, 1.0};
  }

 private:
  std::set<MappingPair> truth_;
};

// HTTP client for the classification endpoint. Label-probability mode
// posts {model, prompt, labels:["Yes","No"]} to /classify and answers by
// argmax (ties -> No); completion mode posts to /complete and parses the
// text, counting unparseable responses (treated as No, probability-free).
// Transient failures (transport errors, 429, 5xx) retry with exponential
// backoff; at most `concurrency_limit` requests are in flight at once.
class LlmEndpointScorer : public PairScorer {
 public:
  explicit LlmEndpointScorer(ScorerSpec spec);

  std::string id() const override;
  std::string key_material(const PairTask& task) const override {
    return task.prompt;
  }
  Verdict classify(const PairTask& task) override;

  std::size_t request_count() const { return requests_.load(); }
  std::size_t unparseable_count() const { return unparseable_.load(); }

 private:
  struct HttpResponse {
    int status = 0;
    std::string body;
  };
  HttpResponse post_with_retries(const std::string& path,
                                 const std::string& body);

  ScorerSpec spec_;
  std::string host_;         // scheme://host:port
  std::string path_prefix_;  // optional path component of the endpoint URL
  std::counting_semaphore<1 << 20> in_flight_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> unparseable_{0};
};

// Validates the spec and instantiates the scorer. Mock needs the
// reference pairs it should affirm.
std::unique_ptr<PairScorer> make_scorer(const ScorerSpec& spec,
                                        const std::set<MappingPair>* mock_truth);

}  // namespace ontomatch
