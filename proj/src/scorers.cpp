#include "ontomatch/scorers.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ontomatch/levenshtein.hpp"
#include "ontomatch/ontology.hpp"

namespace ontomatch {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<CompletionAnswer> classify_word(std::string_view word) {
  const std::string w = ascii_lower(word);
  if (w == "yes") return CompletionAnswer::Yes;
  if (w == "no") return CompletionAnswer::No;
  return std::nullopt;
}

}  // namespace

CompletionAnswer parse_completion_answer(std::string_view text) {
  // Leading token of the first line, punctuation/markup stripped.
  const std::string_view first_line = text.substr(0, text.find('\n'));
  std::size_t i = 0;
  while (i < first_line.size() && !is_word_char(first_line[i])) ++i;
  std::size_t j = i;
  while (j < first_line.size() &&
         std::isalpha(static_cast<unsigned char>(first_line[j]))) {
    ++j;
  }
  const bool bounded = j == first_line.size() || !is_word_char(first_line[j]);
  if (j > i && bounded) {
    if (auto a = classify_word(first_line.substr(i, j - i))) return *a;
  }

  // First standalone yes/no word anywhere in the text.
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    while (end < text.size() &&
           std::isalpha(static_cast<unsigned char>(text[end]))) {
      ++end;
    }
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const bool right_ok = end == text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) {
      if (auto a = classify_word(text.substr(pos, end - pos))) return *a;
    }
    pos = end;
  }
  return CompletionAnswer::Unparseable;
}

EditSimilarityScorer::EditSimilarityScorer(double threshold)
    : threshold_(threshold) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw ConfigError("edit similarity threshold must lie in [0,1]");
  }
}

std::string EditSimilarityScorer::id() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "edit-similarity:t=%.6f", threshold_);
  return buf;
}

std::string EditSimilarityScorer::key_material(const PairTask& task) const {
  auto canonical = [](const std::vector<std::string>& labels) {
    std::vector<std::string> norm;
    norm.reserve(labels.size());
    for (const std::string& l : labels) norm.push_back(normalize_label(l));
    std::sort(norm.begin(), norm.end());
    norm.erase(std::unique(norm.begin(), norm.end()), norm.end());
    std::string out;
    for (const std::string& l : norm) {
      out += l;
      out += '\x1f';
    }
    return out;
  };
  return canonical(task.source_labels) + "\x1e" + canonical(task.target_labels);
}

double EditSimilarityScorer::similarity(
    const std::vector<std::string>& src_labels,
    const std::vector<std::string>& tgt_labels) {
  if (src_labels.empty() || tgt_labels.empty()) {
    throw DataError("edit similarity needs at least one label per side");
  }
  double best = 0.0;
  for (const std::string& a : src_labels) {
    const std::string na = normalize_label(a);
    for (const std::string& b : tgt_labels) {
      best = std::max(best, normalized_edit_similarity(na, normalize_label(b)));
    }
  }
  return best;
}

Verdict EditSimilarityScorer::classify(const PairTask& task) {
  const double sim = similarity(task.source_labels, task.target_labels);
  Verdict v;
  v.answer = sim >= threshold_ ? Answer::Yes : Answer::No;
  v.yes_prob = sim;
  v.no_prob = 1.0 - sim;
  return v;
}

LlmEndpointScorer::LlmEndpointScorer(ScorerSpec spec)
    : spec_(std::move(spec)),
      in_flight_(std::max(1, spec_.concurrency_limit)) {
  if (spec_.endpoint_url.empty()) {
    throw ConfigError("endpoint scorer requires an endpoint URL");
  }
  if (spec_.concurrency_limit < 1) {
    throw ConfigError("concurrency limit must be at least 1");
  }
  if (spec_.retry.max_attempts < 1) {
    throw ConfigError("retry policy needs at least one attempt");
  }
  // Split scheme://host:port from any path component.
  const std::size_t scheme = spec_.endpoint_url.find("://");
  const std::size_t path_start =
      scheme == std::string::npos ? spec_.endpoint_url.find('/')
                                  : spec_.endpoint_url.find('/', scheme + 3);
  if (path_start == std::string::npos) {
    host_ = spec_.endpoint_url;
  } else {
    host_ = spec_.endpoint_url.substr(0, path_start);
    path_prefix_ = spec_.endpoint_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
      path_prefix_.pop_back();
    }
  }
}

std::string LlmEndpointScorer::id() const {
  return std::string("llm-endpoint:") + spec_.model_id + ":" +
         (spec_.llm_mode == LlmMode::LabelProbs ? "labels" : "completion");
}

LlmEndpointScorer::HttpResponse LlmEndpointScorer::post_with_retries(
    const std::string& path, const std::string& body) {
  std::string last_failure;
  for (int attempt = 1; attempt <= spec_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      const auto delay = spec_.retry.backoff_base * (1LL << (attempt - 2));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(host_);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!spec_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + spec_.api_key);
    }

    in_flight_.acquire();
    auto res = client.Post(path, headers, body, "application/json");
    requests_.fetch_add(1);
    in_flight_.release();

    if (!res) {
      last_failure = httplib::to_string(res.error());
      continue;  // transport error: retry
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("endpoint " + host_ + path + " returned HTTP " +
                           std::to_string(res->status));
    }
    return {res->status, res->body};
  }
  throw TransportError("endpoint " + host_ + path + " failed after " +
                       std::to_string(spec_.retry.max_attempts) +
                       " attempts: " + last_failure);
}

Verdict LlmEndpointScorer::classify(const PairTask& task) {
  if (task.prompt.empty()) {
    throw ConfigError("endpoint scorer needs a rendered prompt");
  }
  if (spec_.llm_mode == LlmMode::LabelProbs) {
    nlohmann::json body;
    body["model"] = spec_.model_id;
    body["prompt"] = task.prompt;
    body["labels"] = {"Yes", "No"};
    const auto resp = post_with_retries(path_prefix_ + "/classify", body.dump());
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(resp.body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ProtocolError(std::string("classify response is not JSON: ") +
                          e.what());
    }
    if (!doc.contains("probabilities") || !doc["probabilities"].is_object()) {
      throw ProtocolError("classify response lacks \"probabilities\"");
    }
    const auto& probs = doc["probabilities"];
    if (!probs.contains("Yes") || !probs["Yes"].is_number() ||
        !probs.contains("No") || !probs["No"].is_number()) {
      throw ProtocolError(
          "classify response must carry numeric \"Yes\" and \"No\" "
          "probabilities");
    }
    Verdict v;
    v.yes_prob = probs["Yes"].get<double>();
    v.no_prob = probs["No"].get<double>();
    v.answer = *v.yes_prob > *v.no_prob ? Answer::Yes : Answer::No;
    return v;
  }

  nlohmann::json body;
  body["model"] = spec_.model_id;
  body["prompt"] = task.prompt;
  body["max_tokens"] = spec_.max_completion_tokens;
  const auto resp = post_with_retries(path_prefix_ + "/complete", body.dump());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(resp.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("complete response is not JSON: ") +
                        e.what());
  }
  if (!doc.contains("text") || !doc["text"].is_string()) {
    throw ProtocolError("complete response lacks \"text\"");
  }
  switch (parse_completion_answer(doc["text"].get<std::string>())) {
    case CompletionAnswer::Yes:
      return Verdict{Answer::Yes, std::nullopt, std::nullopt};
    case CompletionAnswer::No:
      return Verdict{Answer::No, std::nullopt, std::nullopt};
    case CompletionAnswer::Unparseable:
    default:
      unparseable_.fetch_add(1);
      return Verdict{Answer::No, std::nullopt, std::nullopt};
  }
}

std::unique_ptr<PairScorer> make_scorer(const ScorerSpec& spec,
                                        const std::set<MappingPair>* mock_truth) {
  switch (spec.kind) {
    case ScorerKind::EditSimilarity:
      return std::make_unique<EditSimilarityScorer>(spec.edit_threshold);
    case ScorerKind::Mock:
      return std::make_unique<MockScorer>(mock_truth ? *mock_truth
                                                     : std::set<MappingPair>{});
    case ScorerKind::LlmEndpoint:
    default:
      return std::make_unique<LlmEndpointScorer>(spec);
  }
}

}  // namespace ontomatch
