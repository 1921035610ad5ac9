#include "ontomatch/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ontomatch/utf8.hpp"

namespace ontomatch {

SubwordVocab SubwordVocab::from_entries(const std::vector<std::string>& entries,
                                        std::string continuation_prefix) {
  SubwordVocab v;
  v.prefix_ = std::move(continuation_prefix);
  for (const std::string& e : entries) {
    if (e.empty() || e == kUnknown) continue;
    v.entries_.insert(e);
  }
  // Complete with single-character pieces of every entry.
  std::vector<std::string> singles;
  for (const std::string& e : v.entries_) {
    std::string_view body = e;
    if (body.size() > v.prefix_.size() &&
        body.substr(0, v.prefix_.size()) == v.prefix_) {
      body = body.substr(v.prefix_.size());
    }
    for (char32_t cp : decode_utf8(body)) {
      singles.push_back(encode_utf8(cp));
    }
  }
  for (const std::string& ch : singles) {
    v.entries_.insert(ch);
    v.entries_.insert(v.prefix_ + ch);
  }
  for (const std::string& e : v.entries_) {
    std::string_view body = e;
    if (body.size() > v.prefix_.size() &&
        body.substr(0, v.prefix_.size()) == v.prefix_) {
      body = body.substr(v.prefix_.size());
    }
    v.max_piece_cps_ = std::max(v.max_piece_cps_, decode_utf8(body).size());
  }
  return v;
}

SubwordVocab SubwordVocab::parse(std::string_view text,
                                 std::string continuation_prefix) {
  std::vector<std::string> entries;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) entries.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return from_entries(entries, std::move(continuation_prefix));
}

SubwordVocab SubwordVocab::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read vocabulary file: " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

SubwordVocab SubwordVocab::builtin_minimal() {
  std::vector<std::string> entries;
  for (char c = 'a'; c <= 'z'; ++c) entries.push_back(std::string(1, c));
  for (char c = '0'; c <= '9'; ++c) entries.push_back(std::string(1, c));
  entries.push_back("-");
  return from_entries(entries);
}

std::vector<std::string> tokenize_subwords(const SubwordVocab& vocab,
                                           std::string_view normalized_text) {
  std::vector<std::string> out;
  const std::u32string cps = decode_utf8(normalized_text);
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    if (cps[i] == U' ') {
      ++i;
      continue;
    }
    std::size_t word_end = i;
    while (word_end < n && cps[word_end] != U' ') ++word_end;

    std::size_t pos = i;
    while (pos < word_end) {
      const std::size_t longest =
          std::min(vocab.max_piece_codepoints(), word_end - pos);
      bool matched = false;
      for (std::size_t len = longest; len >= 1; --len) {
        std::string piece =
            encode_utf8(std::u32string_view(cps).substr(pos, len));
        if (pos > i) piece = vocab.continuation_prefix() + piece;
        if (vocab.contains(piece)) {
          out.push_back(std::move(piece));
          pos += len;
          matched = true;
          break;
        }
      }
      if (!matched) {
        out.emplace_back(SubwordVocab::kUnknown);
        ++pos;
      }
    }
    i = word_end;
  }
  return out;
}

std::vector<std::string> concept_token_set(const Concept& c,
                                           const SubwordVocab& vocab) {
  std::set<std::string> tokens;
  for (const std::string& label : c.labels) {
    for (std::string& t : tokenize_subwords(vocab, normalize_label(label))) {
      if (t != SubwordVocab::kUnknown) tokens.insert(std::move(t));
    }
  }
  return {tokens.begin(), tokens.end()};
}

InvertedIndex InvertedIndex::build(const Ontology& o,
                                   const SubwordVocab& vocab) {
  InvertedIndex ix;
  ix.vocab_ = vocab;
  ix.doc_count_ = o.size();
  for (const auto& [iri, c] : o.concepts()) {
    for (const std::string& t : concept_token_set(c, vocab)) {
      ix.postings_[t].push_back(iri);
    }
  }
  // Outer iteration is IRI-ordered, so posting lists are already sorted.
  return ix;
}

std::size_t InvertedIndex::df(const std::string& token) const {
  auto it = postings_.find(token);
  return it == postings_.end() ? 0 : it->second.size();
}

double InvertedIndex::idf(const std::string& token) const {
  auto it = postings_.find(token);
  if (it == postings_.end()) {
    throw LookupError("token has no posting list: " + token);
  }
  return std::log(static_cast<double>(doc_count_) /
                  static_cast<double>(it->second.size()));
}

std::vector<InvertedIndex::Candidate> InvertedIndex::top_k(
    const std::vector<std::string>& query_labels, std::size_t k,
    const std::unordered_set<ConceptIri>& excluded) const {
  std::set<std::string> query_tokens;
  for (const std::string& label : query_labels) {
    for (std::string& t : tokenize_subwords(vocab_, normalize_label(label))) {
      if (t != SubwordVocab::kUnknown) query_tokens.insert(std::move(t));
    }
  }
  // Accumulation runs in sorted token order so scores are reproducible
  // bit for bit (and equal to an oracle summing in the same order).
  std::map<ConceptIri, double> scores;
  for (const std::string& t : query_tokens) {
    auto it = postings_.find(t);
    if (it == postings_.end()) continue;
    const double w = idf(t);
    for (const ConceptIri& iri : it->second) scores[iri] += w;
  }
  std::vector<Candidate> ranked;
  ranked.reserve(scores.size());
  for (const auto& [iri, score] : scores) {
    if (score <= 0.0) continue;  // only idf-0 tokens shared
    if (excluded.find(iri) != excluded.end()) continue;
    ranked.push_back({iri, score});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.iri < b.iri;
            });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

std::string serialize_index(const InvertedIndex& ix) {
  nlohmann::ordered_json doc;
  doc["doc_count"] = ix.doc_count();
  nlohmann::ordered_json postings = nlohmann::ordered_json::object();
  for (const auto& [token, iris] : ix.postings()) {
    postings[token] = iris;
  }
  doc["postings"] = std::move(postings);
  return doc.dump() + "\n";
}

}  // namespace ontomatch
