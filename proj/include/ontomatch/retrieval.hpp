#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ontomatch/ontology.hpp"

namespace ontomatch {

// WordPiece-style vocabulary: plain tokens start a word, tokens carrying
// the continuation prefix ("##" by default) continue one. Construction
// completes the vocabulary with the single-character pieces (plain and
// continuation form) of every entry, so greedy tokenization of any text
// over the entry alphabet terminates without <unk>.
class SubwordVocab {
 public:
  static constexpr std::string_view kUnknown = "<unk>";

  static SubwordVocab from_entries(const std::vector<std::string>& entries,
                                   std::string continuation_prefix = "##");

  // One token per line; lines starting with the continuation prefix are
  // continuation pieces. Blank lines ignored.
  static SubwordVocab parse(std::string_view text,
                            std::string continuation_prefix = "##");
  static SubwordVocab load(const std::filesystem::path& file);

  // Tiny default used when no vocabulary file is supplied: ASCII letters,
  // digits and hyphen as single-character pieces.
  static SubwordVocab builtin_minimal();

  bool contains(const std::string& token) const {
    return entries_.find(token) != entries_.end();
  }
  const std::string& continuation_prefix() const { return prefix_; }
  std::size_t max_piece_codepoints() const { return max_piece_cps_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
  std::string prefix_ = "##";
  std::size_t max_piece_cps_ = 0;
};

// Greedy longest-match-first decomposition of normalized text. Words are
// whitespace-separated; non-initial pieces match with the continuation
// prefix; a character with no matching piece emits "<unk>" and advances
// one codepoint.
std::vector<std::string> tokenize_subwords(const SubwordVocab& vocab,
                                           std::string_view normalized_text);

// Token -> sorted posting list of concept IRIs. One document per concept;
// the document's token set is the union over its normalized labels.
class InvertedIndex {
 public:
  struct Candidate {
    ConceptIri iri;
    double score;
    bool operator==(const Candidate&) const = default;
  };

  static InvertedIndex build(const Ontology& o, const SubwordVocab& vocab);

  std::size_t doc_count() const { return doc_count_; }

  // 0 when the token has no posting list.
  std::size_t df(const std::string& token) const;

  // ln(doc_count / df). Throws LookupError for tokens without postings.
  double idf(const std::string& token) const;

  // Sums idf over the set of query tokens shared with each document
  // (each shared token counted once). Zero-score and excluded concepts
  // are omitted; sorted by score descending, ties by IRI ascending;
  // at most k results.
  std::vector<Candidate> top_k(
      const std::vector<std::string>& query_labels, std::size_t k,
      const std::unordered_set<ConceptIri>& excluded = {}) const;

  const std::map<std::string, std::vector<ConceptIri>>& postings() const {
    return postings_;
  }
  const SubwordVocab& vocab() const { return vocab_; }

 private:
  std::map<std::string, std::vector<ConceptIri>> postings_;
  std::size_t doc_count_ = 0;
  SubwordVocab vocab_;
};

// Canonical single-object JSON rendering of the index, for the `index`
// command: {"doc_count": N, "postings": {token: [iri, ...], ...}}.
std::string serialize_index(const InvertedIndex& ix);

// Sorted union of subword tokens over all normalized labels of a concept,
// "<unk>" excluded. This is the document token set used by the index.
std::vector<std::string> concept_token_set(const Concept& c,
                                           const SubwordVocab& vocab);

}  // namespace ontomatch
