#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ontomatch/errors.hpp"

namespace ontomatch {

using ConceptIri = std::string;

// Named concept: IRI, labels in document order (unique modulo
// normalize_label), and parent IRIs (sorted, unique, no self reference).
struct Concept {
  ConceptIri iri;
  std::vector<std::string> labels;
  std::vector<ConceptIri> parents;

  bool operator==(const Concept&) const = default;
};

// Lowercases (Unicode-aware for common blocks), collapses whitespace runs
// to a single space, trims leading/trailing whitespace. Idempotent.
std::string normalize_label(std::string_view s);

enum class Direction { Parent, Child };

// Immutable after construction; safe to share across threads.
class Ontology {
 public:
  Ontology() = default;

  // Merges duplicate IRIs, deduplicates labels by normalized form
  // (first occurrence wins), strips self-referencing parent edges,
  // drops parent edges whose target IRI is not itself a concept, and
  // builds the child index.
  static Ontology from_concepts(std::vector<Concept> concepts);

  const std::map<ConceptIri, Concept>& concepts() const { return concepts_; }
  std::size_t size() const { return concepts_.size(); }
  bool contains(const ConceptIri& iri) const {
    return concepts_.find(iri) != concepts_.end();
  }

  // Throws LookupError for unknown IRIs.
  const Concept& at(const ConceptIri& iri) const;

  // Parent or child concepts sorted by IRI; empty when none.
  // Throws LookupError for unknown IRIs.
  std::vector<const Concept*> neighbors(const ConceptIri& iri,
                                        Direction direction) const;

  bool operator==(const Ontology& other) const {
    return concepts_ == other.concepts_;
  }

 private:
  std::map<ConceptIri, Concept> concepts_;
  std::map<ConceptIri, std::vector<ConceptIri>> children_;
};

inline std::vector<const Concept*> hierarchy_neighbors(const Ontology& o,
                                                       const ConceptIri& c,
                                                       Direction direction) {
  return o.neighbors(c, direction);
}

// JSON dump: {"concepts":[{"iri":...,"labels":[...],"parents":[...]},...]}
// Canonical form: concepts sorted by IRI, labels in stored order, parents
// sorted; serialization is byte-identical across runs.
Ontology parse_json_dump(std::string_view bytes);
std::string serialize_json_dump(const Ontology& o);

}  // namespace ontomatch
