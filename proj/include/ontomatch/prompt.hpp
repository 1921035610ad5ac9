#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ontomatch/ontology.hpp"

namespace ontomatch {

// Everything the prompt needs to know about one concept.
struct ConceptView {
  std::vector<std::string> names;         // all labels, stored order
  std::vector<std::string> parent_names;  // first label per neighbor
  std::vector<std::string> child_names;

  bool operator==(const ConceptView&) const = default;
};

// names = all labels of c; parent/child names = first label of each of up
// to `cap` neighbors: IRI order when at most `cap` exist, otherwise a
// seed-deterministic uniform sample (kept in IRI order).
// Throws LookupError for unknown IRIs.
ConceptView gather_context(const Ontology& o, const ConceptIri& c,
                           std::size_t cap, std::uint64_t seed);

// Yes/No classification prompt for a concept pair. Name lists render as
// ["a", "b"]; empty context lists render as None. With
// include_hierarchy=false the hierarchy wording and all four
// parent/child lines are omitted.
std::string render_prompt(const ConceptView& source, const ConceptView& target,
                          bool include_hierarchy);

}  // namespace ontomatch
