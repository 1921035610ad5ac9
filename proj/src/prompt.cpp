#include "ontomatch/prompt.hpp"

#include <algorithm>

#include "ontomatch/rng.hpp"

namespace ontomatch {

namespace {

std::vector<std::string> neighbor_names(const Ontology& o, const ConceptIri& c,
                                        Direction direction, std::size_t cap,
                                        std::uint64_t seed) {
  const auto neighbors = o.neighbors(c, direction);  // IRI-sorted
  std::vector<const Concept*> chosen;
  if (neighbors.size() <= cap) {
    chosen = neighbors;
  } else {
    const char* salt = direction == Direction::Parent ? "parents" : "children";
    Rng rng(splitmix64(derive_seed(seed, salt) ^ fnv1a64(c)));
    auto picks = rng.sample_indices(neighbors.size(), cap);
    std::sort(picks.begin(), picks.end());  // keep IRI order in the output
    for (std::size_t i : picks) chosen.push_back(neighbors[i]);
  }
  std::vector<std::string> names;
  names.reserve(chosen.size());
  for (const Concept* n : chosen) names.push_back(n->labels.front());
  return names;
}

std::string render_name_list(const std::vector<std::string>& names) {
  if (names.empty()) return "None";
  std::string out = "[";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ", ";
    out += '"';
    out += names[i];
    out += '"';
  }
  out += ']';
  return out;
}

}  // namespace

ConceptView gather_context(const Ontology& o, const ConceptIri& c,
                           std::size_t cap, std::uint64_t seed) {
  ConceptView view;
  view.names = o.at(c).labels;
  view.parent_names = neighbor_names(o, c, Direction::Parent, cap, seed);
  view.child_names = neighbor_names(o, c, Direction::Child, cap, seed);
  return view;
}

std::string render_prompt(const ConceptView& source, const ConceptView& target,
                          bool include_hierarchy) {
  std::string p;
  p += "Given the lists of names";
  if (include_hierarchy) p += " and hierarchical relationships";
  p += " associated with two concepts, your task is to determine whether "
       "these concepts are identical or not. Consider the following:\n\n";

  p += "Source Concept Names: " + render_name_list(source.names) + "\n";
  if (include_hierarchy) {
    p += "Parent Concepts of the Source Concept: " +
         render_name_list(source.parent_names) + "\n";
    p += "Child Concepts of the Source Concept: " +
         render_name_list(source.child_names) + "\n";
  }
  p += "Target Concept Names: " + render_name_list(target.names) + "\n";
  if (include_hierarchy) {
    p += "Parent Concepts of the Target Concept: " +
         render_name_list(target.parent_names) + "\n";
    p += "Child Concepts of the Target Concept: " +
         render_name_list(target.child_names) + "\n";
  }

  p += "\nAnalyze the names";
  if (include_hierarchy) p += " and the hierarchical information";
  p += " provided for each concept and provide a conclusion on whether "
       "these two concepts are identical or different (\"Yes\" or \"No\") "
       "based on their associated names";
  if (include_hierarchy) p += " and hierarchical relationships";
  p += '.';
  return p;
}

}  // namespace ontomatch
