#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ontomatch/ontology.hpp"

namespace ontomatch {

// Annotation properties whose literal values become concept labels.
struct RdfParseConfig {
  std::vector<std::string> label_properties;

  // rdfs:label, skos:prefLabel, oboInOwl:hasExactSynonym; covers the
  // label conventions of the big biomedical exports.
  static RdfParseConfig defaults();
};

// Parses the RDF/XML subset: element-form class declarations
// (owl:Class / rdfs:Class with rdf:about or rdf:ID), literal label
// annotations, and rdfs:subClassOf edges given by rdf:resource.
// Anonymous superclasses (restrictions, nested class expressions) are
// ignored; classes without a recognized label are dropped, and parent
// edges to dropped or undeclared classes are dropped with them.
//
// Throws ParseError (with line/column) on malformed XML and DataError
// when no concept survives.
Ontology parse_rdfxml(std::string_view bytes,
                      const RdfParseConfig& cfg = RdfParseConfig::defaults());

}  // namespace ontomatch
