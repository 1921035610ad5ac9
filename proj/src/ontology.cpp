#include "ontomatch/ontology.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ontomatch/utf8.hpp"

namespace ontomatch {

std::string normalize_label(std::string_view s) {
  const std::u32string cps = decode_utf8(s);
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (is_space_codepoint(cp)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(lower_codepoint(cp));
  }
  return encode_utf8(out);
}

Ontology Ontology::from_concepts(std::vector<Concept> concepts) {
  Ontology o;
  for (Concept& c : concepts) {
    auto [it, inserted] = o.concepts_.try_emplace(c.iri, std::move(c));
    if (!inserted) {
      Concept& existing = it->second;
      for (std::string& l : c.labels) existing.labels.push_back(std::move(l));
      for (ConceptIri& p : c.parents) existing.parents.push_back(std::move(p));
    }
  }
  for (auto& [iri, c] : o.concepts_) {
    std::unordered_set<std::string> seen;
    std::vector<std::string> labels;
    labels.reserve(c.labels.size());
    for (std::string& l : c.labels) {
      if (seen.insert(normalize_label(l)).second) labels.push_back(std::move(l));
    }
    c.labels = std::move(labels);

    std::set<ConceptIri> parents;
    for (ConceptIri& p : c.parents) {
      if (p != iri && o.concepts_.count(p) > 0) parents.insert(std::move(p));
    }
    c.parents.assign(parents.begin(), parents.end());
  }
  for (const auto& [iri, c] : o.concepts_) {
    for (const ConceptIri& p : c.parents) o.children_[p].push_back(iri);
  }
  // std::map iteration made each child list sorted already; keep explicit.
  for (auto& [iri, kids] : o.children_) std::sort(kids.begin(), kids.end());
  return o;
}

const Concept& Ontology::at(const ConceptIri& iri) const {
  auto it = concepts_.find(iri);
  if (it == concepts_.end()) throw LookupError("unknown concept IRI: " + iri);
  return it->second;
}

std::vector<const Concept*> Ontology::neighbors(const ConceptIri& iri,
                                                Direction direction) const {
  const Concept& c = at(iri);
  std::vector<const Concept*> out;
  if (direction == Direction::Parent) {
    out.reserve(c.parents.size());
    for (const ConceptIri& p : c.parents) out.push_back(&concepts_.at(p));
  } else {
    auto it = children_.find(iri);
    if (it != children_.end()) {
      out.reserve(it->second.size());
      for (const ConceptIri& child : it->second)
        out.push_back(&concepts_.at(child));
    }
  }
  return out;
}

Ontology parse_json_dump(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("ontology dump is not valid JSON: ") +
                     e.what());
  }
  if (!doc.is_object() || !doc.contains("concepts") ||
      !doc["concepts"].is_array()) {
    throw ParseError("ontology dump must be {\"concepts\": [...]}");
  }
  std::vector<Concept> concepts;
  std::unordered_set<std::string> iris;
  std::size_t record = 0;
  for (const auto& item : doc["concepts"]) {
    const std::string where = "concepts[" + std::to_string(record) + "]";
    if (!item.is_object() || !item.contains("iri") ||
        !item["iri"].is_string() || !item.contains("labels") ||
        !item["labels"].is_array() || !item.contains("parents") ||
        !item["parents"].is_array()) {
      throw ParseError(where +
                       ": expected {\"iri\": string, \"labels\": [string], "
                       "\"parents\": [string]}");
    }
    Concept c;
    c.iri = item["iri"].get<std::string>();
    if (c.iri.empty()) throw ParseError(where + ": empty IRI");
    if (!iris.insert(c.iri).second) {
      throw ParseError(where + ": duplicate concept IRI " + c.iri);
    }
    for (const auto& l : item["labels"]) {
      if (!l.is_string()) throw ParseError(where + ": non-string label");
      c.labels.push_back(l.get<std::string>());
    }
    if (c.labels.empty()) {
      throw ParseError(where + " (" + c.iri + "): labels must be non-empty");
    }
    for (const auto& p : item["parents"]) {
      if (!p.is_string()) throw ParseError(where + ": non-string parent IRI");
      c.parents.push_back(p.get<std::string>());
    }
    concepts.push_back(std::move(c));
    ++record;
  }
  return Ontology::from_concepts(std::move(concepts));
}

std::string serialize_json_dump(const Ontology& o) {
  nlohmann::ordered_json doc;
  doc["concepts"] = nlohmann::ordered_json::array();
  for (const auto& [iri, c] : o.concepts()) {
    nlohmann::ordered_json rec;
    rec["iri"] = iri;
    rec["labels"] = c.labels;
    rec["parents"] = c.parents;  // already sorted
    doc["concepts"].push_back(std::move(rec));
  }
  return doc.dump() + "\n";
}

}  // namespace ontomatch
