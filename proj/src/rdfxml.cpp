#include "ontomatch/rdfxml.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_map>

#include "ontomatch/xml_reader.hpp"

namespace ontomatch {

namespace {

constexpr std::string_view kRdfAbout =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#about";
constexpr std::string_view kRdfId =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#ID";
constexpr std::string_view kRdfResource =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#resource";
constexpr std::string_view kOwlClass =
    "http://www.w3.org/2002/07/owl#Class";
constexpr std::string_view kRdfsClass =
    "http://www.w3.org/2000/01/rdf-schema#Class";
constexpr std::string_view kSubClassOf =
    "http://www.w3.org/2000/01/rdf-schema#subClassOf";

bool has_iri_scheme(std::string_view v) {
  if (v.empty() || !std::isalpha(static_cast<unsigned char>(v[0]))) {
    return false;
  }
  for (std::size_t i = 1; i < v.size(); ++i) {
    const char c = v[i];
    if (c == ':') return true;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' &&
        c != '-' && c != '.') {
      return false;
    }
  }
  return false;
}

std::string resolve_iri(const std::string& value, const std::string& base) {
  if (has_iri_scheme(value) || base.empty()) return value;
  if (value.empty()) return base;
  std::string stem = base;
  if (const std::size_t frag = stem.find('#'); frag != std::string::npos) {
    stem.resize(frag);
  }
  if (value[0] == '#') return stem + value;
  const std::size_t slash = stem.rfind('/');
  if (slash != std::string::npos) stem.resize(slash + 1);
  return stem + value;
}

std::string trim_ws(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Frame {
  enum class Kind { Other, ClassNode, LabelProp, SubClassOf };
  Kind kind = Kind::Other;
  std::string base;
  std::string concept_iri;  // ClassNode only
  std::string label_text;   // LabelProp only
  bool label_is_literal = true;
};

}  // namespace

RdfParseConfig RdfParseConfig::defaults() {
  return {{
      "http://www.w3.org/2000/01/rdf-schema#label",
      "http://www.w3.org/2004/02/skos/core#prefLabel",
      "http://www.geneontology.org/formats/oboInOwl#hasExactSynonym",
  }};
}

Ontology parse_rdfxml(std::string_view bytes, const RdfParseConfig& cfg) {
  xml::XmlReader reader(bytes);

  // IRI -> record; document order preserved for label ordering.
  std::unordered_map<std::string, std::size_t> index;
  std::vector<Concept> concepts;

  std::vector<Frame> stack;
  Frame root;
  stack.push_back(root);

  auto concept_record = [&](const std::string& iri) -> Concept& {
    auto [it, inserted] = index.try_emplace(iri, concepts.size());
    if (inserted) concepts.push_back(Concept{iri, {}, {}});
    return concepts[it->second];
  };

  const auto is_label_property = [&](const std::string& name) {
    return std::find(cfg.label_properties.begin(), cfg.label_properties.end(),
                     name) != cfg.label_properties.end();
  };

  while (true) {
    const auto event = reader.next();
    if (event == xml::XmlReader::Event::End) break;

    if (event == xml::XmlReader::Event::StartElement) {
      Frame& parent = stack.back();
      Frame frame;
      frame.base = parent.base;

      std::string about, id, resource;
      for (const auto& attr : reader.attributes()) {
        if (attr.name == xml::XmlReader::kXmlBase) {
          frame.base = attr.value;
        } else if (attr.name == kRdfAbout) {
          about = attr.value;
        } else if (attr.name == kRdfId) {
          id = attr.value;
        } else if (attr.name == kRdfResource) {
          resource = attr.value;
        }
      }

      const std::string& name = reader.name();
      if ((name == kOwlClass || name == kRdfsClass) &&
          (!about.empty() || !id.empty())) {
        frame.kind = Frame::Kind::ClassNode;
        frame.concept_iri = !about.empty()
                                ? resolve_iri(about, frame.base)
                                : resolve_iri("#" + id, frame.base);
        concept_record(frame.concept_iri);
      } else if (parent.kind == Frame::Kind::ClassNode &&
                 is_label_property(name)) {
        frame.kind = Frame::Kind::LabelProp;
      } else if (parent.kind == Frame::Kind::ClassNode &&
                 name == kSubClassOf) {
        frame.kind = Frame::Kind::SubClassOf;
        if (!resource.empty()) {
          concept_record(parent.concept_iri)
              .parents.push_back(resolve_iri(resource, frame.base));
        }
        // No rdf:resource: anonymous superclass (restriction or nested
        // expression), ignored.
      }

      stack.push_back(std::move(frame));
      continue;
    }

    if (event == xml::XmlReader::Event::Text) {
      Frame& top = stack.back();
      if (top.kind == Frame::Kind::LabelProp) top.label_text += reader.text();
      continue;
    }

    // EndElement
    Frame finished = std::move(stack.back());
    stack.pop_back();
    if (finished.kind == Frame::Kind::LabelProp && finished.label_is_literal) {
      Frame& owner = stack.back();
      const std::string label = trim_ws(finished.label_text);
      if (owner.kind == Frame::Kind::ClassNode && !label.empty()) {
        concept_record(owner.concept_iri).labels.push_back(label);
      }
    }
    if (!stack.empty() && stack.back().kind == Frame::Kind::LabelProp) {
      // A child element inside a label property: not a plain literal.
      stack.back().label_is_literal = false;
    }
  }

  std::vector<Concept> labeled;
  labeled.reserve(concepts.size());
  for (Concept& c : concepts) {
    if (!c.labels.empty()) labeled.push_back(std::move(c));
  }
  if (labeled.empty()) {
    throw DataError("empty ontology: no class with a recognized label");
  }
  return Ontology::from_concepts(std::move(labeled));
}

}  // namespace ontomatch
