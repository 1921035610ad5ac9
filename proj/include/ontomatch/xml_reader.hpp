#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ontomatch/errors.hpp"

namespace ontomatch::xml {

// Namespace-resolving pull parser for the XML subset needed by RDF/XML
// ingestion: elements, attributes, character data, CDATA, comments,
// processing instructions, numeric character references and the five
// predefined entities. DOCTYPE declarations (including an internal
// subset) are skipped. Malformed input raises ParseError with the
// 1-based line/column of the offending byte.
//
// Element and attribute names are exposed in expanded form: namespace
// URI concatenated with the local name (the usual RDF convention, e.g.
// "http://www.w3.org/1999/02/22-rdf-syntax-ns#about"). Unprefixed
// attributes carry no namespace and expand to the bare local name.
class XmlReader {
 public:
  enum class Event { StartElement, EndElement, Text, End };

  struct Attribute {
    std::string name;  // expanded
    std::string value;
  };

  explicit XmlReader(std::string_view doc);

  Event next();

  // Valid after a StartElement (name, attributes) / EndElement (name) /
  // Text (text) event.
  const std::string& name() const { return name_; }
  const std::vector<Attribute>& attributes() const { return attrs_; }
  const std::string& text() const { return text_; }

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

  // Expanded name of the implicit xml:base attribute.
  static const std::string kXmlBase;

 private:
  struct NsFrame {
    std::map<std::string, std::string> bindings;  // prefix -> uri
  };

  [[noreturn]] void fail(const std::string& msg) const;
  char peek() const;
  char get();
  bool eat(std::string_view lit);
  void skip_ws();
  std::string read_name_token();
  std::string decode_entities(std::string_view raw, std::size_t at_line,
                              std::size_t at_col) const;
  std::string resolve(const std::string& qname, bool is_attribute) const;
  void skip_misc_allowed();  // comments / PIs / doctype at any depth
  bool skip_comment_or_pi();

  std::string_view doc_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;

  std::vector<std::string> open_elements_;  // qnames, for matching end tags
  std::vector<NsFrame> ns_stack_;
  bool pending_end_ = false;  // self-closing tag: synthesize EndElement
  bool seen_root_ = false;

  std::string name_;
  std::vector<Attribute> attrs_;
  std::string text_;
};

}  // namespace ontomatch::xml
