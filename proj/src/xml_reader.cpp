#include "ontomatch/xml_reader.hpp"

#include <algorithm>
#include <cctype>

namespace ontomatch::xml {

namespace {

constexpr std::string_view kXmlNsUri = "http://www.w3.org/XML/1998/namespace";

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) ||
         c == '-' || c == '.';
}

bool is_xml_ws(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

}  // namespace

const std::string XmlReader::kXmlBase =
    std::string(kXmlNsUri) + "base";

XmlReader::XmlReader(std::string_view doc) : doc_(doc) {
  NsFrame root;
  root.bindings["xml"] = std::string(kXmlNsUri);
  ns_stack_.push_back(std::move(root));
}

void XmlReader::fail(const std::string& msg) const {
  throw ParseError(msg, line_, column_);
}

char XmlReader::peek() const { return pos_ < doc_.size() ? doc_[pos_] : '\0'; }

char XmlReader::get() {
  if (pos_ >= doc_.size()) fail("unexpected end of document");
  const char c = doc_[pos_++];
  if (c == '\n') {
    ++line_;
    column_ = 1;
  } else {
    ++column_;
  }
  return c;
}

bool XmlReader::eat(std::string_view lit) {
  if (doc_.compare(pos_, lit.size(), lit) != 0) return false;
  for (std::size_t i = 0; i < lit.size(); ++i) get();
  return true;
}

void XmlReader::skip_ws() {
  while (pos_ < doc_.size() && is_xml_ws(doc_[pos_])) get();
}

std::string XmlReader::read_name_token() {
  if (pos_ >= doc_.size() || !is_name_start(doc_[pos_])) {
    fail("expected a name");
  }
  std::string out;
  while (pos_ < doc_.size() && is_name_char(doc_[pos_])) out.push_back(get());
  return out;
}

std::string XmlReader::decode_entities(std::string_view raw,
                                       std::size_t at_line,
                                       std::size_t at_col) const {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c != '&') {
      out.push_back(c);
      ++i;
      continue;
    }
    const std::size_t semi = raw.find(';', i + 1);
    if (semi == std::string_view::npos) {
      throw ParseError("unterminated entity reference", at_line, at_col);
    }
    const std::string_view ent = raw.substr(i + 1, semi - i - 1);
    if (ent == "amp") {
      out.push_back('&');
    } else if (ent == "lt") {
      out.push_back('<');
    } else if (ent == "gt") {
      out.push_back('>');
    } else if (ent == "quot") {
      out.push_back('"');
    } else if (ent == "apos") {
      out.push_back('\'');
    } else if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                 ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                 : std::stoul(std::string(ent.substr(1)), nullptr, 10);
      } catch (...) {
        throw ParseError("bad character reference &" + std::string(ent) + ";",
                         at_line, at_col);
      }
      // Minimal UTF-8 encode of the referenced codepoint.
      if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
      } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else if (cp <= 0x10FFFF) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else {
        throw ParseError("character reference out of range", at_line, at_col);
      }
    } else {
      throw ParseError("unknown entity &" + std::string(ent) + ";", at_line,
                       at_col);
    }
    i = semi + 1;
  }
  return out;
}

std::string XmlReader::resolve(const std::string& qname,
                               bool is_attribute) const {
  const std::size_t colon = qname.find(':');
  std::string prefix;
  std::string local = qname;
  if (colon != std::string::npos) {
    prefix = qname.substr(0, colon);
    local = qname.substr(colon + 1);
  } else if (is_attribute) {
    return local;  // unprefixed attributes carry no namespace
  }
  for (auto it = ns_stack_.rbegin(); it != ns_stack_.rend(); ++it) {
    auto found = it->bindings.find(prefix);
    if (found != it->bindings.end()) return found->second + local;
  }
  if (prefix.empty()) return local;  // no default namespace in scope
  fail("undeclared namespace prefix '" + prefix + "'");
}

bool XmlReader::skip_comment_or_pi() {
  if (doc_.compare(pos_, 4, "<!--") == 0) {
    eat("<!--");
    const std::size_t end = doc_.find("-->", pos_);
    if (end == std::string_view::npos) fail("unterminated comment");
    while (pos_ < end + 3) get();
    return true;
  }
  if (doc_.compare(pos_, 2, "<?") == 0) {
    eat("<?");
    const std::size_t end = doc_.find("?>", pos_);
    if (end == std::string_view::npos) {
      fail("unterminated processing instruction");
    }
    while (pos_ < end + 2) get();
    return true;
  }
  if (doc_.compare(pos_, 9, "<!DOCTYPE") == 0) {
    eat("<!DOCTYPE");
    int bracket_depth = 0;
    while (true) {
      const char c = get();
      if (c == '[') ++bracket_depth;
      if (c == ']') --bracket_depth;
      if (c == '>' && bracket_depth == 0) break;
    }
    return true;
  }
  return false;
}

XmlReader::Event XmlReader::next() {
  if (pending_end_) {
    pending_end_ = false;
    name_ = resolve(open_elements_.back(), false);
    open_elements_.pop_back();
    ns_stack_.pop_back();
    return Event::EndElement;
  }

  while (true) {
    if (pos_ >= doc_.size()) {
      if (!open_elements_.empty()) {
        fail("unexpected end of document inside <" + open_elements_.back() +
             ">");
      }
      if (!seen_root_) fail("document has no root element");
      return Event::End;
    }

    if (peek() != '<') {
      // Character data up to the next tag.
      const std::size_t tl = line_, tc = column_;
      std::string raw;
      while (pos_ < doc_.size() && peek() != '<') raw.push_back(get());
      if (open_elements_.empty()) {
        if (raw.find_first_not_of(" \t\r\n") != std::string::npos) {
          throw ParseError("character data outside the root element", tl, tc);
        }
        continue;
      }
      text_ = decode_entities(raw, tl, tc);
      return Event::Text;
    }

    if (doc_.compare(pos_, 9, "<![CDATA[") == 0) {
      if (open_elements_.empty()) fail("CDATA outside the root element");
      eat("<![CDATA[");
      const std::size_t end = doc_.find("]]>", pos_);
      if (end == std::string_view::npos) fail("unterminated CDATA section");
      text_.clear();
      while (pos_ < end) text_.push_back(get());
      eat("]]>");
      return Event::Text;
    }

    if (skip_comment_or_pi()) continue;

    if (doc_.compare(pos_, 2, "</") == 0) {
      eat("</");
      const std::string qname = read_name_token();
      skip_ws();
      if (get() != '>') fail("malformed end tag </" + qname + ">");
      if (open_elements_.empty() || open_elements_.back() != qname) {
        fail("mismatched end tag </" + qname + ">");
      }
      name_ = resolve(qname, false);
      open_elements_.pop_back();
      ns_stack_.pop_back();
      return Event::EndElement;
    }

    // Start tag.
    if (get() != '<') fail("expected '<'");
    const std::string qname = read_name_token();
    if (open_elements_.empty() && seen_root_) {
      fail("multiple root elements");
    }

    NsFrame frame;
    std::vector<std::pair<std::string, std::string>> raw_attrs;
    while (true) {
      skip_ws();
      const char c = peek();
      if (c == '>' || c == '/') break;
      const std::size_t al = line_, ac = column_;
      const std::string aname = read_name_token();
      skip_ws();
      if (get() != '=') fail("attribute " + aname + " missing '='");
      skip_ws();
      const char quote = get();
      if (quote != '"' && quote != '\'') {
        fail("attribute " + aname + " value must be quoted");
      }
      std::string raw;
      while (true) {
        const char v = get();
        if (v == quote) break;
        if (v == '<') fail("'<' in attribute value");
        raw.push_back(v);
      }
      const std::string value = decode_entities(raw, al, ac);
      if (aname == "xmlns") {
        frame.bindings[""] = value;
      } else if (aname.rfind("xmlns:", 0) == 0) {
        frame.bindings[aname.substr(6)] = value;
      } else {
        raw_attrs.emplace_back(aname, value);
      }
    }
    bool self_closing = false;
    if (peek() == '/') {
      get();
      self_closing = true;
    }
    if (get() != '>') fail("malformed start tag <" + qname + ">");

    ns_stack_.push_back(std::move(frame));
    open_elements_.push_back(qname);
    seen_root_ = true;

    name_ = resolve(qname, false);
    attrs_.clear();
    for (const auto& [aname, value] : raw_attrs) {
      attrs_.push_back({resolve(aname, true), value});
    }
    pending_end_ = self_closing;
    return Event::StartElement;
  }
}

}  // namespace ontomatch::xml
