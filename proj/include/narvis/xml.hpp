#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace narvis::xml {

struct Node;

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;  // document order
  std::vector<Node> children;

  const std::string* attribute(std::string_view key) const;
  /// Concatenated character data of this element and its descendants.
  std::string text() const;
};

struct Node {
  std::variant<Element, std::string> value;

  const Element* element() const { return std::get_if<Element>(&value); }
  const std::string* text() const { return std::get_if<std::string>(&value); }
};

/// Parses a complete XML document and returns its root element. Comments and
/// processing instructions are dropped. Throws Error(MalformedXml) with a
/// "line:column" pointer.
Element parse_document(std::string_view markup);

std::string escape_text(std::string_view text);
std::string escape_attribute(std::string_view text);

}  // namespace narvis::xml
