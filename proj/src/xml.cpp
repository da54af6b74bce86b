#include "narvis/xml.hpp"

#include <expat.h>

#include <memory>

#include "narvis/error.hpp"

namespace narvis::xml {

const std::string* Element::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes)
    if (k == key) return &v;
  return nullptr;
}

std::string Element::text() const {
  std::string out;
  for (const auto& child : children) {
    if (const auto* t = child.text())
      out += *t;
    else
      out += child.element()->text();
  }
  return out;
}

namespace {

struct Builder {
  Element root;
  std::vector<Element*> stack;
  bool has_root = false;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* b = static_cast<Builder*>(user);
  Element el;
  el.name = name;
  for (int i = 0; attrs[i] != nullptr; i += 2) el.attributes.emplace_back(attrs[i], attrs[i + 1]);
  if (b->stack.empty()) {
    b->root = std::move(el);
    b->has_root = true;
    b->stack.push_back(&b->root);
    return;
  }
  auto& children = b->stack.back()->children;
  children.push_back(Node{std::move(el)});
  b->stack.push_back(&std::get<Element>(children.back().value));
}

void on_end(void* user, const XML_Char*) { static_cast<Builder*>(user)->stack.pop_back(); }

void on_text(void* user, const XML_Char* s, int len) {
  auto* b = static_cast<Builder*>(user);
  if (b->stack.empty()) return;
  auto& children = b->stack.back()->children;
  if (!children.empty()) {
    if (auto* t = std::get_if<std::string>(&children.back().value)) {
      t->append(s, static_cast<std::size_t>(len));
      return;
    }
  }
  children.push_back(Node{std::string(s, static_cast<std::size_t>(len))});
}

}  // namespace

Element parse_document(std::string_view markup) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                                       &XML_ParserFree);
  Builder builder;
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);
  if (XML_Parse(parser.get(), markup.data(), static_cast<int>(markup.size()), XML_TRUE) == XML_STATUS_ERROR) {
    std::string where = std::to_string(XML_GetCurrentLineNumber(parser.get())) + ":" +
                        std::to_string(XML_GetCurrentColumnNumber(parser.get()));
    throw Error(ErrorCode::MalformedXml,
                std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())) + " at " + where,
                where);
  }
  if (!builder.has_root) throw Error(ErrorCode::MalformedXml, "malformed XML: no root element", "1:0");
  return std::move(builder.root);
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attribute(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      case '\n': out += "&#10;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace narvis::xml
