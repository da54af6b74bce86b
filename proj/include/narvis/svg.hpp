#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "narvis/geometry.hpp"
#include "narvis/json_util.hpp"
#include "narvis/xml.hpp"

namespace narvis {

enum class NodeKind { Group, Shape };

/// One group or shape element of the scene graph. The root is the <svg>
/// element itself (kind Group, element_type "svg"); every other group has
/// element_type "g".
struct SceneNode {
  NodeKind kind = NodeKind::Group;
  std::string element_type;
  std::map<std::string, std::string> attributes;
  std::vector<SceneNode> children;
  std::vector<int> node_path;
  std::string text;  // character content of <text> shapes
};

struct ViewBox {
  double x = 0, y = 0, width = 0, height = 0;
  double diagonal() const;
};

/// Presentation properties declared by `.class` rules in embedded stylesheets.
using ClassRules = std::map<std::string, std::map<std::string, std::string>>;

struct SvgDocument {
  std::string raw_markup;
  SceneNode root;
  ViewBox view_box;
  ClassRules class_rules;
  std::vector<std::string> warnings;
  std::shared_ptr<const xml::Element> xml;  // full parsed markup, for re-embedding
};

struct ChannelValues {
  Point position;                // bbox center after transform accumulation
  double size = 0;               // bbox area, user units²
  std::string fill = "none";     // "#RRGGBBAA", "none" or "url(...)"
  std::string stroke = "none";
  double stroke_width = 0;
  double opacity = 1;            // product along the ancestor chain
  std::string shape_class;       // element type, "path:<signature>" for paths
};

struct VisualPrimitive {
  std::string id;
  std::string element_type;
  std::vector<std::string> group_chain;
  std::vector<std::string> css_classes;
  ChannelValues channels;
  std::string source_markup;
  BBox bbox;
  bool geometry_warning = false;
};

/// Throws Error with MalformedXml, NotSvg or EmptyScene.
SvgDocument parse_svg(std::string_view markup);

/// One primitive per shape node in document order. Paths whose geometry
/// cannot be bounded are still emitted with size 0 and `geometry_warning`.
std::vector<VisualPrimitive> extract_primitives(const SvgDocument& doc);

/// Serializes the scene graph (plus class rules) back to SVG markup.
std::string serialize_svg(const SvgDocument& doc);

std::string primitive_id(const std::vector<int>& node_path);
bool is_shape_element(std::string_view name);

/// Renders the document for inline embedding in HTML: every shape is wrapped
/// in <g class="nv-prim" data-nv-id="..."> and namespace declarations and
/// external references are stripped.
std::string render_embedded_svg(const SvgDocument& doc, std::vector<std::string>* warnings = nullptr);

Json to_json(const VisualPrimitive& p);
Json to_json(const SceneNode& node);

}  // namespace narvis
