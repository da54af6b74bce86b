#include "narvis/svg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "narvis/color.hpp"
#include "narvis/error.hpp"
#include "narvis/path_data.hpp"

namespace narvis {

namespace {

constexpr std::string_view kShapeElements[] = {"rect", "circle", "ellipse", "line",
                                                "polyline", "polygon", "path", "text"};

// Elements that never produce scene nodes and need no warning.
constexpr std::string_view kSilentSkips[] = {
    "defs",   "symbol",   "clipPath", "mask",  "pattern", "marker",   "linearGradient", "radialGradient",
    "filter", "style",    "script",   "title", "desc",    "metadata", "tspan",          "textPath"};

constexpr std::string_view kPresentationProps[] = {"fill",         "stroke",         "stroke-width", "opacity",
                                                    "fill-opacity", "stroke-opacity", "color",        "font-size",
                                                    "text-anchor"};

enum class Role { Group, NestedSvg, Shape, Skip, SkipWarn };

std::string_view local_name(std::string_view name) {
  if (name.starts_with("svg:")) name.remove_prefix(4);
  return name;
}

Role classify(const xml::Element& el, std::string* warning) {
  std::string_view name = local_name(el.name);
  if (is_shape_element(name)) return Role::Shape;
  if (name == "g" || name == "a" || name == "switch") return Role::Group;
  if (name == "svg") {
    if (warning) *warning = "nested <svg> treated as a plain group; its viewport is not applied";
    return Role::NestedSvg;
  }
  if (name.find(':') != std::string_view::npos) return Role::Skip;
  for (auto s : kSilentSkips)
    if (name == s) return Role::Skip;
  if (warning) {
    if (name == "use")
      *warning = "<use> references are not expanded; element ignored";
    else if (name == "image" || name == "foreignObject")
      *warning = "<" + std::string(name) + "> is not a supported shape; element ignored";
    else
      *warning = "unsupported element <" + std::string(name) + "> ignored";
  }
  return Role::SkipWarn;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_classes(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::map<std::string, std::string> parse_declarations(std::string_view block) {
  std::map<std::string, std::string> out;
  std::size_t start = 0;
  while (start <= block.size()) {
    std::size_t end = block.find(';', start);
    if (end == std::string_view::npos) end = block.size();
    std::string_view decl = block.substr(start, end - start);
    if (auto colon = decl.find(':'); colon != std::string_view::npos) {
      std::string key = trim(decl.substr(0, colon));
      std::string value = trim(decl.substr(colon + 1));
      if (value.ends_with("!important")) value = trim(std::string_view(value).substr(0, value.size() - 10));
      if (!key.empty()) out[key] = value;
    }
    start = end + 1;
  }
  return out;
}

bool is_class_selector(std::string_view sel) {
  if (sel.size() < 2 || sel[0] != '.') return false;
  return std::all_of(sel.begin() + 1, sel.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; });
}

void parse_stylesheet(std::string_view css, ClassRules& rules, std::vector<std::string>& warnings) {
  std::string text(css);
  for (std::size_t open = text.find("/*"); open != std::string::npos; open = text.find("/*", open)) {
    std::size_t close = text.find("*/", open + 2);
    text.erase(open, close == std::string::npos ? std::string::npos : close + 2 - open);
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find('{', pos);
    if (open == std::string::npos) break;
    std::size_t close = text.find('}', open);
    if (close == std::string::npos) break;
    std::string selectors = trim(std::string_view(text).substr(pos, open - pos));
    std::string body = text.substr(open + 1, close - open - 1);
    pos = close + 1;
    if (selectors.starts_with('@')) {
      warnings.push_back("CSS at-rule '" + selectors + "' ignored");
      // Skip a nested block such as @media { ... { ... } }.
      if (body.find('{') != std::string::npos) {
        std::size_t outer = text.find('}', pos);
        if (outer != std::string::npos) pos = outer + 1;
      }
      continue;
    }
    auto decls = parse_declarations(body);
    std::stringstream sels(selectors);
    std::string sel;
    while (std::getline(sels, sel, ',')) {
      sel = trim(sel);
      if (!is_class_selector(sel)) {
        warnings.push_back("CSS selector '" + sel + "' ignored (only .class selectors are resolved)");
        continue;
      }
      auto& target = rules[sel.substr(1)];
      for (const auto& [k, v] : decls)
        if (k == "fill" || k == "stroke" || k == "stroke-width" || k == "opacity") target[k] = v;
    }
  }
}

void collect_styles(const xml::Element& el, ClassRules& rules, std::vector<std::string>& warnings) {
  if (local_name(el.name) == "style") {
    parse_stylesheet(el.text(), rules, warnings);
    return;
  }
  for (const auto& child : el.children)
    if (const auto* c = child.element()) collect_styles(*c, rules, warnings);
}

void build_scene(const xml::Element& el, SceneNode& node, std::vector<std::string>& warnings) {
  int index = 0;
  for (const auto& child : el.children) {
    const auto* c = child.element();
    if (!c) continue;
    std::string warning;
    Role role = classify(*c, &warning);
    if (!warning.empty()) warnings.push_back(warning);
    if (role == Role::Skip || role == Role::SkipWarn) continue;
    SceneNode sn;
    sn.kind = role == Role::Shape ? NodeKind::Shape : NodeKind::Group;
    sn.element_type = role == Role::Shape ? std::string(local_name(c->name)) : "g";
    for (const auto& [k, v] : c->attributes) sn.attributes[k] = v;
    sn.node_path = node.node_path;
    sn.node_path.push_back(index++);
    if (sn.kind == NodeKind::Group)
      build_scene(*c, sn, warnings);
    else if (sn.element_type == "text")
      sn.text = c->text();
    node.children.push_back(std::move(sn));
  }
}

std::size_t count_shapes(const SceneNode& node) {
  std::size_t n = node.kind == NodeKind::Shape ? 1 : 0;
  for (const auto& c : node.children) n += count_shapes(c);
  return n;
}

// ---- style resolution -------------------------------------------------------

struct StyleState {
  std::string fill = "black";
  std::string stroke = "none";
  std::string stroke_width = "1";
  double fill_opacity = 1;
  double stroke_opacity = 1;
  std::string color = "black";
  double font_size = 16;
  std::string text_anchor = "start";
  double opacity = 1;
  Affine ctm;
  std::vector<std::string> chain;
};

double parse_unit_interval(std::string_view s, double fallback) {
  std::string t = trim(s);
  bool pct = !t.empty() && t.back() == '%';
  if (pct) t.pop_back();
  auto v = parse_length(t);
  if (!v) return fallback;
  return std::clamp(pct ? *v / 100.0 : *v, 0.0, 1.0);
}

class StyleResolver {
 public:
  StyleResolver(const SvgDocument& doc) : doc_(doc) {}

  std::optional<std::string> declared(const SceneNode& node, std::string_view prop) const {
    if (auto it = node.attributes.find("style"); it != node.attributes.end()) {
      auto decls = parse_declarations(it->second);
      if (auto d = decls.find(std::string(prop)); d != decls.end()) return d->second;
    }
    if (auto it = node.attributes.find("class"); it != node.attributes.end()) {
      std::optional<std::string> found;
      for (const auto& cls : split_classes(it->second)) {
        auto r = doc_.class_rules.find(cls);
        if (r == doc_.class_rules.end()) continue;
        if (auto d = r->second.find(std::string(prop)); d != r->second.end()) found = d->second;
      }
      if (found) return found;
    }
    if (auto it = node.attributes.find(std::string(prop)); it != node.attributes.end()) return it->second;
    return std::nullopt;
  }

  StyleState apply(const SceneNode& node, const StyleState& parent, std::vector<std::string>& warnings) const {
    StyleState s = parent;
    auto take = [&](std::string_view prop, std::string& slot) {
      if (auto v = declared(node, prop); v && trim(*v) != "inherit") slot = trim(*v);
    };
    take("fill", s.fill);
    take("stroke", s.stroke);
    take("stroke-width", s.stroke_width);
    take("color", s.color);
    take("text-anchor", s.text_anchor);
    if (auto v = declared(node, "fill-opacity")) s.fill_opacity = parse_unit_interval(*v, s.fill_opacity);
    if (auto v = declared(node, "stroke-opacity")) s.stroke_opacity = parse_unit_interval(*v, s.stroke_opacity);
    if (auto v = declared(node, "font-size")) {
      if (auto fs = parse_length(*v)) s.font_size = *fs;
    }
    // opacity is not inherited; group opacity composes multiplicatively.
    if (auto v = declared(node, "opacity")) s.opacity = parent.opacity * parse_unit_interval(*v, 1.0);
    if (node.node_path.empty()) return s;  // root <svg> carries no transform
    if (auto it = node.attributes.find("transform"); it != node.attributes.end()) {
      if (auto m = parse_transform(it->second))
        s.ctm = parent.ctm * *m;
      else
        warnings.push_back("malformed transform '" + it->second + "' on " + primitive_id(node.node_path) +
                           " ignored");
    }
    return s;
  }

 private:
  const SvgDocument& doc_;
};

std::string group_label(const SceneNode& g) {
  if (auto it = g.attributes.find("id"); it != g.attributes.end() && !trim(it->second).empty())
    return "#" + trim(it->second);
  if (auto it = g.attributes.find("class"); it != g.attributes.end()) {
    auto classes = split_classes(it->second);
    if (!classes.empty()) {
      std::string out;
      for (const auto& c : classes) out += "." + c;
      return out;
    }
  }
  std::string out = "g[";
  for (std::size_t i = 0; i < g.node_path.size(); ++i) out += (i ? "," : "") + std::to_string(g.node_path[i]);
  return out + "]";
}

// ---- geometry ---------------------------------------------------------------

double attr_number(const SceneNode& n, const char* key, double fallback = 0) {
  auto it = n.attributes.find(key);
  if (it == n.attributes.end()) return fallback;
  auto v = parse_length(it->second);
  return v ? *v : fallback;
}

std::vector<Point> parse_points(std::string_view s) {
  std::vector<double> nums;
  std::string cleaned(s);
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  ParsedPath probe = parse_path_data("M " + cleaned);
  std::vector<Point> pts;
  for (const auto& cmd : probe.commands) pts.push_back({cmd.args[0], cmd.args[1]});
  return pts;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out += ' ';
      space = false;
      out += c;
    }
  }
  return out;
}

struct Geometry {
  BBox box;  // in document user space
  bool warn = false;
  std::string warning;
};

Geometry shape_geometry(const SceneNode& n, const StyleState& st) {
  Geometry g;
  const Affine& m = st.ctm;
  const bool axis_aligned = m.b == 0 && m.c == 0;
  auto from_points = [&](const std::vector<Point>& pts) {
    for (Point p : pts) g.box.expand(m.apply(p));
  };
  auto from_local = [&](const BBox& local) { g.box = m.apply(local); };
  const std::string& t = n.element_type;
  if (t == "rect") {
    double x = attr_number(n, "x"), y = attr_number(n, "y");
    double w = std::max(0.0, attr_number(n, "width")), h = std::max(0.0, attr_number(n, "height"));
    BBox local;
    local.expand(Point{x, y});
    local.expand(Point{x + w, y + h});
    from_local(local);
  } else if (t == "circle" || t == "ellipse") {
    double cx = attr_number(n, "cx"), cy = attr_number(n, "cy");
    double rx = t == "circle" ? attr_number(n, "r") : attr_number(n, "rx");
    double ry = t == "circle" ? rx : attr_number(n, "ry");
    rx = std::max(0.0, rx);
    ry = std::max(0.0, ry);
    BBox local;
    local.expand(Point{cx - rx, cy - ry});
    local.expand(Point{cx + rx, cy + ry});
    from_local(local);
  } else if (t == "line") {
    from_points({{attr_number(n, "x1"), attr_number(n, "y1")}, {attr_number(n, "x2"), attr_number(n, "y2")}});
  } else if (t == "polyline" || t == "polygon") {
    auto it = n.attributes.find("points");
    auto pts = it == n.attributes.end() ? std::vector<Point>{} : parse_points(it->second);
    if (pts.empty()) {
      g.warn = true;
      g.warning = "empty points list";
    }
    from_points(pts);
  } else if (t == "path") {
    auto it = n.attributes.find("d");
    ParsedPath parsed = parse_path_data(it == n.attributes.end() ? "" : it->second);
    auto segs = to_absolute(parsed);
    if (!parsed.error.empty() || segs.empty()) {
      g.warn = true;
      g.warning = parsed.error.empty() ? "path has no drawable segments" : parsed.error;
      // Keep the position of whatever prefix parsed; the size is reported as 0.
      BBox prefix = path_bbox(segs);
      g.box = BBox{};
      g.box.expand(m.apply(prefix.center()));
      return g;
    }
    if (axis_aligned)
      from_local(path_bbox(segs));
    else
      from_points(flatten(segs, 32));
  } else if (t == "text") {
    auto xs = n.attributes.find("x");
    auto ys = n.attributes.find("y");
    double x = 0, y = 0;
    if (xs != n.attributes.end()) {
      auto pts = parse_points(xs->second + " 0");
      if (!pts.empty()) x = pts.front().x;
    }
    if (ys != n.attributes.end()) {
      auto pts = parse_points(ys->second + " 0");
      if (!pts.empty()) y = pts.front().x;
    }
    double fs = st.font_size;
    double width = 0.6 * fs * static_cast<double>(utf8_length(collapse_whitespace(n.text)));
    if (st.text_anchor == "middle") x -= width / 2;
    if (st.text_anchor == "end") x -= width;
    BBox local;
    local.expand(Point{x, y - 0.8 * fs});
    local.expand(Point{x + width, y + 0.2 * fs});
    from_local(local);
  }
  return g;
}

std::string affine_text(const Affine& m) {
  return "matrix(" + format_number(m.a) + " " + format_number(m.b) + " " + format_number(m.c) + " " +
         format_number(m.d) + " " + format_number(m.e) + " " + format_number(m.f) + ")";
}

bool is_style_attribute(std::string_view key) {
  if (key == "id" || key == "class" || key == "style" || key == "transform") return true;
  for (auto p : kPresentationProps)
    if (key == p) return true;
  return false;
}

std::string source_markup(const SceneNode& n, const ChannelValues& ch, const StyleState& st,
                          const std::string& local_stroke_width) {
  std::string out = "<" + n.element_type;
  for (const auto& [k, v] : n.attributes) {
    if (is_style_attribute(k)) continue;
    out += " " + k + "=\"" + xml::escape_attribute(v) + "\"";
  }
  out += " fill=\"" + ch.fill + "\"";
  out += " stroke=\"" + ch.stroke + "\"";
  out += " stroke-width=\"" + local_stroke_width + "\"";
  if (ch.opacity != 1) out += " opacity=\"" + format_number(ch.opacity) + "\"";
  if (n.element_type == "text") out += " font-size=\"" + format_number(st.font_size) + "\"";
  if (!st.ctm.is_identity()) out += " transform=\"" + affine_text(st.ctm) + "\"";
  if (n.element_type == "text") return out + ">" + xml::escape_text(n.text) + "</text>";
  return out + "/>";
}

void extract_walk(const SceneNode& node, const StyleState& parent, const StyleResolver& resolver,
                  std::vector<VisualPrimitive>& out, std::vector<std::string>& warnings) {
  StyleState st = resolver.apply(node, parent, warnings);
  if (node.kind == NodeKind::Group) {
    if (!node.node_path.empty()) st.chain.push_back(group_label(node));
    for (const auto& c : node.children) extract_walk(c, st, resolver, out, warnings);
    return;
  }
  VisualPrimitive p;
  p.id = primitive_id(node.node_path);
  p.element_type = node.element_type;
  p.group_chain = st.chain;
  if (auto it = node.attributes.find("class"); it != node.attributes.end()) p.css_classes = split_classes(it->second);

  Geometry geo = shape_geometry(node, st);
  p.bbox = geo.box;
  p.geometry_warning = geo.warn;
  if (geo.warn) warnings.push_back("UnsupportedGeometry: " + p.id + ": " + geo.warning);

  ChannelValues& ch = p.channels;
  ch.position = geo.box.center();
  ch.size = geo.warn ? 0 : geo.box.area();
  std::string current = normalize_paint(st.color).value_or("#000000FF");
  auto paint = [&](const std::string& raw, double alpha, const char* what) {
    if (auto v = normalize_paint(raw, alpha, current)) return *v;
    warnings.push_back("unrecognized " + std::string(what) + " '" + raw + "' on " + p.id + "; treated as none");
    return std::string("none");
  };
  ch.fill = paint(st.fill, st.fill_opacity, "fill");
  ch.stroke = paint(st.stroke, st.stroke_opacity, "stroke");
  double local_width = parse_length(st.stroke_width).value_or(1.0);
  ch.stroke_width = ch.stroke == "none" ? 0 : local_width * std::sqrt(std::abs(st.ctm.determinant()));
  ch.opacity = std::clamp(st.opacity, 0.0, 1.0);
  ch.shape_class = node.element_type;
  if (node.element_type == "path") {
    auto it = node.attributes.find("d");
    ch.shape_class = "path:" + path_signature(parse_path_data(it == node.attributes.end() ? "" : it->second));
  }
  p.source_markup = source_markup(node, ch, st, format_number(local_width));
  out.push_back(std::move(p));
}

std::vector<VisualPrimitive> extract_impl(const SvgDocument& doc, std::vector<std::string>& warnings) {
  std::vector<VisualPrimitive> out;
  StyleResolver resolver(doc);
  extract_walk(doc.root, StyleState{}, resolver, out, warnings);
  return out;
}

ViewBox compute_view_box(const SvgDocument& doc, const std::vector<VisualPrimitive>& primitives) {
  const auto& attrs = doc.root.attributes;
  if (auto it = attrs.find("viewBox"); it != attrs.end()) {
    auto pts = parse_points(it->second);
    if (pts.size() == 2 && pts[1].x > 0 && pts[1].y > 0) return {pts[0].x, pts[0].y, pts[1].x, pts[1].y};
  }
  std::optional<double> w, h;
  if (auto it = attrs.find("width"); it != attrs.end()) w = parse_length(it->second);
  if (auto it = attrs.find("height"); it != attrs.end()) h = parse_length(it->second);
  if (w && h && *w > 0 && *h > 0) return {0, 0, *w, *h};
  BBox all;
  for (const auto& p : primitives) all.expand(p.bbox);
  return {all.min_x, all.min_y, std::max(all.width(), 1.0), std::max(all.height(), 1.0)};
}

// ---- serialization ------------------------------------------------------------

void write_scene(const SceneNode& node, std::string& out) {
  out += "<" + node.element_type;
  for (const auto& [k, v] : node.attributes) out += " " + k + "=\"" + xml::escape_attribute(v) + "\"";
  if (node.kind == NodeKind::Shape) {
    if (node.text.empty()) {
      out += "/>";
    } else {
      out += ">" + xml::escape_text(node.text) + "</" + node.element_type + ">";
    }
    return;
  }
  out += ">";
  for (const auto& c : node.children) write_scene(c, out);
  out += "</" + node.element_type + ">";
}

bool is_external_reference(std::string_view value) {
  return value.find("http://") != std::string_view::npos || value.find("https://") != std::string_view::npos;
}

bool keep_embedded_attribute(std::string_view key, std::string_view value) {
  if (key == "xmlns" || key.starts_with("xmlns:")) return false;
  if (auto colon = key.find(':'); colon != std::string_view::npos) {
    std::string_view prefix = key.substr(0, colon);
    if (prefix != "xlink" && prefix != "xml") return false;
  }
  return !is_external_reference(value);
}

void write_attributes(const xml::Element& el, std::string& out) {
  for (const auto& [k, v] : el.attributes)
    if (keep_embedded_attribute(k, v)) out += " " + k + "=\"" + xml::escape_attribute(v) + "\"";
}

void write_verbatim(const xml::Element& el, std::string& out, std::vector<std::string>* warnings) {
  std::string_view name = local_name(el.name);
  if (name == "script" || name == "metadata" || name == "foreignObject" ||
      name.find(':') != std::string_view::npos)
    return;
  if (name == "image") {
    const std::string* href = el.attribute("href");
    if (!href) href = el.attribute("xlink:href");
    if (!href || !std::string_view(*href).starts_with("data:")) return;
  }
  out += "<" + std::string(name);
  write_attributes(el, out);
  out += ">";
  for (const auto& child : el.children) {
    if (const auto* t = child.text()) {
      if (name == "style" && is_external_reference(*t)) {
        if (warnings) warnings->push_back("stylesheet with external references dropped from embedded SVG");
        continue;
      }
      out += xml::escape_text(*t);
    } else {
      write_verbatim(*child.element(), out, warnings);
    }
  }
  out += "</" + std::string(name) + ">";
}

void write_embedded(const xml::Element& el, const std::vector<int>& path, std::string& out,
                    std::vector<std::string>* warnings) {
  int index = 0;
  for (const auto& child : el.children) {
    const auto* c = child.element();
    if (!c) {
      out += xml::escape_text(*child.text());
      continue;
    }
    Role role = classify(*c, nullptr);
    std::string_view name = local_name(c->name);
    if (role == Role::Skip || role == Role::SkipWarn) {
      write_verbatim(*c, out, warnings);
      continue;
    }
    std::vector<int> child_path = path;
    child_path.push_back(index++);
    if (role == Role::Shape) {
      out += "<g class=\"nv-prim\" data-nv-id=\"" + primitive_id(child_path) + "\">";
      write_verbatim(*c, out, warnings);
      out += "</g>";
      continue;
    }
    out += "<" + std::string(name == "svg" ? "g" : name);
    write_attributes(*c, out);
    out += ">";
    write_embedded(*c, child_path, out, warnings);
    out += "</" + std::string(name == "svg" ? "g" : name) + ">";
  }
}

}  // namespace

double ViewBox::diagonal() const { return std::hypot(width, height); }

bool is_shape_element(std::string_view name) {
  return std::find(std::begin(kShapeElements), std::end(kShapeElements), name) != std::end(kShapeElements);
}

std::string primitive_id(const std::vector<int>& node_path) {
  std::string id = "p";
  for (std::size_t i = 0; i < node_path.size(); ++i) {
    if (i) id += '_';
    id += std::to_string(node_path[i]);
  }
  return id;
}

SvgDocument parse_svg(std::string_view markup) {
  SvgDocument doc;
  doc.raw_markup = std::string(markup);
  auto root = std::make_shared<xml::Element>(xml::parse_document(markup));
  if (local_name(root->name) != "svg")
    throw Error(ErrorCode::NotSvg, "root element is <" + root->name + ">, expected <svg>");
  doc.root.kind = NodeKind::Group;
  doc.root.element_type = "svg";
  for (const auto& [k, v] : root->attributes) doc.root.attributes[k] = v;
  collect_styles(*root, doc.class_rules, doc.warnings);
  build_scene(*root, doc.root, doc.warnings);
  if (count_shapes(doc.root) == 0) throw Error(ErrorCode::EmptyScene, "document contains no shape elements");
  doc.xml = std::move(root);
  auto primitives = extract_impl(doc, doc.warnings);
  doc.view_box = compute_view_box(doc, primitives);
  return doc;
}

std::vector<VisualPrimitive> extract_primitives(const SvgDocument& doc) {
  std::vector<std::string> warnings;
  return extract_impl(doc, warnings);
}

std::string serialize_svg(const SvgDocument& doc) {
  std::string out = "<svg";
  auto attrs = doc.root.attributes;
  attrs.try_emplace("xmlns", "http://www.w3.org/2000/svg");
  for (const auto& [k, v] : attrs) out += " " + k + "=\"" + xml::escape_attribute(v) + "\"";
  out += ">";
  if (!doc.class_rules.empty()) {
    out += "<style>";
    for (const auto& [cls, props] : doc.class_rules) {
      out += "." + cls + "{";
      for (const auto& [k, v] : props) out += k + ":" + v + ";";
      out += "}";
    }
    out += "</style>";
  }
  for (const auto& c : doc.root.children) write_scene(c, out);
  out += "</svg>";
  return out;
}

std::string render_embedded_svg(const SvgDocument& doc, std::vector<std::string>* warnings) {
  const xml::Element& root = *doc.xml;
  std::string out = "<svg class=\"nv-svg\"";
  write_attributes(root, out);
  if (!root.attribute("viewBox")) {
    const auto& vb = doc.view_box;
    out += " viewBox=\"" + format_number(vb.x) + " " + format_number(vb.y) + " " + format_number(vb.width) + " " +
           format_number(vb.height) + "\"";
  }
  out += ">";
  write_embedded(root, {}, out, warnings);
  out += "</svg>";
  return out;
}

Json to_json(const VisualPrimitive& p) {
  const auto& c = p.channels;
  return Json{{"id", p.id},
              {"element_type", p.element_type},
              {"group_chain", p.group_chain},
              {"css_classes", p.css_classes},
              {"channels",
               {{"position", {{"x", c.position.x}, {"y", c.position.y}}},
                {"size", c.size},
                {"fill", c.fill},
                {"stroke", c.stroke},
                {"stroke_width", c.stroke_width},
                {"opacity", c.opacity},
                {"shape_class", c.shape_class}}},
              {"source_markup", p.source_markup},
              {"geometry_warning", p.geometry_warning}};
}

Json to_json(const SceneNode& node) {
  Json j{{"kind", node.kind == NodeKind::Group ? "group" : "shape"},
         {"element_type", node.element_type},
         {"attributes", node.attributes},
         {"node_path", node.node_path}};
  if (!node.text.empty()) j["text"] = node.text;
  if (node.kind == NodeKind::Group) {
    Json children = Json::array();
    for (const auto& c : node.children) children.push_back(to_json(c));
    j["children"] = std::move(children);
  }
  return j;
}

}  // namespace narvis
