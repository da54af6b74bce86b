#include "narvis/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "narvis/color.hpp"
#include "narvis/error.hpp"
#include "narvis/path_data.hpp"
#include "narvis/xml.hpp"
#include "player_assets.hpp"

namespace narvis {

namespace {

struct Theme {
  std::string easing = "ease-in-out";
  double prior_opacity = 0.35;
  bool morph_resampling = true;
  int resample_points = 64;
  std::string accent = "#D9480F";
};

Theme read_theme(const Json& j) {
  Theme t;
  if (!j.is_object()) json_util::schema_error("/theme", "theme must be an object");
  json_util::ObjectReader r(j, "/theme");
  if (r.optional("easing")) {
    t.easing = r.string("easing");
    bool ok = !t.easing.empty() && std::all_of(t.easing.begin(), t.easing.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '(' || c == ')' || c == ',' ||
             c == '.' || c == ' ';
    });
    if (!ok) json_util::schema_error(r.at("easing"), "easing must be a CSS timing function");
  }
  if (r.optional("prior_opacity")) {
    t.prior_opacity = r.number("prior_opacity");
    if (t.prior_opacity < 0 || t.prior_opacity > 1) json_util::schema_error(r.at("prior_opacity"), "must be in [0,1]");
  }
  if (r.optional("morph_resampling")) t.morph_resampling = r.boolean("morph_resampling");
  if (r.optional("resample_points")) {
    auto n = r.integer("resample_points");
    if (n < 8 || n > 4096) json_util::schema_error(r.at("resample_points"), "must be in [8,4096]");
    t.resample_points = static_cast<int>(n);
  }
  if (r.optional("accent")) {
    auto c = parse_color(r.string("accent"));
    if (!c) json_util::schema_error(r.at("accent"), "not a color");
    t.accent = c->hex();
  }
  r.finish();
  return t;
}

double param_number(const Json& params, const char* key, double fallback) {
  auto it = params.find(key);
  return it != params.end() && it->is_number() ? it->get<double>() : fallback;
}

std::optional<std::string> param_color(const Json& params, const std::string& id) {
  auto colors = params.find("colors");
  if (colors == params.end() || !colors->is_object()) return std::nullopt;
  auto c = colors->find(id);
  if (c == colors->end() || !c->is_string()) return std::nullopt;
  auto paint = normalize_paint(c->get<std::string>());
  return paint && paint->starts_with("#") ? paint : std::nullopt;
}

bool stroke_painted(const VisualPrimitive& p) { return p.channels.fill == "none" && p.channels.stroke != "none"; }

std::string own_paint(const VisualPrimitive& p) { return stroke_painted(p) ? p.channels.stroke : p.channels.fill; }

// ---- playback states ----

using UnitState = std::map<std::string, PrimState>;

UnitState initial_unit_state(const Deck& deck, const VisualUnit& unit) {
  UnitState st;
  std::map<std::string, TransitionEffect> first_visibility;
  std::set<std::string> colored;
  for (const auto& slide : deck.slides) {
    if (slide.unit_id != unit.unit_id) continue;
    for (const auto& step : slide.steps) {
      const auto* t = step.transition();
      if (!t) continue;
      for (const auto& id : t->targets.resolve(unit)) {
        if (t->effect == TransitionEffect::FadeIn || t->effect == TransitionEffect::FadeOut ||
            t->effect == TransitionEffect::Grow)
          first_visibility.try_emplace(id, t->effect);
        if (t->effect == TransitionEffect::AddColor) colored.insert(id);
      }
    }
  }
  for (const auto& id : unit.primitive_ids) {
    PrimState p;
    p.opacity = 1;
    auto first = first_visibility.find(id);
    if (first != first_visibility.end() && first->second == TransitionEffect::FadeIn) p.opacity = 0;
    if (first != first_visibility.end() && first->second == TransitionEffect::Grow) p.scale = 0;
    if (colored.contains(id)) p.fill = kNeutralGray;
    st[id] = p;
  }
  return st;
}

void apply_step(UnitState& st, const Step& step, const VisualUnit& unit) {
  const auto* t = step.transition();
  if (!t) return;
  for (const auto& id : t->targets.resolve(unit)) {
    PrimState& p = st[id];
    switch (t->effect) {
      case TransitionEffect::FadeIn: p.opacity = 1; break;
      case TransitionEffect::FadeOut: p.opacity = 0; break;
      case TransitionEffect::Grow:
        p.opacity = 1;
        p.scale = 1;
        break;
      case TransitionEffect::ChangeSize: p.scale = param_number(t->params, "scale", 1.5); break;
      case TransitionEffect::AddColor: p.fill = param_color(t->params, id); break;
      case TransitionEffect::Morph: p.morph_step = step.step_id; break;
      case TransitionEffect::Highlight: break;
    }
  }
}

// ---- morph ----

std::optional<double> number_attr(const std::map<std::string, std::string>& attrs, const std::string& key) {
  auto it = attrs.find(key);
  if (it == attrs.end()) return std::nullopt;
  return parse_length(it->second);
}

std::vector<Point> parse_points(std::string_view text) {
  std::vector<double> nums;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      try {
        nums.push_back(std::stod(cur));
      } catch (...) {
      }
      cur.clear();
    }
  };
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c)))
      flush();
    else if (c == '-' && !cur.empty() && cur.back() != 'e' && cur.back() != 'E') {
      flush();
      cur += c;
    } else
      cur += c;
  }
  flush();
  std::vector<Point> pts;
  for (std::size_t i = 0; i + 1 < nums.size(); i += 2) pts.push_back({nums[i], nums[i + 1]});
  return pts;
}

std::vector<Point> ellipse_points(double cx, double cy, double rx, double ry, int n) {
  std::vector<Point> pts;
  for (int i = 0; i <= n; ++i) {
    double a = 2 * std::numbers::pi * i / n;
    pts.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
  }
  return pts;
}

std::string attr_string(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

Json flat(const std::vector<Point>& pts) {
  Json out = Json::array();
  for (const auto& p : pts) {
    out.push_back(p.x);
    out.push_back(p.y);
  }
  return out;
}

bool closed_element(const std::string& e, const std::map<std::string, std::string>& attrs) {
  if (e == "path") {
    auto d = attrs.find("d");
    return d != attrs.end() && d->second.find_first_of("zZ") != std::string::npos;
  }
  return e != "line" && e != "polyline";
}

Json morph_data(const SceneNode& node, const Json& target, const EffectContext& ctx, bool allow_resample,
                const std::string& id) {
  const std::string element = target.at("element").get<std::string>();
  std::map<std::string, std::string> to_attrs;
  for (auto it = target.at("attrs").begin(); it != target.at("attrs").end(); ++it)
    to_attrs[it.key()] = attr_string(it.value());
  Json final_shape{{"element", element}, {"attrs", to_attrs}};
  auto incompatible = [&](const std::string& why) -> Json {
    throw Error(ErrorCode::MorphIncompatible, "cannot morph " + id + " (" + node.element_type + ") into " + element +
                                                  ": " + why,
                ctx.step_id, {id});
  };

  if (element == node.element_type && element != "path") {
    Json from = Json::object(), to = Json::object();
    for (const auto& [k, v] : to_attrs) {
      auto a = number_attr(node.attributes, k), b = parse_length(v);
      if (a && b) {
        from[k] = *a;
        to[k] = *b;
      }
    }
    return Json{{"mode", "attrs"}, {"from", from}, {"to", to}, {"final", final_shape}};
  }
  if (element == "path" && node.element_type == "path") {
    auto a = parse_path_data(node.attributes.count("d") ? node.attributes.at("d") : "");
    auto b = parse_path_data(to_attrs.count("d") ? to_attrs.at("d") : "");
    if (!b.error.empty()) incompatible("target path data is malformed");
    if (a.error.empty() && path_signature(a) == path_signature(b)) {
      auto sa = to_absolute(a), sb = to_absolute(b);
      std::string kinds;
      Json from = Json::array(), to = Json::array();
      for (std::size_t i = 0; i < sa.size(); ++i) {
        kinds += sa[i].kind;
        for (double v : sa[i].args) from.push_back(v);
        for (double v : sb[i].args) to.push_back(v);
      }
      return Json{{"mode", "path"}, {"kinds", kinds}, {"from", from}, {"to", to}, {"final", final_shape}};
    }
  }
  if (!allow_resample) incompatible("shapes differ and resampling is disabled");
  auto oa = shape_outline(node.element_type, node.attributes);
  auto ob = shape_outline(element, to_attrs);
  if (!oa || !ob || oa->size() < 2 || ob->size() < 2) incompatible("no outline to resample");
  return Json{{"mode", "points"},
              {"from", flat(resample(*oa, ctx.resample_points))},
              {"to", flat(resample(*ob, ctx.resample_points))},
              {"closed", closed_element(element, to_attrs)},
              {"final", final_shape}};
}

void collect_nodes(const SceneNode& node, std::map<std::string, const SceneNode*>& out) {
  if (node.kind == NodeKind::Shape) out[primitive_id(node.node_path)] = &node;
  for (const auto& c : node.children) collect_nodes(c, out);
}

// ---- HTML ----

std::string esc(std::string_view s) { return xml::escape_text(s); }
std::string attr(std::string_view s) { return xml::escape_attribute(s); }

std::string safe_style_value(const std::string& v) {
  return v.find("://") == std::string::npos && v.find("url(") == std::string::npos ? v : "";
}

bool safe_style_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) { return (c >= 'a' && c <= 'z') || c == '-'; });
}

std::string style_attrs(const AnnotationSpec& a, const std::map<std::string, std::string>& defaults) {
  std::map<std::string, std::string> merged = defaults;
  for (const auto& [k, v] : a.style)
    if (safe_style_key(k)) merged[k] = safe_style_value(v);
  std::string out;
  for (const auto& [k, v] : merged)
    if (!v.empty()) out += " " + k + "=\"" + attr(v) + "\"";
  return out;
}

std::string n(double v) { return format_number(v); }

std::string render_annotation(const Step& step, const Theme& theme) {
  const AnnotationSpec& a = *step.annotation();
  const auto& g = a.geometry;
  std::string body;
  std::map<std::string, std::string> line_style = {{"fill", "none"}, {"stroke", theme.accent}, {"stroke-width", "2"}};
  switch (a.form) {
    case AnnotationForm::Circle: {
      double cx = (g[0].x + g[1].x) / 2, cy = (g[0].y + g[1].y) / 2;
      double rx = std::abs(g[1].x - g[0].x) / 2, ry = std::abs(g[1].y - g[0].y) / 2;
      body = "<ellipse cx=\"" + n(cx) + "\" cy=\"" + n(cy) + "\" rx=\"" + n(rx) + "\" ry=\"" + n(ry) + "\"" +
             style_attrs(a, line_style) + "/>";
      break;
    }
    case AnnotationForm::ArrowLine:
    case AnnotationForm::DoubleArrowLine: {
      auto style = line_style;
      style["marker-end"] = "url(#nv-arrow)";
      if (a.form == AnnotationForm::DoubleArrowLine) style["marker-start"] = "url(#nv-arrow-start)";
      std::string merged;
      for (const auto& [k, v] : a.style)
        if (safe_style_key(k) && !k.starts_with("marker")) style[k] = safe_style_value(v);
      for (const auto& [k, v] : style)
        if (!v.empty()) merged += " " + k + "=\"" + attr(v) + "\"";
      body = "<line x1=\"" + n(g[0].x) + "\" y1=\"" + n(g[0].y) + "\" x2=\"" + n(g[1].x) + "\" y2=\"" + n(g[1].y) +
             "\"" + merged + "/>";
      break;
    }
    case AnnotationForm::FreeformLine: {
      std::string pts;
      for (const auto& p : g) pts += (pts.empty() ? "" : " ") + n(p.x) + "," + n(p.y);
      body = "<polyline points=\"" + pts + "\"" + style_attrs(a, line_style) + "/>";
      break;
    }
    case AnnotationForm::ColorLegend: {
      // One entry per content line: "<color> <label>".
      std::istringstream lines(a.content);
      std::string line;
      double y = g[0].y;
      while (std::getline(lines, line)) {
        if (line.empty()) continue;
        auto space = line.find(' ');
        std::string color = line.substr(0, space);
        std::string label = space == std::string::npos ? "" : line.substr(space + 1);
        auto paint = normalize_paint(color);
        body += "<rect x=\"" + n(g[0].x) + "\" y=\"" + n(y) + "\" width=\"12\" height=\"12\" fill=\"" +
                attr(paint && paint->starts_with("#") ? *paint : "#888888FF") + "\"/>";
        body += "<text x=\"" + n(g[0].x + 18) + "\" y=\"" + n(y + 11) + "\"" +
                style_attrs(a, {{"fill", "#222222"}}) + ">" + esc(label) + "</text>";
        y += 18;
      }
      break;
    }
    case AnnotationForm::Text:
      body = "<text x=\"" + n(g[0].x) + "\" y=\"" + n(g[0].y) + "\"" + style_attrs(a, {{"fill", "#222222"}}) + ">" +
             esc(a.content) + "</text>";
      break;
  }
  return "<g class=\"nv-ann\" data-step-id=\"" + attr(step.step_id) + "\" data-form=\"" +
         std::string(to_string(a.form)) + "\">" + body + "</g>";
}

std::string render_question(const QuestionSpec& q, const std::string& step_id) {
  const char* type = q.mode == QuestionMode::SingleChoice ? "radio" : "checkbox";
  std::string out = "<form class=\"nv-question\" data-question-id=\"" + attr(q.question_id) + "\" data-step-id=\"" +
                    attr(step_id) + "\" data-mode=\"" + std::string(to_string(q.mode)) + "\" hidden><p>" +
                    esc(q.prompt) + "</p>";
  for (std::size_t i = 0; i < q.options.size(); ++i)
    out += "<label><input type=\"" + std::string(type) + "\" name=\"" + attr(q.question_id) + "\" value=\"" +
           std::to_string(i) + "\"> " + esc(q.options[i]) + "</label>";
  out += "<button type=\"submit\">Submit</button><span class=\"nv-feedback\"></span></form>";
  return out;
}

std::string step_label(const Step& step) {
  if (const auto* t = step.transition()) return std::string(display_name(t->effect));
  if (const auto* a = step.annotation()) return a->form == AnnotationForm::Text ? "Text" : std::string(to_string(a->form));
  return "Question";
}

std::string channel_list(const std::vector<Channel>& tags) {
  std::string out;
  for (Channel c : tags) out += (out.empty() ? "" : ", ") + std::string(to_string(c));
  return out;
}

// JSON inside <script>: '<' is escaped so no markup can terminate the element.
std::string script_json(const Json& j) {
  std::string s = j.dump();
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '<')
      out += "\\u003c";
    else
      out += c;
  }
  return out;
}

}  // namespace

std::optional<std::vector<Point>> shape_outline(const std::string& element,
                                                const std::map<std::string, std::string>& attrs) {
  auto num = [&](const char* k, double fallback = 0) { return number_attr(attrs, k).value_or(fallback); };
  if (element == "circle") return ellipse_points(num("cx"), num("cy"), num("r"), num("r"), 64);
  if (element == "ellipse") return ellipse_points(num("cx"), num("cy"), num("rx"), num("ry"), 64);
  if (element == "rect") {
    double x = num("x"), y = num("y"), w = num("width"), h = num("height");
    return std::vector<Point>{{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}, {x, y}};
  }
  if (element == "line") return std::vector<Point>{{num("x1"), num("y1")}, {num("x2"), num("y2")}};
  if (element == "polyline" || element == "polygon") {
    auto it = attrs.find("points");
    if (it == attrs.end()) return std::nullopt;
    auto pts = parse_points(it->second);
    if (element == "polygon" && !pts.empty()) pts.push_back(pts.front());
    return pts;
  }
  if (element == "path") {
    auto it = attrs.find("d");
    if (it == attrs.end()) return std::nullopt;
    auto parsed = parse_path_data(it->second);
    if (!parsed.error.empty()) return std::nullopt;
    return flatten(to_absolute(parsed), 16);
  }
  return std::nullopt;
}

std::vector<SceneState> playback_states(const Deck& deck, const std::vector<std::string>& primitive_ids,
                                        const Json& theme_json) {
  const Theme theme = read_theme(theme_json);
  std::map<std::string, UnitState> final_states, running;
  for (const auto& unit : deck.units) {
    UnitState st = initial_unit_state(deck, unit);
    running[unit.unit_id] = st;
    for (const auto& slide : deck.slides)
      if (slide.unit_id == unit.unit_id)
        for (const auto& step : slide.steps) apply_step(st, step, unit);
    final_states[unit.unit_id] = std::move(st);
  }
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < deck.sequence.order.size(); ++i) position[deck.sequence.order[i]] = i;

  std::vector<SceneState> states;
  std::size_t slide_index = 0;
  auto hidden_scene = [&] {
    SceneState s;
    for (const auto& id : primitive_ids) s.prims[id] = PrimState{};
    return s;
  };
  if (deck.overview_slide) {
    SceneState s = hidden_scene();
    s.slide_index = slide_index++;
    states.push_back(std::move(s));
  }
  std::set<std::string> entered;
  for (const auto& slide : deck.slides) {
    const VisualUnit& unit = *deck.unit(slide.unit_id);
    const bool entrance = entered.insert(slide.unit_id).second;
    const std::size_t k = position.at(slide.unit_id);
    SceneState base = hidden_scene();
    for (const auto& other : deck.units) {
      if (position.at(other.unit_id) >= k) continue;
      for (auto [id, p] : final_states.at(other.unit_id)) {
        if (entrance) p.opacity *= theme.prior_opacity;
        base.prims[id] = p;
      }
    }
    UnitState& current = running.at(slide.unit_id);
    for (std::size_t j = 0; j <= slide.steps.size(); ++j) {
      SceneState s = base;
      s.slide_index = slide_index;
      s.steps_done = j;
      for (const auto& [id, p] : current) s.prims[id] = p;
      for (std::size_t q = 0; q < j; ++q) {
        const Step& st = slide.steps[q];
        if (st.annotation()) s.annotations.push_back(st.step_id);
        if (const auto* qs = st.question()) s.questions.push_back(qs->question_id);
      }
      if (j > 0) {
        const Step& last = slide.steps[j - 1];
        if (const auto* t = last.transition(); t && t->effect == TransitionEffect::Highlight) {
          const double dim = param_number(t->params, "dim_opacity", 0.2);
          auto targets = t->targets.resolve(unit);
          std::set<std::string> keep(targets.begin(), targets.end());
          for (auto& [id, p] : s.prims)
            if (!keep.contains(id) && p.opacity > 0) p.opacity = std::min(p.opacity, dim);
        }
      }
      states.push_back(std::move(s));
      if (j < slide.steps.size()) apply_step(current, slide.steps[j], unit);
    }
    ++slide_index;
  }
  return states;
}

EffectFragment render_effect(const TransitionSpec& spec, const EffectContext& ctx) {
  EffectFragment f;
  f.effect = spec.effect;
  f.duration_ms = spec.duration_ms;
  f.targets = ctx.unit ? spec.targets.resolve(*ctx.unit) : spec.targets.ids;
  for (const auto& id : f.targets)
    if (!ctx.primitives || !ctx.primitives->contains(id))
      throw Error(ErrorCode::DanglingPrimitiveRef, "step " + ctx.step_id + " targets unknown primitive " + id,
                  ctx.step_id, {id});
  const bool resample = spec.params.is_object() && spec.params.contains("resample") && spec.params["resample"].is_boolean()
                            ? spec.params["resample"].get<bool>()
                            : ctx.morph_resampling;
  for (const auto& id : f.targets) {
    const VisualPrimitive& prim = ctx.primitives->at(id);
    switch (spec.effect) {
      case TransitionEffect::FadeIn:
        f.from[id] = {{"opacity", 0}};
        f.to[id] = {{"opacity", 1}};
        break;
      case TransitionEffect::FadeOut:
        f.from[id] = {{"opacity", 1}};
        f.to[id] = {{"opacity", 0}};
        break;
      case TransitionEffect::Grow:
        f.from[id] = {{"opacity", 1}, {"scale", 0}};
        f.to[id] = {{"scale", 1}};
        break;
      case TransitionEffect::ChangeSize:
        f.from[id] = Json::object();
        f.to[id] = {{"scale", param_number(spec.params, "scale", 1.5)}};
        break;
      case TransitionEffect::AddColor:
        f.from[id] = {{"fill", kNeutralGray}};
        f.to[id] = {{"fill", param_color(spec.params, id).value_or(own_paint(prim))}};
        break;
      case TransitionEffect::Highlight:
        f.from[id] = Json::object();
        f.to[id] = {{"opacity", 1}};
        break;
      case TransitionEffect::Morph: {
        if (!ctx.nodes || !ctx.nodes->contains(id))
          throw Error(ErrorCode::DanglingPrimitiveRef, "no scene node for " + id, ctx.step_id, {id});
        const Json& target = spec.params.at("target").at(id);
        f.morph[id] = morph_data(*ctx.nodes->at(id), target, ctx, resample, id);
        f.from[id] = Json::object();
        f.to[id] = Json::object();
        break;
      }
    }
  }
  if (spec.effect == TransitionEffect::Highlight) f.dim_opacity = param_number(spec.params, "dim_opacity", 0.2);
  return f;
}

Json to_json(const EffectFragment& f) {
  Json j{{"effect", to_string(f.effect)},
         {"targets", f.targets},
         {"duration_ms", f.duration_ms},
         {"from", f.from},
         {"to", f.to}};
  if (!f.morph.empty()) j["morph"] = f.morph;
  if (f.dim_opacity) j["dim_opacity"] = *f.dim_opacity;
  return j;
}

CompiledSlideshow compile(const Deck& deck, const SvgDocument& doc, const CompileOptions& opts) {
  validate_deck(deck);
  const Theme theme = read_theme(opts.theme);
  std::map<std::string, VisualPrimitive> prims;
  std::vector<std::string> prim_order;
  for (auto& p : extract_primitives(doc)) {
    prim_order.push_back(p.id);
    prims.emplace(p.id, std::move(p));
  }
  std::map<std::string, const SceneNode*> nodes;
  collect_nodes(doc.root, nodes);
  for (std::size_t i = 0; i < deck.units.size(); ++i) {
    std::vector<std::string> missing;
    for (const auto& id : deck.units[i].primitive_ids)
      if (!prims.contains(id)) missing.push_back(id);
    if (!missing.empty())
      throw Error(ErrorCode::DanglingPrimitiveRef,
                  "unit " + deck.units[i].unit_id + " references " + missing.front() + ", absent from the document",
                  json_util::join_pointer("/units", i), missing);
  }

  Json effects = Json::object();
  Json questions = Json::object();
  for (const auto& slide : deck.slides) {
    const VisualUnit& unit = *deck.unit(slide.unit_id);
    for (const auto& step : slide.steps) {
      if (const auto* t = step.transition()) {
        EffectContext ctx{&prims, &nodes, &unit, theme.morph_resampling, theme.resample_points, step.step_id};
        effects[step.step_id] = to_json(render_effect(*t, ctx));
      } else if (const auto* q = step.question()) {
        questions[q->question_id] = {{"mode", to_string(q->mode)}, {"options", q->options.size()}, {"correct", q->correct}};
      }
    }
  }

  Json paint = Json::object();
  for (const auto& id : prim_order)
    if (stroke_painted(prims.at(id))) paint[id] = "stroke";

  auto states = playback_states(deck, prim_order, opts.theme);
  Json state_json = Json::array();
  for (const auto& s : states) {
    Json o = Json::array(), sc = Json::object(), fill = Json::object(), morph = Json::object();
    for (const auto& id : prim_order) {
      const PrimState& p = s.prims.at(id);
      o.push_back(p.opacity);
      if (p.scale != 1) sc[id] = p.scale;
      if (p.fill) fill[id] = *p.fill;
      if (p.morph_step) morph[id] = *p.morph_step;
    }
    state_json.push_back({{"slide", s.slide_index},
                          {"step", s.steps_done},
                          {"o", std::move(o)},
                          {"s", std::move(sc)},
                          {"f", std::move(fill)},
                          {"m", std::move(morph)},
                          {"a", s.annotations},
                          {"q", s.questions}});
  }

  Json slides_json = Json::array();
  Json manifest_slides = Json::array();
  if (deck.overview_slide) {
    slides_json.push_back({{"id", "overview"}, {"unit", nullptr}, {"steps", Json::array()}});
    manifest_slides.push_back({{"slide_id", "overview"}, {"unit_id", nullptr}, {"steps", Json::array()}});
  }
  for (const auto& slide : deck.slides) {
    Json ids = Json::array(), entries = Json::array();
    for (const auto& step : slide.steps) {
      ids.push_back(step.step_id);
      Json e{{"step_id", step.step_id}, {"kind", step.kind()}};
      if (const auto* q = step.question()) e["question_id"] = q->question_id;
      entries.push_back(std::move(e));
    }
    slides_json.push_back({{"id", slide.slide_id}, {"unit", slide.unit_id}, {"steps", std::move(ids)}});
    manifest_slides.push_back({{"slide_id", slide.slide_id}, {"unit_id", slide.unit_id}, {"steps", std::move(entries)}});
  }

  Json data{{"deck_id", deck.deck_id},
            {"beacon", opts.beacon_url ? Json(*opts.beacon_url) : Json(nullptr)},
            {"student", opts.student_token ? Json(*opts.student_token) : Json(nullptr)},
            {"prims", prim_order},
            {"paint", std::move(paint)},
            {"slides", std::move(slides_json)},
            {"states", std::move(state_json)},
            {"effects", std::move(effects)},
            {"questions", std::move(questions)},
            {"theme", {{"easing", theme.easing}, {"accent", theme.accent}}}};

  // Overlay with annotation markup, inserted before the closing </svg>.
  std::string overlay =
      "<defs><marker id=\"nv-arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" "
      "orient=\"auto\"><path d=\"M0 0 L10 5 L0 10 Z\" fill=\"" + theme.accent + "\"/></marker>"
      "<marker id=\"nv-arrow-start\" viewBox=\"0 0 10 10\" refX=\"1\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" "
      "orient=\"auto\"><path d=\"M10 0 L0 5 L10 10 Z\" fill=\"" + theme.accent + "\"/></marker></defs>"
      "<g class=\"nv-overlay\">";
  for (const auto& slide : deck.slides)
    for (const auto& step : slide.steps)
      if (step.annotation()) overlay += render_annotation(step, theme);
  overlay += "</g>";
  std::string svg = render_embedded_svg(doc);
  svg.insert(svg.size() - std::string("</svg>").size(), overlay);

  std::string html;
  html += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  html += "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n";
  html += "<title>" + esc(deck.title) + "</title>\n<style>";
  html += ":root{--nv-easing:" + theme.easing + ";--nv-accent:" + theme.accent + "}";
  if (opts.embed_fonts) html += "body{font-family:Georgia,\"Times New Roman\",serif}";
  html += player::kStyle;
  html += "</style>\n</head>\n<body>\n";
  html += "<main class=\"nv-deck\" data-deck-id=\"" + attr(deck.deck_id) + "\">\n";
  html += "<header><h1>" + esc(deck.title) + "</h1></header>\n";
  html += "<div class=\"nv-stage\">" + svg + "</div>\n<div class=\"nv-panel\">\n";

  int slide_count = 0;
  if (deck.overview_slide) {
    ++slide_count;
    html += "<section class=\"nv-slide\" data-slide-id=\"overview\" hidden><h2>Overview</h2><ol class=\"nv-outline\">";
    for (const auto& uid : deck.sequence.order) {
      const VisualUnit* u = deck.unit(uid);
      html += "<li data-unit-id=\"" + attr(uid) + "\">" + esc(u && !u->name.empty() ? u->name : uid) + "</li>";
    }
    html += "</ol></section>\n";
  }
  for (const auto& slide : deck.slides) {
    ++slide_count;
    const VisualUnit* u = deck.unit(slide.unit_id);
    html += "<section class=\"nv-slide\" data-slide-id=\"" + attr(slide.slide_id) + "\" data-unit-id=\"" +
            attr(slide.unit_id) + "\" hidden><h2>" + esc(u && !u->name.empty() ? u->name : slide.unit_id) + "</h2>";
    if (!slide.channel_tags.empty())
      html += "<p class=\"nv-channels\">" + esc(channel_list(slide.channel_tags)) + "</p>";
    html += "<ol class=\"nv-steps\">";
    for (const auto& step : slide.steps)
      html += "<li data-step-id=\"" + attr(step.step_id) + "\">" + esc(step_label(step)) + "</li>";
    html += "</ol>";
    if (!slide.notes.empty()) html += "<div class=\"nv-notes\">" + esc(slide.notes) + "</div>";
    for (const auto& step : slide.steps)
      if (const auto* q = step.question()) html += render_question(*q, step.step_id);
    html += "</section>\n";
  }
  html += "</div>\n<nav class=\"nv-nav\"><button type=\"button\" class=\"nv-prev\">Back</button>"
          "<span class=\"nv-counter\"></span><button type=\"button\" class=\"nv-next\">Next</button></nav>\n";
  if (opts.beacon_url)
    html += "<form class=\"nv-comment\"><textarea rows=\"2\" placeholder=\"Comments on this tutorial\"></textarea>"
            "<button type=\"submit\">Send</button></form>\n";
  html += "</main>\n<script type=\"application/json\" id=\"nv-data\">" + script_json(data) + "</script>\n";
  html += "<script>";
  html += player::kScript;
  html += "</script>\n</body>\n</html>\n";

  CompiledSlideshow out;
  out.html = std::move(html);
  out.slide_count = slide_count;
  out.manifest = Json{{"deck_id", deck.deck_id}, {"slides", std::move(manifest_slides)}, {"state_count", states.size()}};
  return out;
}

}  // namespace narvis
