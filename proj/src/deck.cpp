#include "narvis/deck.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "narvis/error.hpp"

namespace narvis {

namespace {

using json_util::join_pointer;

constexpr std::array<TransitionEffect, 7> kEffects = {
    TransitionEffect::FadeIn,   TransitionEffect::FadeOut, TransitionEffect::Grow,     TransitionEffect::ChangeSize,
    TransitionEffect::AddColor, TransitionEffect::Morph,   TransitionEffect::Highlight};
constexpr std::array<AnnotationForm, 6> kForms = {AnnotationForm::ColorLegend,     AnnotationForm::Circle,
                                                  AnnotationForm::ArrowLine,       AnnotationForm::DoubleArrowLine,
                                                  AnnotationForm::FreeformLine,    AnnotationForm::Text};

[[noreturn]] void violation(const std::string& pointer, const std::string& message) {
  throw Error(ErrorCode::InvariantViolation, message + " at " + pointer, pointer);
}

std::string slide_pointer(std::size_t i) { return join_pointer("/slides", i); }
std::string step_pointer(std::size_t i, std::size_t j) { return join_pointer(join_pointer(slide_pointer(i), "steps"), j); }

void validate_params(const TransitionSpec& t, const std::vector<std::string>& targets, const std::string& at) {
  const std::string p = join_pointer(at, "params");
  if (!t.params.is_object()) violation(p, "params must be an object");
  auto number_in = [&](const char* key, double lo, double hi, bool open_lo) {
    auto it = t.params.find(key);
    if (it == t.params.end()) return;
    if (!it->is_number()) violation(join_pointer(p, key), std::string(key) + " must be a number");
    double v = it->get<double>();
    if (v > hi || v < lo || (open_lo && v == lo)) violation(join_pointer(p, key), std::string(key) + " out of range");
  };
  switch (t.effect) {
    case TransitionEffect::Highlight: number_in("dim_opacity", 0.0, 1.0, false); break;
    case TransitionEffect::ChangeSize: number_in("scale", 0.0, 1e6, true); break;
    case TransitionEffect::AddColor: {
      auto it = t.params.find("colors");
      if (it != t.params.end() && !it->is_object()) violation(join_pointer(p, "colors"), "colors must be an object");
      break;
    }
    case TransitionEffect::Morph: {
      auto it = t.params.find("target");
      if (it == t.params.end() || !it->is_object()) violation(join_pointer(p, "target"), "morph requires a target map");
      for (const auto& id : targets) {
        auto g = it->find(id);
        std::string gp = join_pointer(join_pointer(p, "target"), id);
        if (g == it->end()) violation(gp, "morph has no target geometry for " + id);
        if (!g->is_object() || !g->contains("element") || !(*g)["element"].is_string() || !g->contains("attrs") ||
            !(*g)["attrs"].is_object())
          violation(gp, "morph target needs an element name and an attrs object");
      }
      auto r = t.params.find("resample");
      if (r != t.params.end() && !r->is_boolean()) violation(join_pointer(p, "resample"), "resample must be a boolean");
      break;
    }
    default: break;
  }
}

void validate_step(const Step& step, const VisualUnit& unit, const std::string& at) {
  if (step.step_id.empty()) violation(join_pointer(at, "step_id"), "empty step id");
  if (const auto* t = step.transition()) {
    if (t->duration_ms <= 0) violation(join_pointer(at, "duration_ms"), "duration must be positive");
    if (!t->targets.all) {
      if (t->targets.ids.empty()) violation(join_pointer(at, "targets"), "targets must be nonempty");
      std::set<std::string> members(unit.primitive_ids.begin(), unit.primitive_ids.end()), seen;
      std::vector<std::string> outside;
      for (const auto& id : t->targets.ids) {
        if (!seen.insert(id).second) violation(join_pointer(at, "targets"), "duplicate target " + id);
        if (!members.contains(id)) outside.push_back(id);
      }
      if (!outside.empty())
        throw Error(ErrorCode::TargetOutsideUnit,
                    "target " + outside.front() + " is not a primitive of unit " + unit.unit_id,
                    join_pointer(at, "targets"), outside);
    }
    validate_params(*t, t->targets.resolve(unit), at);
  } else if (const auto* a = step.annotation()) {
    const std::size_t n = a->geometry.size();
    const std::string gp = join_pointer(at, "geometry");
    switch (a->form) {
      case AnnotationForm::Circle:
      case AnnotationForm::ArrowLine:
      case AnnotationForm::DoubleArrowLine:
        if (n != 2) violation(gp, std::string(to_string(a->form)) + " needs exactly 2 points");
        break;
      case AnnotationForm::FreeformLine:
        if (n < 2) violation(gp, "freeform_line needs at least 2 points");
        break;
      case AnnotationForm::ColorLegend:
      case AnnotationForm::Text:
        if (n < 1) violation(gp, std::string(to_string(a->form)) + " needs an anchor point");
        break;
    }
    if (a->form == AnnotationForm::Text && a->content.empty())
      violation(join_pointer(at, "content"), "text annotation without content");
  } else if (const auto* q = step.question()) {
    if (q->question_id.empty()) violation(join_pointer(at, "question_id"), "empty question id");
    if (q->options.size() < 2) violation(join_pointer(at, "options"), "a question needs at least 2 options");
    const std::string cp = join_pointer(at, "correct");
    if (q->correct.empty()) violation(cp, "correct set is empty");
    if (q->mode == QuestionMode::SingleChoice && q->correct.size() != 1)
      violation(cp, "single_choice needs exactly one correct option");
    for (std::size_t k = 0; k < q->correct.size(); ++k) {
      int c = q->correct[k];
      if (c < 0 || static_cast<std::size_t>(c) >= q->options.size()) violation(cp, "correct index out of range");
      if (k > 0 && q->correct[k - 1] >= c) violation(cp, "correct indices must be ascending and unique");
    }
  }
}

int next_number(const Deck& deck, char prefix_kind) {
  int best = 0;
  auto consider = [&](const std::string& id, std::string_view prefix) {
    if (!id.starts_with(prefix)) return;
    int v = 0;
    auto tail = std::string_view(id).substr(prefix.size());
    auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), v);
    if (ec == std::errc() && p == tail.data() + tail.size()) best = std::max(best, v);
  };
  for (const auto& s : deck.slides) {
    if (prefix_kind == 's') consider(s.slide_id, "s");
    for (const auto& st : s.steps) {
      if (prefix_kind == 't') consider(st.step_id, "st");
      if (prefix_kind == 'q')
        if (const auto* q = st.question()) consider(q->question_id, "q");
    }
  }
  return best + 1;
}

Slide& find_slide(Deck& deck, const std::string& slide_id) {
  for (auto& s : deck.slides)
    if (s.slide_id == slide_id) return s;
  throw Error(ErrorCode::UnknownSlide, "unknown slide '" + slide_id + "'", slide_id);
}

std::vector<Step>::iterator find_step(Slide& slide, const std::string& step_id) {
  auto it = std::find_if(slide.steps.begin(), slide.steps.end(), [&](const Step& s) { return s.step_id == step_id; });
  if (it == slide.steps.end())
    throw Error(ErrorCode::UnknownStep, "slide " + slide.slide_id + " has no step '" + step_id + "'", step_id);
  return it;
}

Step default_step(std::string step_id, TransitionEffect effect) {
  TransitionSpec t;
  t.effect = effect;
  if (effect == TransitionEffect::Highlight) t.params = Json{{"dim_opacity", 0.2}};
  return Step{std::move(step_id), t};
}

template <typename E, std::size_t N>
E enum_from_json(const Json& j, const std::string& pointer, const std::array<E, N>& values, const char* what) {
  std::string name = json_util::expect_string(j, pointer);
  for (E v : values)
    if (to_string(v) == name) return v;
  json_util::schema_error(pointer, std::string("unknown ") + what + " '" + name + "'");
}

Json targets_to_json(const TargetSet& t) { return t.all ? Json("all") : Json(t.ids); }

}  // namespace

std::string_view to_string(TransitionEffect e) {
  switch (e) {
    case TransitionEffect::FadeIn: return "fade_in";
    case TransitionEffect::FadeOut: return "fade_out";
    case TransitionEffect::Grow: return "grow";
    case TransitionEffect::ChangeSize: return "change_size";
    case TransitionEffect::AddColor: return "add_color";
    case TransitionEffect::Morph: return "morph";
    case TransitionEffect::Highlight: return "highlight";
  }
  return "fade_in";
}

std::string_view display_name(TransitionEffect e) {
  switch (e) {
    case TransitionEffect::FadeIn: return "Fade-in";
    case TransitionEffect::FadeOut: return "Fade-out";
    case TransitionEffect::Grow: return "Growing";
    case TransitionEffect::ChangeSize: return "Changing size";
    case TransitionEffect::AddColor: return "Add-color";
    case TransitionEffect::Morph: return "Morphing";
    case TransitionEffect::Highlight: return "Highlight";
  }
  return "Fade-in";
}

std::string_view to_string(AnnotationForm f) {
  switch (f) {
    case AnnotationForm::ColorLegend: return "color_legend";
    case AnnotationForm::Circle: return "circle";
    case AnnotationForm::ArrowLine: return "arrow_line";
    case AnnotationForm::DoubleArrowLine: return "double_arrow_line";
    case AnnotationForm::FreeformLine: return "freeform_line";
    case AnnotationForm::Text: return "text";
  }
  return "text";
}

std::string_view to_string(QuestionMode m) {
  return m == QuestionMode::SingleChoice ? "single_choice" : "multiple_choice";
}

bool is_symbol_annotation(AnnotationForm f) { return f != AnnotationForm::Text; }

bool QuestionSpec::is_correct(std::vector<int> selected) const {
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  return selected == correct;
}

std::string_view Step::kind() const {
  if (transition()) return "transition";
  if (annotation()) return "annotation";
  return "question";
}

const VisualUnit* Deck::unit(const std::string& unit_id) const {
  for (const auto& u : units)
    if (u.unit_id == unit_id) return &u;
  return nullptr;
}

const Slide* Deck::slide(const std::string& slide_id) const {
  for (const auto& s : slides)
    if (s.slide_id == slide_id) return &s;
  return nullptr;
}

void validate_deck(const Deck& deck) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < deck.sequence.order.size(); ++i)
    if (!position.emplace(deck.sequence.order[i], i).second)
      violation(join_pointer("/sequence/order", i), "unit " + deck.sequence.order[i] + " appears twice");
  if (deck.units.size() != position.size()) violation("/units", "units must list exactly the sequenced units");
  for (std::size_t i = 0; i < deck.units.size(); ++i)
    if (!position.contains(deck.units[i].unit_id))
      violation(join_pointer("/units", i), "unit " + deck.units[i].unit_id + " is not in the sequence");

  std::set<std::string> slide_ids, step_ids, question_ids;
  std::size_t last_position = 0;
  for (std::size_t i = 0; i < deck.slides.size(); ++i) {
    const Slide& s = deck.slides[i];
    const std::string at = slide_pointer(i);
    if (s.slide_id.empty() || !slide_ids.insert(s.slide_id).second)
      violation(join_pointer(at, "slide_id"), "slide id '" + s.slide_id + "' is empty or repeated");
    auto pos = position.find(s.unit_id);
    if (pos == position.end()) violation(join_pointer(at, "unit_id"), "unit " + s.unit_id + " is not in the sequence");
    if (pos->second < last_position)
      violation(join_pointer(at, "unit_id"), "slide " + s.slide_id + " breaks the sequence order");
    last_position = pos->second;
    std::set<Channel> tags(s.channel_tags.begin(), s.channel_tags.end());
    if (tags.size() != s.channel_tags.size()) violation(join_pointer(at, "channel_tags"), "repeated channel tag");
    if (s.steps.empty()) violation(join_pointer(at, "steps"), "slide " + s.slide_id + " has no steps");
    const VisualUnit& unit = *deck.unit(s.unit_id);
    for (std::size_t j = 0; j < s.steps.size(); ++j) {
      const std::string sp = step_pointer(i, j);
      if (!step_ids.insert(s.steps[j].step_id).second)
        violation(join_pointer(sp, "step_id"), "step id '" + s.steps[j].step_id + "' is repeated");
      if (const auto* q = s.steps[j].question())
        if (!question_ids.insert(q->question_id).second)
          violation(join_pointer(sp, "question_id"), "question id '" + q->question_id + "' is repeated");
      validate_step(s.steps[j], unit, sp);
    }
  }
}

Deck assemble_deck(const NarrativeSequence& sequence, const std::vector<ChannelPlan>& plans,
                   const std::vector<VisualUnit>& units, const AssembleOptions& options) {
  Deck deck;
  deck.deck_id = options.deck_id;
  deck.title = options.title;
  deck.sequence = sequence;
  deck.overview_slide = options.overview_slide;
  deck.svg_doc_ref = options.svg_doc_ref;
  int slide_n = 0, step_n = 0;
  for (const auto& unit_id : sequence.order) {
    auto unit = std::find_if(units.begin(), units.end(), [&](const VisualUnit& u) { return u.unit_id == unit_id; });
    if (unit == units.end()) throw Error(ErrorCode::UnknownUnit, "no membership for unit " + unit_id, unit_id);
    auto plan = std::find_if(plans.begin(), plans.end(), [&](const ChannelPlan& p) { return p.unit_id == unit_id; });
    if (plan == plans.end()) throw Error(ErrorCode::MissingPlan, "no channel plan for unit " + unit_id, unit_id);
    deck.units.push_back(*unit);

    Slide entrance{"s" + std::to_string(++slide_n), unit_id, {}, {}, "", false};
    entrance.steps.push_back(default_step("st" + std::to_string(++step_n), TransitionEffect::FadeIn));
    deck.slides.push_back(std::move(entrance));
    std::vector<Channel> order = plan->enabled_order();
    if (std::find(order.begin(), order.end(), Channel::Position) == order.end())
      order.insert(order.begin(), Channel::Position);
    for (Channel c : order) {
      Slide s{"s" + std::to_string(++slide_n), unit_id, {c}, {}, "", false};
      s.steps.push_back(default_step("st" + std::to_string(++step_n), TransitionEffect::Highlight));
      deck.slides.push_back(std::move(s));
    }
  }
  validate_deck(deck);
  return deck;
}

Deck edit_slide(const Deck& deck, const std::string& slide_id, const SlideEdit& edit) {
  Deck out = deck;
  Slide& slide = find_slide(out, slide_id);
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, slide_edit::AddStep>) {
          Step step = e.step;
          if (step.step_id.empty()) step.step_id = "st" + std::to_string(next_number(out, 't'));
          if (auto* q = std::get_if<QuestionSpec>(&step.payload); q && q->question_id.empty())
            q->question_id = "q" + std::to_string(next_number(out, 'q'));
          std::size_t pos = e.position.value_or(slide.steps.size());
          if (pos > slide.steps.size())
            throw Error(ErrorCode::OutOfRange, "step position " + std::to_string(pos) + " past the end of the slide");
          slide.steps.insert(slide.steps.begin() + static_cast<long>(pos), std::move(step));
        } else if constexpr (std::is_same_v<T, slide_edit::RemoveStep>) {
          slide.steps.erase(find_step(slide, e.step_id));
        } else if constexpr (std::is_same_v<T, slide_edit::ReorderSteps>) {
          if (e.step_ids.size() != slide.steps.size())
            throw Error(ErrorCode::InvalidPermutation, "reorder must list every step of the slide exactly once");
          std::vector<Step> reordered;
          std::set<std::string> used;
          for (const auto& id : e.step_ids) {
            if (!used.insert(id).second)
              throw Error(ErrorCode::InvalidPermutation, "step '" + id + "' listed twice", id);
            reordered.push_back(*find_step(slide, id));
          }
          slide.steps = std::move(reordered);
        } else if constexpr (std::is_same_v<T, slide_edit::SetNotes>) {
          slide.notes = e.notes;
        } else if constexpr (std::is_same_v<T, slide_edit::RetargetStep>) {
          auto it = find_step(slide, e.step_id);
          auto* t = std::get_if<TransitionSpec>(&it->payload);
          if (!t) throw Error(ErrorCode::InvariantViolation, "only transitions have targets", e.step_id);
          t->targets = e.targets;
        } else if constexpr (std::is_same_v<T, slide_edit::ReplaceStep>) {
          *find_step(slide, e.step.step_id) = e.step;
        } else if constexpr (std::is_same_v<T, slide_edit::SetChannelTags>) {
          slide.channel_tags = e.channel_tags;
        }
      },
      edit);
  validate_deck(out);
  return out;
}

Deck move_slide(const Deck& deck, const std::string& slide_id, std::size_t new_index) {
  Deck out = deck;
  find_slide(out, slide_id);
  if (new_index >= out.slides.size())
    throw Error(ErrorCode::OutOfRange, "slide index " + std::to_string(new_index) + " past the end of the deck");
  auto it = std::find_if(out.slides.begin(), out.slides.end(), [&](const Slide& s) { return s.slide_id == slide_id; });
  Slide moved = std::move(*it);
  out.slides.erase(it);
  out.slides.insert(out.slides.begin() + static_cast<long>(new_index), std::move(moved));
  validate_deck(out);
  return out;
}

Deck add_slide(const Deck& deck, const std::string& unit_id, std::vector<Channel> channel_tags,
               std::vector<Step> steps) {
  Deck out = deck;
  if (!out.unit(unit_id)) throw Error(ErrorCode::UnknownUnit, "unknown unit '" + unit_id + "'", unit_id);
  int step_n = next_number(out, 't');
  int question_n = next_number(out, 'q');
  for (auto& st : steps) {
    if (st.step_id.empty()) st.step_id = "st" + std::to_string(step_n++);
    if (auto* q = std::get_if<QuestionSpec>(&st.payload); q && q->question_id.empty())
      q->question_id = "q" + std::to_string(question_n++);
  }
  auto unit_pos = std::find(out.sequence.order.begin(), out.sequence.order.end(), unit_id);
  auto insert_at = out.slides.end();
  for (auto it = out.slides.begin(); it != out.slides.end(); ++it) {
    auto p = std::find(out.sequence.order.begin(), out.sequence.order.end(), it->unit_id);
    if (p > unit_pos) {
      insert_at = it;
      break;
    }
  }
  Slide s{"s" + std::to_string(next_number(out, 's')), unit_id, std::move(channel_tags), std::move(steps), "", false};
  out.slides.insert(insert_at, std::move(s));
  validate_deck(out);
  return out;
}

Deck remove_slide(const Deck& deck, const std::string& slide_id) {
  Deck out = deck;
  find_slide(out, slide_id);
  std::erase_if(out.slides, [&](const Slide& s) { return s.slide_id == slide_id; });
  validate_deck(out);
  return out;
}

Deck flag_orphans(const Deck& deck, const std::vector<ChannelPlan>& plans) {
  Deck out = deck;
  for (auto& s : out.slides) {
    auto plan = std::find_if(plans.begin(), plans.end(), [&](const ChannelPlan& p) { return p.unit_id == s.unit_id; });
    s.orphaned = std::any_of(s.channel_tags.begin(), s.channel_tags.end(), [&](Channel c) {
      return plan == plans.end() || !plan->is_enabled(c);
    });
  }
  return out;
}

// ---- JSON ----

Json to_json(const Step& step) {
  Json j{{"step_id", step.step_id}, {"kind", step.kind()}};
  if (const auto* t = step.transition()) {
    j["effect"] = to_string(t->effect);
    j["targets"] = targets_to_json(t->targets);
    j["duration_ms"] = t->duration_ms;
    j["params"] = t->params;
  } else if (const auto* a = step.annotation()) {
    j["form"] = to_string(a->form);
    Json pts = Json::array();
    for (const auto& p : a->geometry) pts.push_back(Json::array({p.x, p.y}));
    j["geometry"] = std::move(pts);
    j["content"] = a->content;
    j["style"] = a->style;
  } else if (const auto* q = step.question()) {
    j["question_id"] = q->question_id;
    j["mode"] = to_string(q->mode);
    j["prompt"] = q->prompt;
    j["options"] = q->options;
    j["correct"] = q->correct;
  }
  return j;
}

Json to_json(const Deck& deck) {
  Json units = Json::array();
  for (const auto& u : deck.units) units.push_back(to_json(u));
  Json slides = Json::array();
  for (const auto& s : deck.slides) {
    Json tags = Json::array();
    for (Channel c : s.channel_tags) tags.push_back(to_string(c));
    Json steps = Json::array();
    for (const auto& st : s.steps) steps.push_back(to_json(st));
    slides.push_back({{"slide_id", s.slide_id},
                      {"unit_id", s.unit_id},
                      {"channel_tags", std::move(tags)},
                      {"notes", s.notes},
                      {"orphaned", s.orphaned},
                      {"steps", std::move(steps)}});
  }
  return Json{{"format_version", kDeckFormatVersion},
              {"deck_id", deck.deck_id},
              {"title", deck.title},
              {"svg_doc_ref", deck.svg_doc_ref},
              {"overview_slide", deck.overview_slide},
              {"sequence", to_json(deck.sequence)},
              {"units", std::move(units)},
              {"slides", std::move(slides)}};
}

std::string serialize_deck(const Deck& deck) { return to_json(deck).dump(2) + "\n"; }

TargetSet targets_from_json(const Json& j, const std::string& pointer) {
  if (j.is_string()) {
    if (j.get<std::string>() != "all") json_util::schema_error(pointer, "targets must be \"all\" or a list of ids");
    return TargetSet::everything();
  }
  const Json& arr = json_util::expect_array(j, pointer);
  TargetSet t;
  for (std::size_t i = 0; i < arr.size(); ++i) t.ids.push_back(json_util::expect_string(arr[i], join_pointer(pointer, i)));
  return t;
}

Step step_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  Step step;
  step.step_id = r.string("step_id");
  std::string kind = r.string("kind");
  if (kind == "transition") {
    TransitionSpec t;
    t.effect = enum_from_json(r.required("effect"), r.at("effect"), kEffects, "effect");
    if (const Json* tj = r.optional("targets")) t.targets = targets_from_json(*tj, r.at("targets"));
    if (r.optional("duration_ms")) {
      auto d = r.integer("duration_ms");
      if (d <= 0 || d > 3'600'000) json_util::schema_error(r.at("duration_ms"), "duration_ms must be in (0, 3600000]");
      t.duration_ms = static_cast<int>(d);
    }
    if (const Json* p = r.optional("params")) {
      if (!p->is_object()) json_util::schema_error(r.at("params"), "params must be an object");
      t.params = *p;
    }
    step.payload = std::move(t);
  } else if (kind == "annotation") {
    AnnotationSpec a;
    a.form = enum_from_json(r.required("form"), r.at("form"), kForms, "annotation form");
    const Json& g = json_util::expect_array(r.required("geometry"), r.at("geometry"));
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::string gp = join_pointer(r.at("geometry"), i);
      const Json& pt = json_util::expect_array(g[i], gp);
      if (pt.size() != 2) json_util::schema_error(gp, "a point is [x, y]");
      a.geometry.push_back({json_util::expect_number(pt[0], join_pointer(gp, 0)),
                            json_util::expect_number(pt[1], join_pointer(gp, 1))});
    }
    if (r.optional("content")) a.content = r.string("content");
    if (const Json* s = r.optional("style")) {
      if (!s->is_object()) json_util::schema_error(r.at("style"), "style must be an object");
      for (auto it = s->begin(); it != s->end(); ++it)
        a.style[it.key()] = json_util::expect_string(it.value(), join_pointer(r.at("style"), it.key()));
    }
    step.payload = std::move(a);
  } else if (kind == "question") {
    QuestionSpec q;
    q.question_id = r.string("question_id");
    std::string mode = r.string("mode");
    if (mode == "single_choice")
      q.mode = QuestionMode::SingleChoice;
    else if (mode == "multiple_choice")
      q.mode = QuestionMode::MultipleChoice;
    else
      json_util::schema_error(r.at("mode"), "unknown question mode '" + mode + "'");
    q.prompt = r.string("prompt");
    const Json& opts = json_util::expect_array(r.required("options"), r.at("options"));
    for (std::size_t i = 0; i < opts.size(); ++i)
      q.options.push_back(json_util::expect_string(opts[i], join_pointer(r.at("options"), i)));
    const Json& corr = json_util::expect_array(r.required("correct"), r.at("correct"));
    for (std::size_t i = 0; i < corr.size(); ++i)
      q.correct.push_back(static_cast<int>(json_util::expect_integer(corr[i], join_pointer(r.at("correct"), i))));
    step.payload = std::move(q);
  } else {
    json_util::schema_error(r.at("kind"), "unknown step kind '" + kind + "'");
  }
  r.finish();
  return step;
}

Deck deck_from_json(const Json& j) {
  json_util::ObjectReader r(j, "");
  if (r.integer("format_version") != kDeckFormatVersion)
    json_util::schema_error(r.at("format_version"), "unsupported format_version");
  Deck deck;
  deck.deck_id = r.string("deck_id");
  deck.title = r.string("title");
  deck.svg_doc_ref = r.string("svg_doc_ref");
  deck.overview_slide = r.boolean("overview_slide");
  deck.sequence = sequence_from_json(r.required("sequence"), r.at("sequence"));
  const Json& units = json_util::expect_array(r.required("units"), r.at("units"));
  for (std::size_t i = 0; i < units.size(); ++i) deck.units.push_back(unit_from_json(units[i], join_pointer(r.at("units"), i)));
  const Json& slides = json_util::expect_array(r.required("slides"), r.at("slides"));
  for (std::size_t i = 0; i < slides.size(); ++i) {
    json_util::ObjectReader sr(slides[i], join_pointer(r.at("slides"), i));
    Slide s;
    s.slide_id = sr.string("slide_id");
    s.unit_id = sr.string("unit_id");
    const Json& tags = json_util::expect_array(sr.required("channel_tags"), sr.at("channel_tags"));
    for (std::size_t k = 0; k < tags.size(); ++k)
      s.channel_tags.push_back(channel_from_json(tags[k], join_pointer(sr.at("channel_tags"), k)));
    if (sr.optional("notes")) s.notes = sr.string("notes");
    if (sr.optional("orphaned")) s.orphaned = sr.boolean("orphaned");
    const Json& steps = json_util::expect_array(sr.required("steps"), sr.at("steps"));
    for (std::size_t k = 0; k < steps.size(); ++k)
      s.steps.push_back(step_from_json(steps[k], join_pointer(sr.at("steps"), k)));
    sr.finish();
    deck.slides.push_back(std::move(s));
  }
  r.finish();
  return deck;
}

Deck parse_deck(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("deck is not valid JSON: ") + e.what(), "");
  }
  Deck deck = deck_from_json(j);
  validate_deck(deck);
  return deck;
}

SlideEdit slide_edit_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  std::string op = r.string("op");
  auto string_list = [&](const char* key) {
    std::vector<std::string> out;
    const Json& arr = json_util::expect_array(r.required(key), r.at(key));
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(json_util::expect_string(arr[i], join_pointer(r.at(key), i)));
    return out;
  };
  SlideEdit edit;
  if (op == "add_step") {
    slide_edit::AddStep e;
    Json step = r.required("step");
    if (step.is_object() && !step.contains("step_id")) step["step_id"] = "";
    if (step.is_object() && step.value("kind", "") == "question" && !step.contains("question_id"))
      step["question_id"] = "";
    e.step = step_from_json(step, r.at("step"));
    if (r.optional("position")) {
      auto p = r.integer("position");
      if (p < 0) json_util::schema_error(r.at("position"), "position must be nonnegative");
      e.position = static_cast<std::size_t>(p);
    }
    edit = std::move(e);
  } else if (op == "remove_step") {
    edit = slide_edit::RemoveStep{r.string("step_id")};
  } else if (op == "reorder_steps") {
    edit = slide_edit::ReorderSteps{string_list("step_ids")};
  } else if (op == "set_notes") {
    edit = slide_edit::SetNotes{r.string("notes")};
  } else if (op == "retarget_step") {
    std::string id = r.string("step_id");
    edit = slide_edit::RetargetStep{id, targets_from_json(r.required("targets"), r.at("targets"))};
  } else if (op == "replace_step") {
    edit = slide_edit::ReplaceStep{step_from_json(r.required("step"), r.at("step"))};
  } else if (op == "set_channel_tags") {
    slide_edit::SetChannelTags e;
    const Json& arr = json_util::expect_array(r.required("channel_tags"), r.at("channel_tags"));
    for (std::size_t i = 0; i < arr.size(); ++i)
      e.channel_tags.push_back(channel_from_json(arr[i], join_pointer(r.at("channel_tags"), i)));
    edit = std::move(e);
  } else {
    json_util::schema_error(r.at("op"), "unknown slide edit '" + op + "'");
  }
  r.finish();
  return edit;
}

// ---- statistics ----

DeckReport deck_stats(const Deck& deck) {
  DeckReport report;
  for (const auto& s : deck.slides) {
    SlideStatsRow row{s.slide_id, s.unit_id, {}, 0, 0, 0, 0};
    for (const auto& st : s.steps) {
      if (const auto* t = st.transition()) {
        ++row.transitions;
        if (std::find(row.transition_types.begin(), row.transition_types.end(), t->effect) == row.transition_types.end())
          row.transition_types.push_back(t->effect);
      } else if (const auto* a = st.annotation()) {
        ++(is_symbol_annotation(a->form) ? row.symbol_annotations : row.text_annotations);
      } else {
        ++row.questions;
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

Json to_json(const DeckReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json types = Json::array();
    for (auto e : r.transition_types) types.push_back(to_string(e));
    rows.push_back({{"slide_id", r.slide_id},
                    {"unit_id", r.unit_id},
                    {"transition_types", std::move(types)},
                    {"transitions", r.transitions},
                    {"symbol_annotations", r.symbol_annotations},
                    {"text_annotations", r.text_annotations},
                    {"questions", r.questions}});
  }
  return Json{{"slides", std::move(rows)}};
}

std::string format_report_table(const DeckReport& report) {
  std::vector<std::string> labels = {"", "Types of animated transitions", "Number of animated transitions",
                                     "Number of symbol-based annotations", "Number of text-based annotations"};
  std::vector<std::vector<std::string>> columns;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    std::string types;
    for (auto e : r.transition_types) types += (types.empty() ? "" : ", ") + std::string(display_name(e));
    columns.push_back({"Slide " + std::to_string(i + 1) + " (" + r.slide_id + ")", types.empty() ? "N/A" : types,
                       std::to_string(r.transitions), std::to_string(r.symbol_annotations),
                       std::to_string(r.text_annotations)});
  }
  std::size_t label_w = 0;
  for (const auto& l : labels) label_w = std::max(label_w, l.size());
  std::vector<std::size_t> widths;
  for (const auto& c : columns) {
    std::size_t w = 0;
    for (const auto& cell : c) w = std::max(w, cell.size());
    widths.push_back(w);
  }
  std::ostringstream out;
  for (std::size_t row = 0; row < labels.size(); ++row) {
    std::string line = labels[row] + std::string(label_w - labels[row].size(), ' ');
    for (std::size_t c = 0; c < columns.size(); ++c)
      line += " | " + columns[c][row] + std::string(widths[c] - columns[c][row].size(), ' ');
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

}  // namespace narvis
