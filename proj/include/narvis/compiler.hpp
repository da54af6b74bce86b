#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "narvis/deck.hpp"
#include "narvis/svg.hpp"

namespace narvis {

inline constexpr const char* kNeutralGray = "#BBBBBBFF";

/// Recognized theme keys: easing (string, default "ease-in-out"),
/// prior_opacity (number, 0.35), morph_resampling (bool, true),
/// resample_points (integer >= 8, 64), accent (CSS color, "#D9480F").
struct CompileOptions {
  std::optional<std::string> beacon_url;
  std::optional<std::string> student_token;
  bool embed_fonts = false;
  Json theme = Json::object();
};

struct CompiledSlideshow {
  std::string html;
  int slide_count = 0;
  /// {deck_id, slides: [{slide_id, unit_id, steps: [{step_id, kind, question_id?}]}], state_count}
  Json manifest;
};

/// Presentation of one primitive wrapper in a navigable state.
struct PrimState {
  double opacity = 0;
  double scale = 1;
  std::optional<std::string> fill;  // overrides the element's own fill
  std::optional<std::string> morph_step;  // step whose target geometry is shown
  bool operator==(const PrimState&) const = default;
};

/// State (slide_index, steps_done): slide_index counts the overview slide.
struct SceneState {
  std::size_t slide_index = 0;
  std::size_t steps_done = 0;
  std::map<std::string, PrimState> prims;
  std::vector<std::string> annotations;  // step ids of visible annotations
  std::vector<std::string> questions;    // question ids whose form is shown
  bool operator==(const SceneState&) const = default;
};

/// Every navigable state in navigation order; there are (steps + slides) of
/// them. `primitive_ids` lists every primitive of the document, so that
/// primitives outside any unit stay hidden.
std::vector<SceneState> playback_states(const Deck& deck, const std::vector<std::string>& primitive_ids,
                                        const Json& theme = Json::object());

struct EffectContext {
  const std::map<std::string, VisualPrimitive>* primitives = nullptr;
  const std::map<std::string, const SceneNode*>* nodes = nullptr;
  const VisualUnit* unit = nullptr;
  bool morph_resampling = true;
  int resample_points = 64;
  std::string step_id;
};

/// Animation description of one transition step. `from` and `to` map each
/// target id to style values; `morph` carries per-target interpolation data
/// {mode: attrs|path|points, ...}.
struct EffectFragment {
  TransitionEffect effect = TransitionEffect::FadeIn;
  std::vector<std::string> targets;
  int duration_ms = kDefaultDurationMs;
  Json from = Json::object();
  Json to = Json::object();
  Json morph = Json::object();
  std::optional<double> dim_opacity;  // highlight only
};

/// Throws MorphIncompatible and DanglingPrimitiveRef.
EffectFragment render_effect(const TransitionSpec& spec, const EffectContext& ctx);
Json to_json(const EffectFragment& f);

/// Throws DanglingPrimitiveRef, MorphIncompatible, InvariantViolation.
CompiledSlideshow compile(const Deck& deck, const SvgDocument& doc, const CompileOptions& opts = {});

/// Outline of a shape element in its local coordinates, or nullopt for
/// elements without a polygonal outline.
std::optional<std::vector<Point>> shape_outline(const std::string& element, const std::map<std::string, std::string>& attrs);

}  // namespace narvis
