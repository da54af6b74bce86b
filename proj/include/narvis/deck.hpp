#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "narvis/channels.hpp"
#include "narvis/component_tree.hpp"
#include "narvis/geometry.hpp"
#include "narvis/json_util.hpp"
#include "narvis/narrative.hpp"

namespace narvis {

enum class TransitionEffect { FadeIn, FadeOut, Grow, ChangeSize, AddColor, Morph, Highlight };
enum class AnnotationForm { ColorLegend, Circle, ArrowLine, DoubleArrowLine, FreeformLine, Text };
enum class QuestionMode { SingleChoice, MultipleChoice };

std::string_view to_string(TransitionEffect e);
std::string_view display_name(TransitionEffect e);
std::string_view to_string(AnnotationForm f);
std::string_view to_string(QuestionMode m);
bool is_symbol_annotation(AnnotationForm f);

/// Either every primitive of the slide's unit, or an explicit nonempty subset.
struct TargetSet {
  bool all = false;
  std::vector<std::string> ids;

  static TargetSet everything() { return {true, {}}; }
  std::vector<std::string> resolve(const VisualUnit& unit) const { return all ? unit.primitive_ids : ids; }
  bool operator==(const TargetSet&) const = default;
};

inline constexpr int kDefaultDurationMs = 800;

struct TransitionSpec {
  TransitionEffect effect = TransitionEffect::FadeIn;
  TargetSet targets = TargetSet::everything();
  int duration_ms = kDefaultDurationMs;
  /// highlight: dim_opacity; change_size: scale; add_color: colors {id: color};
  /// morph: target {id: geometry}, resample (bool).
  Json params = Json::object();
  bool operator==(const TransitionSpec&) const = default;
};

struct AnnotationSpec {
  AnnotationForm form = AnnotationForm::Text;
  std::vector<Point> geometry;  // SVG user units
  std::string content;
  std::map<std::string, std::string> style;
  bool operator==(const AnnotationSpec&) const = default;
};

struct QuestionSpec {
  std::string question_id;
  QuestionMode mode = QuestionMode::SingleChoice;
  std::string prompt;
  std::vector<std::string> options;
  std::vector<int> correct;  // ascending, unique

  /// Exact set match.
  bool is_correct(std::vector<int> selected) const;
  bool operator==(const QuestionSpec&) const = default;
};

using StepPayload = std::variant<TransitionSpec, AnnotationSpec, QuestionSpec>;

struct Step {
  std::string step_id;
  StepPayload payload;

  const TransitionSpec* transition() const { return std::get_if<TransitionSpec>(&payload); }
  const AnnotationSpec* annotation() const { return std::get_if<AnnotationSpec>(&payload); }
  const QuestionSpec* question() const { return std::get_if<QuestionSpec>(&payload); }
  std::string_view kind() const;
  bool operator==(const Step&) const = default;
};

struct Slide {
  std::string slide_id;
  std::string unit_id;
  std::vector<Channel> channel_tags;
  std::vector<Step> steps;
  std::string notes;
  bool orphaned = false;  // a channel tag is no longer enabled in the unit's plan
  bool operator==(const Slide&) const = default;
};

inline constexpr int kDeckFormatVersion = 1;

struct Deck {
  std::string deck_id;
  std::string title;
  NarrativeSequence sequence;
  bool overview_slide = true;
  std::vector<Slide> slides;
  std::string svg_doc_ref;
  /// Membership of every unit in `sequence`; targets are checked against it.
  std::vector<VisualUnit> units;

  const VisualUnit* unit(const std::string& unit_id) const;
  const Slide* slide(const std::string& slide_id) const;
  bool operator==(const Deck&) const = default;
};

/// Throws InvariantViolation / TargetOutsideUnit with a JSON pointer.
void validate_deck(const Deck& deck);

struct AssembleOptions {
  std::string deck_id = "deck";
  std::string title = "Untitled";
  std::string svg_doc_ref;
  bool overview_slide = true;
};

/// Skeleton deck: per unit an entrance slide (fade_in of all primitives) and
/// one slide per enabled channel in plan order (highlight of the unit).
Deck assemble_deck(const NarrativeSequence& sequence, const std::vector<ChannelPlan>& plans,
                   const std::vector<VisualUnit>& units, const AssembleOptions& options = {});

namespace slide_edit {
struct AddStep {
  Step step;  // empty step_id / question_id are allocated
  std::optional<std::size_t> position;
};
struct RemoveStep {
  std::string step_id;
};
struct ReorderSteps {
  std::vector<std::string> step_ids;
};
struct SetNotes {
  std::string notes;
};
struct RetargetStep {
  std::string step_id;
  TargetSet targets;
};
struct ReplaceStep {
  Step step;
};
struct SetChannelTags {
  std::vector<Channel> channel_tags;
};
}  // namespace slide_edit

using SlideEdit = std::variant<slide_edit::AddStep, slide_edit::RemoveStep, slide_edit::ReorderSteps,
                               slide_edit::SetNotes, slide_edit::RetargetStep, slide_edit::ReplaceStep,
                               slide_edit::SetChannelTags>;

Deck edit_slide(const Deck& deck, const std::string& slide_id, const SlideEdit& edit);
Deck move_slide(const Deck& deck, const std::string& slide_id, std::size_t new_index);
Deck add_slide(const Deck& deck, const std::string& unit_id, std::vector<Channel> channel_tags, std::vector<Step> steps);
Deck remove_slide(const Deck& deck, const std::string& slide_id);

/// Sets `orphaned` on every slide whose channel tags are not all enabled in
/// the unit's plan.
Deck flag_orphans(const Deck& deck, const std::vector<ChannelPlan>& plans);

std::string serialize_deck(const Deck& deck);
/// Strict: unknown fields and closed-enum violations raise SchemaViolation
/// with a JSON pointer; the parsed deck is then validated.
Deck parse_deck(std::string_view text);
Json to_json(const Deck& deck);
Deck deck_from_json(const Json& j);
Json to_json(const Step& step);
Step step_from_json(const Json& j, const std::string& pointer);
TargetSet targets_from_json(const Json& j, const std::string& pointer);
SlideEdit slide_edit_from_json(const Json& j, const std::string& pointer = "");

struct SlideStatsRow {
  std::string slide_id;
  std::string unit_id;
  std::vector<TransitionEffect> transition_types;  // first-use order
  int transitions = 0;
  int symbol_annotations = 0;
  int text_annotations = 0;
  int questions = 0;
  bool operator==(const SlideStatsRow&) const = default;
};

struct DeckReport {
  std::vector<SlideStatsRow> rows;
};

DeckReport deck_stats(const Deck& deck);
Json to_json(const DeckReport& report);
/// Plain-text table: one column per slide, one row per count family.
std::string format_report_table(const DeckReport& report);

}  // namespace narvis
