#include "narvis/deck.hpp"
#include "random_deck.hpp"
#include "support.hpp"

using namespace narvis;
using narvis::test::error_of;
using narvis::test::fixture;
using narvis::test::slurp;
using narvis::test::make_unit;
using narvis::test::random_deck;
using narvis::test::transition;
using narvis::test::annotation;

namespace {

ChannelPlan make_plan(const std::string& unit, std::vector<Channel> enabled) {
  ChannelPlan p{unit, {}};
  int rank = 1;
  for (auto c : enabled) p.channels.push_back({.channel = c, .distinct_values = 2, .salience_rank = rank++});
  return p;
}

Deck two_unit_skeleton() {
  auto bars = make_unit("bars", 5, "b");
  auto flows = make_unit("flows", 3, "f");
  NarrativeSequence seq{{"bars", "flows"}, SequenceProvenance::Suggested};
  return assemble_deck(seq,
                       {make_plan("bars", {Channel::Position, Channel::Size}), make_plan("flows", {Channel::Position})},
                       {bars, flows});
}

}  // namespace

TEST_SUITE("deck-model") {
  TEST_CASE("assembly counting rule") {
    Deck d = two_unit_skeleton();
    // 1 overview + 2 entrance + 3 channel slides
    CHECK(d.overview_slide);
    CHECK(d.slides.size() + (d.overview_slide ? 1 : 0) == 6);
    CHECK(d.slides[0].steps[0].transition()->effect == TransitionEffect::FadeIn);
    CHECK(d.slides[0].steps[0].transition()->targets.all);
    validate_deck(d);
  }

  TEST_CASE("unit without enabled non-position channels gets entrance and position slides") {
    auto u = make_unit("only", 4, "p");
    Deck d = assemble_deck({{"only"}, SequenceProvenance::Suggested}, {make_plan("only", {})}, {u});
    REQUIRE(d.slides.size() == 2);
    CHECK(d.slides[1].channel_tags == std::vector<Channel>{Channel::Position});
  }

  TEST_CASE("all bars slides precede all flows slides") {
    Deck d = two_unit_skeleton();
    bool seen_flows = false;
    for (const auto& s : d.slides) {
      if (s.unit_id == "flows") seen_flows = true;
      if (seen_flows) CHECK(s.unit_id == "flows");
    }
    CHECK(error_of([&] { move_slide(d, d.slides.back().slide_id, 0); }) == ErrorCode::InvariantViolation);
  }

  TEST_CASE("assembly preconditions") {
    auto u = make_unit("a", 2, "p");
    CHECK(error_of([&] { assemble_deck({{"a"}, SequenceProvenance::Suggested}, {}, {u}); }) == ErrorCode::MissingPlan);
    CHECK(error_of([&] { assemble_deck({{"b"}, SequenceProvenance::Suggested}, {make_plan("b", {})}, {u}); }) ==
          ErrorCode::UnknownUnit);
  }

  TEST_CASE("slide edits") {
    auto big = make_unit("big", 40, "p");
    auto other = make_unit("other", 2, "o");
    Deck d = assemble_deck({{"big", "other"}, SequenceProvenance::Suggested},
                           {make_plan("big", {Channel::Position}), make_plan("other", {Channel::Position})},
                           {big, other});
    const std::string sid = d.slides[1].slide_id;
    Deck e = edit_slide(d, sid,
                        slide_edit::AddStep{transition("", TransitionEffect::Highlight, {false, {"p1", "p2", "p3"}}), {}});
    const auto& steps = e.slide(sid)->steps;
    REQUIRE(steps.size() == 2);
    CHECK(steps[1].transition()->targets.ids.size() == 3);
    CHECK_FALSE(steps[1].step_id.empty());

    CHECK(error_of([&] {
            edit_slide(e, sid, slide_edit::RetargetStep{steps[1].step_id, {false, {"o0"}}});
          }) == ErrorCode::TargetOutsideUnit);

    QuestionSpec q{"", QuestionMode::SingleChoice, "which?", {"a", "b", "c"}, {0, 1}};
    CHECK(error_of([&] { edit_slide(e, sid, slide_edit::AddStep{{"", q}, {}}); }) == ErrorCode::InvariantViolation);
    q.correct = {1};
    Deck withq = edit_slide(e, sid, slide_edit::AddStep{{"", q}, 0});
    CHECK(withq.slide(sid)->steps[0].question());
    CHECK_FALSE(withq.slide(sid)->steps[0].question()->question_id.empty());

    auto ids = std::vector<std::string>{withq.slide(sid)->steps[2].step_id, withq.slide(sid)->steps[1].step_id,
                                        withq.slide(sid)->steps[0].step_id};
    Deck reordered = edit_slide(withq, sid, slide_edit::ReorderSteps{ids});
    CHECK(reordered.slide(sid)->steps[0].step_id == ids[0]);
    CHECK(error_of([&] { edit_slide(withq, sid, slide_edit::ReorderSteps{{ids[0]}}); }) ==
          ErrorCode::InvalidPermutation);
    CHECK(edit_slide(withq, sid, slide_edit::SetNotes{"say this"}).slide(sid)->notes == "say this");
    CHECK(error_of([&] { edit_slide(withq, "nope", slide_edit::SetNotes{"x"}); }) == ErrorCode::UnknownSlide);
    CHECK(error_of([&] { edit_slide(withq, sid, slide_edit::RemoveStep{"nope"}); }) == ErrorCode::UnknownStep);
    Deck removed = edit_slide(withq, sid, slide_edit::RemoveStep{ids[0]});
    CHECK(removed.slide(sid)->steps.size() == 2);
  }

  TEST_CASE("orphan flag when a tagged channel is disabled") {
    Deck d = two_unit_skeleton();
    auto plan = make_plan("bars", {Channel::Position, Channel::Size});
    plan.channels[1].enabled = false;
    Deck flagged = flag_orphans(d, {plan, make_plan("flows", {Channel::Position})});
    int orphans = 0;
    for (const auto& s : flagged.slides) {
      bool size_slide = s.channel_tags == std::vector<Channel>{Channel::Size};
      CHECK(s.orphaned == size_slide);
      orphans += s.orphaned;
    }
    CHECK(orphans == 1);
  }

  TEST_CASE("serialization round trip and closed enums") {
    Deck d = two_unit_skeleton();
    CHECK(parse_deck(serialize_deck(d)) == d);
    Json j = to_json(d);
    j["slides"][2]["steps"][0]["effect"] = "spin";
    try {
      parse_deck(j.dump());
      FAIL("expected SchemaViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaViolation);
      CHECK(e.pointer() == "/slides/2/steps/0/effect");
    }
    Json extra = to_json(d);
    extra["slides"][0]["bogus"] = 1;
    CHECK(error_of([&] { parse_deck(extra.dump()); }) == ErrorCode::SchemaViolation);
  }

  TEST_CASE("invariants are enforced by validation") {
    Deck d = two_unit_skeleton();
    Deck dup = d;
    dup.slides[1].slide_id = dup.slides[0].slide_id;
    CHECK(error_of([&] { validate_deck(dup); }) == ErrorCode::InvariantViolation);
    Deck empty = d;
    empty.slides[0].steps.clear();
    CHECK(error_of([&] { validate_deck(empty); }) == ErrorCode::InvariantViolation);
    Deck bad_circle = d;
    bad_circle.slides[0].steps.push_back(annotation("stx", AnnotationForm::Circle, {{0, 0}}));
    CHECK(error_of([&] { validate_deck(bad_circle); }) == ErrorCode::InvariantViolation);
    Deck empty_text = d;
    empty_text.slides[0].steps.push_back(annotation("stx", AnnotationForm::Text, {{0, 0}}, ""));
    CHECK(error_of([&] { validate_deck(empty_text); }) == ErrorCode::InvariantViolation);
    Deck morph = d;
    morph.slides[0].steps.push_back(transition("stx", TransitionEffect::Morph, {false, {"b0"}}));
    CHECK(error_of([&] { validate_deck(morph); }) == ErrorCode::InvariantViolation);
  }

  TEST_CASE("report counting") {
    Deck d = two_unit_skeleton();
    Slide& s = d.slides[0];
    s.steps = {transition("a", TransitionEffect::FadeIn), transition("b", TransitionEffect::Highlight),
               annotation("c", AnnotationForm::Circle, {{0, 0}, {1, 1}}),
               annotation("d", AnnotationForm::Text, {{0, 0}}, "x"), annotation("e", AnnotationForm::Text, {{0, 0}}, "y")};
    auto row = deck_stats(d).rows[0];
    CHECK(row.transition_types == std::vector<TransitionEffect>{TransitionEffect::FadeIn, TransitionEffect::Highlight});
    CHECK(row.transitions == 2);
    CHECK(row.symbol_annotations == 1);
    CHECK(row.text_annotations == 2);
    Deck none;
    CHECK(deck_stats(none).rows.empty());
  }

  TEST_CASE("TextFlow fixture reproduces the five observed slideshows") {
    Deck d = parse_deck(slurp(fixture("textflow_deck.json")));
    auto rows = deck_stats(d).rows;
    REQUIRE(rows.size() == 5);
    using TE = TransitionEffect;
    struct Expected {
      std::vector<TE> types;
      int transitions, symbols, texts;
    };
    const Expected table[] = {
        {{TE::FadeIn, TE::Highlight}, 2, 6, 6},
        {{}, 0, 7, 2},
        {{TE::FadeIn, TE::Highlight, TE::AddColor}, 4, 8, 8},
        {{TE::FadeIn, TE::Highlight, TE::Morph}, 4, 6, 6},
        {{TE::FadeIn, TE::AddColor}, 3, 9, 3},
    };
    for (std::size_t i = 0; i < 5; ++i) {
      CAPTURE(i);
      CHECK(rows[i].transition_types == table[i].types);
      CHECK(rows[i].transitions == table[i].transitions);
      CHECK(rows[i].symbol_annotations == table[i].symbols);
      CHECK(rows[i].text_annotations == table[i].texts);
    }
    std::string text = format_report_table(deck_stats(d));
    CHECK(text.find("Fade-in, Highlight, Add-color") != std::string::npos);
    CHECK(text.find("N/A") != std::string::npos);
  }

  TEST_CASE("slide edits decode from json") {
    auto e = slide_edit_from_json(Json::parse(R"({"op": "set_notes", "notes": "n"})"));
    CHECK(std::get<slide_edit::SetNotes>(e).notes == "n");
    CHECK(error_of([] { slide_edit_from_json(Json::parse(R"({"op": "explode"})")); }) == ErrorCode::SchemaViolation);
  }

  TEST_CASE("500 random decks survive serialization unchanged") {
    std::mt19937 rng(77);
    for (int i = 0; i < 500; ++i) {
      Deck d = random_deck(rng);
      validate_deck(d);
      std::string text = serialize_deck(d);
      Deck back = parse_deck(text);
      CHECK(back == d);
      CHECK(serialize_deck(back) == text);
    }
  }
}
