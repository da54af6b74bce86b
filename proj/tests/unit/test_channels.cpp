#include <set>

#include "narvis/channels.hpp"
#include "support.hpp"

using namespace narvis;
using narvis::test::error_of;
using narvis::test::fixture;
using narvis::test::slurp;

namespace {

struct Loaded {
  SvgDocument doc;
  std::map<std::string, VisualPrimitive> prims;
  VisualUnit unit;
};

Loaded load(const std::string& markup) {
  Loaded l{parse_svg(markup), {}, {}};
  l.unit.unit_id = "u";
  l.unit.name = "unit";
  for (auto& p : extract_primitives(l.doc)) {
    l.unit.primitive_ids.push_back(p.id);
    l.prims.emplace(p.id, std::move(p));
  }
  return l;
}

ChannelPlan detect(const std::string& markup) {
  auto l = load(markup);
  return detect_channels(l.unit, l.prims, l.doc.view_box);
}

std::vector<std::string> names(const std::vector<Channel>& cs) {
  std::vector<std::string> out;
  for (auto c : cs) out.emplace_back(to_string(c));
  return out;
}

}  // namespace

TEST_SUITE("channel-analysis") {
  TEST_CASE("two fills with equal radii enable color only") {
    auto plan = detect(R"(<svg viewBox="0 0 100 100"><circle cx="10" cy="10" r="4" fill="#FF0000FF"/>
      <circle cx="60" cy="40" r="4" fill="#0000FFFF"/></svg>)");
    CHECK(plan.is_enabled(Channel::ColorFill));
    CHECK_FALSE(plan.is_enabled(Channel::Size));
  }

  TEST_CASE("identical rects in a grid enable only position") {
    std::string m = R"(<svg viewBox="0 0 100 100">)";
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        m += "<rect x=\"" + std::to_string(i * 30) + "\" y=\"" + std::to_string(j * 30) + "\" width=\"10\" height=\"10\"/>";
    auto plan = detect(m + "</svg>");
    CHECK(names(plan.enabled_order()) == std::vector<std::string>{"position"});
  }

  TEST_CASE("radii and fills vary: order follows the salience table") {
    // Salience by hand: position (1) < size (2) < color_fill (3).
    auto plan = detect(R"svg(<svg viewBox="0 0 100 100"><circle cx="10" cy="10" r="2" fill="red"/>
      <circle cx="40" cy="40" r="5" fill="blue"/><circle cx="80" cy="20" r="9" fill="red"/></svg>)svg");
    CHECK(names(plan.enabled_order()) == std::vector<std::string>{"position", "size", "color_fill"});
  }

  TEST_CASE("author operations") {
    auto plan = detect(R"(<svg viewBox="0 0 100 100"><circle cx="10" cy="10" r="2" fill="red"/>
      <circle cx="40" cy="40" r="5" fill="blue"/></svg>)");
    auto re = reorder_channels(plan, {Channel::ColorFill, Channel::Position, Channel::Size});
    CHECK(names(re.enabled_order()) == std::vector<std::string>{"color_fill", "position", "size"});
    CHECK(error_of([&] { reorder_channels(plan, {Channel::Size, Channel::Position}); }) == ErrorCode::InvalidPermutation);
    CHECK(error_of([&] { reorder_channels(plan, {Channel::Size, Channel::Size, Channel::Position}); }) ==
          ErrorCode::InvalidPermutation);
    auto off = toggle_channel(plan, Channel::Size, false);
    CHECK_FALSE(off.is_enabled(Channel::Size));
    CHECK(off.channels.size() == plan.channels.size());
    CHECK(error_of([&] { set_complexity(plan, Channel::ColorFill, 6); }) == ErrorCode::OutOfRange);
    CHECK(error_of([&] { set_complexity(plan, Channel::ColorFill, 0); }) == ErrorCode::OutOfRange);
    CHECK(error_of([&] { toggle_channel(plan, Channel::Opacity, true); }) == ErrorCode::UnknownChannel);
    auto sorted = sort_by_complexity(set_complexity(set_complexity(plan, Channel::Position, 5), Channel::ColorFill, 1));
    CHECK(names(sorted.enabled_order()) == std::vector<std::string>{"color_fill", "size", "position"});
    CHECK(plan_from_json(to_json(sorted)) == sorted);
    CHECK(error_of([&] { detect_channels(VisualUnit{"u", "x", {"missing"}, "n"}, {}, ViewBox{}); }) ==
          ErrorCode::UnknownPrimitive);
  }

  TEST_CASE("hand-labelled corpus of scatter, bar, chord and flow fixtures") {
    Json labels = Json::parse(slurp(fixture("channels/labels.json")));
    REQUIRE(labels.size() == 12);
    for (auto& [file, expected] : labels.items()) {
      CAPTURE(file);
      auto plan = detect(slurp(fixture("channels/" + file)));
      CHECK(Json(names(plan.enabled_order())) == expected);
      for (std::size_t i = 1; i < plan.channels.size(); ++i)
        CHECK(plan.channels[i - 1].salience_rank <= plan.channels[i].salience_rank);
    }
  }

  TEST_CASE("detection soundness on random synthetic units") {
    // Channel levels are drawn from well-separated sets, so the number of
    // levels used is the exact distinct-value count.
    std::mt19937 rng(99);
    const int radii[] = {3, 6, 12};
    const char* fills[] = {"#FF0000", "#00FF00", "#0000FF"};
    const char* strokes[] = {"#000000", "#FFFFFF"};
    const double widths[] = {1, 3, 8};
    const double opacities[] = {0.2, 0.6, 1};
    for (int trial = 0; trial < 200; ++trial) {
      auto levels = [&](int max) { return 1 + static_cast<int>(rng() % max); };
      int nr = levels(3), nf = levels(3), ns = levels(2), nw = levels(3), no = levels(3), nshape = levels(2);
      int count = 6 + static_cast<int>(rng() % 6);
      std::string m = R"(<svg viewBox="0 0 1000 1000">)";
      for (int i = 0; i < count; ++i) {
        int r = radii[i % nr];
        double cx = 60 + 80 * (i % 10), cy = 60 + 300 * (i / 10) + 97 * (i % 3);
        std::string paint = "fill=\"" + std::string(fills[(i / 2) % nf]) + "\" stroke=\"" + strokes[(i / 3) % ns] +
                            "\" stroke-width=\"" + format_number(widths[(i / 4) % nw]) + "\" opacity=\"" +
                            format_number(opacities[(i / 5) % no]) + "\"";
        if ((i / 6) % nshape == 0 && i % 2 == 0 && nshape == 2)
          m += "<rect x=\"" + format_number(cx - r) + "\" y=\"" + format_number(cy - r) + "\" width=\"" +
               std::to_string(2 * r) + "\" height=\"" + std::to_string(2 * r) + "\" " + paint + "/>";
        else
          m += "<circle cx=\"" + format_number(cx) + "\" cy=\"" + format_number(cy) + "\" r=\"" + std::to_string(r) +
               "\" " + paint + "/>";
      }
      m += "</svg>";
      auto l = load(m);
      std::map<Channel, std::set<std::string>> used;
      for (const auto& [id, p] : l.prims) {
        used[Channel::Size].insert(format_number(p.channels.size));
        used[Channel::ColorFill].insert(p.channels.fill);
        used[Channel::ColorStroke].insert(p.channels.stroke);
        used[Channel::StrokeWidth].insert(format_number(p.channels.stroke_width));
        used[Channel::Opacity].insert(format_number(p.channels.opacity));
        used[Channel::Shape].insert(p.channels.shape_class);
      }
      auto plan = detect_channels(l.unit, l.prims, l.doc.view_box);
      CAPTURE(m);
      CHECK(plan.is_enabled(Channel::Position));
      for (auto& [c, values] : used) {
        CAPTURE(to_string(c));
        CHECK(plan.is_enabled(c) == (values.size() >= 2));
        std::vector<const VisualPrimitive*> ptrs;
        for (const auto& [id, p] : l.prims) ptrs.push_back(&p);
        CHECK(distinct_values(c, ptrs, l.doc.view_box) == static_cast<int>(values.size()));
      }
    }
  }
}
