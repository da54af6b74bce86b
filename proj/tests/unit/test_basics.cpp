#include <cmath>

#include "narvis/color.hpp"
#include "narvis/geometry.hpp"
#include "narvis/json_util.hpp"
#include "narvis/path_data.hpp"
#include "narvis/xml.hpp"
#include "support.hpp"

using namespace narvis;
using narvis::test::error_of;

TEST_SUITE("basics") {
  TEST_CASE("transform lists compose left to right") {
    auto t = parse_transform("translate(10,0) scale(2)");
    REQUIRE(t);
    CHECK(t->apply(Point{1, 1}) == Point{12, 2});
    auto r = parse_transform("rotate(90)");
    REQUIRE(r);
    Point p = r->apply(Point{1, 0});
    CHECK(p.x == doctest::Approx(0).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(1));
    CHECK(parse_transform("matrix(1 0 0 1 5 6)")->apply(Point{0, 0}) == Point{5, 6});
    CHECK_FALSE(parse_transform("translate(1,"));
    CHECK_FALSE(parse_transform("wobble(3)"));
    CHECK(parse_transform("")->is_identity());
  }

  TEST_CASE("lengths and numbers") {
    CHECK(parse_length("12") == 12.0);
    CHECK(parse_length("3.5px") == 3.5);
    CHECK(parse_length("1e2") == 100.0);
    CHECK_FALSE(parse_length("50%"));
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(12) == "12");
  }

  TEST_CASE("colors normalize to uppercase RGBA hex") {
    CHECK(parse_color("#f00")->hex() == "#FF0000FF");
    CHECK(parse_color("red")->hex() == "#FF0000FF");
    CHECK(parse_color("rgb(0, 0, 255)")->hex() == "#0000FFFF");
    CHECK(parse_color("rgba(0,0,0,0.5)")->hex() == "#00000080");
    CHECK(parse_color("transparent")->hex() == "#00000000");
    CHECK_FALSE(parse_color("#12"));
    CHECK(normalize_paint("none") == "none");
    CHECK(normalize_paint("url(#grad)") == "url(#grad)");
    CHECK(normalize_paint("#ff0000", 0.5) == "#FF000080");
    CHECK(normalize_paint("currentColor", 1.0, "#00FF00FF") == "#00FF00FF");
    CHECK_FALSE(normalize_paint("chartreusey"));
  }

  TEST_CASE("path data parses, absolutizes and bounds") {
    auto p = parse_path_data("M0,0 l10,0 v10 h-10 z");
    CHECK(p.error.empty());
    CHECK(path_signature(p) == "MLVHZ");
    auto segs = to_absolute(p);
    BBox b = path_bbox(segs);
    CHECK(b.min_x == 0);
    CHECK(b.max_x == 10);
    CHECK(b.max_y == 10);
    CHECK(parse_path_data("M0 0 1 1 2 2").commands.size() == 3);
    CHECK_FALSE(parse_path_data("M0,0 L").error.empty());

    // Cubic whose extremum lies strictly inside the segment.
    auto c = to_absolute(parse_path_data("M0,0 C0,10 10,10 10,0"));
    CHECK(path_bbox(c).max_y == doctest::Approx(7.5));
  }

  TEST_CASE("resampling spaces points by arc length") {
    std::vector<Point> line = {{0, 0}, {10, 0}};
    auto pts = resample(line, 11);
    REQUIRE(pts.size() == 11);
    for (int i = 0; i < 11; ++i) CHECK(pts[i].x == doctest::Approx(i));
  }

  TEST_CASE("strict object reader rejects unknown keys with a pointer") {
    Json j = Json::parse(R"({"a": 1, "b": "x", "zzz": true})");
    json_util::ObjectReader r(j, "/root");
    CHECK(r.integer("a") == 1);
    CHECK(r.string("b") == "x");
    try {
      r.finish();
      FAIL("expected SchemaViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaViolation);
      CHECK(e.pointer() == "/root/zzz");
    }
    CHECK(json_util::join_pointer("", "a/b~c") == "/a~1b~0c");
  }

  TEST_CASE("xml parser reports malformed input with a position") {
    auto root = xml::parse_document("<a x='1'><b>t&amp;u</b><!-- c --></a>");
    CHECK(root.name == "a");
    CHECK(*root.attribute("x") == "1");
    CHECK(root.text() == "t&u");
    CHECK(error_of([] { xml::parse_document("<a><b></a>"); }) == ErrorCode::MalformedXml);
  }
}
