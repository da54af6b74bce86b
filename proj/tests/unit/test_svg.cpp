#include <regex>
#include <set>

#include "narvis/svg.hpp"
#include "support.hpp"

using namespace narvis;
using narvis::test::error_of;
using narvis::test::fixture;
using narvis::test::slurp;

namespace {

const SceneNode& first_shape(const SceneNode& n) {
  if (n.kind == NodeKind::Shape) return n;
  for (const auto& c : n.children) {
    try {
      return first_shape(c);
    } catch (const std::out_of_range&) {
    }
  }
  throw std::out_of_range("no shape");
}

void check_isomorphic(const SceneNode& a, const SceneNode& b) {
  CHECK(a.kind == b.kind);
  CHECK(a.element_type == b.element_type);
  CHECK(a.attributes == b.attributes);
  CHECK(a.text == b.text);
  REQUIRE(a.children.size() == b.children.size());
  for (std::size_t i = 0; i < a.children.size(); ++i) check_isomorphic(a.children[i], b.children[i]);
}

/// Random nested markup over every supported shape, with transforms,
/// classes and style attributes.
std::string random_svg(std::mt19937& rng, int& shapes) {
  std::uniform_int_distribution<int> coin(0, 3), num(1, 60);
  const char* colors[] = {"red", "#0f0", "#123456", "rgb(10,20,30)", "none"};
  std::string out = R"(<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">)";
  std::function<void(int)> emit = [&](int depth) {
    int n = 1 + coin(rng);
    for (int i = 0; i < n; ++i) {
      if (depth < 3 && coin(rng) == 0) {
        out += "<g";
        if (coin(rng) < 2) out += " transform=\"translate(" + std::to_string(num(rng)) + "," + std::to_string(num(rng)) + ")\"";
        if (coin(rng) == 0) out += " class=\"c" + std::to_string(coin(rng)) + "\"";
        out += ">";
        emit(depth + 1);
        out += "</g>";
        continue;
      }
      ++shapes;
      std::string fill = colors[num(rng) % 5];
      switch (num(rng) % 6) {
        case 0: out += "<circle cx=\"" + std::to_string(num(rng)) + "\" cy=\"5\" r=\"3\" fill=\"" + fill + "\"/>"; break;
        case 1: out += "<rect x=\"1\" y=\"2\" width=\"" + std::to_string(num(rng)) + "\" height=\"4\" style=\"fill:" + fill + "\"/>"; break;
        case 2: out += "<path d=\"M0,0 L" + std::to_string(num(rng)) + ",4 Z\" stroke=\"" + fill + "\"/>"; break;
        case 3: out += "<line x1=\"0\" y1=\"0\" x2=\"9\" y2=\"" + std::to_string(num(rng)) + "\" stroke=\"black\"/>"; break;
        case 4: out += "<polygon points=\"0,0 5,9 " + std::to_string(num(rng)) + ",2\" opacity=\"0.5\"/>"; break;
        default: out += "<text x=\"4\" y=\"9\">label &amp; " + std::to_string(num(rng)) + "</text>"; break;
      }
    }
  };
  emit(0);
  out += "</svg>";
  return out;
}

}  // namespace

TEST_SUITE("svg-ingest") {
  TEST_CASE("single circle") {
    auto doc = parse_svg(R"svg(<svg><circle cx="1" cy="2" r="3" fill="red"/></svg>)svg");
    REQUIRE(doc.root.children.size() == 1);
    CHECK(doc.root.children[0].kind == NodeKind::Shape);
    CHECK(doc.root.children[0].element_type == "circle");
    CHECK(doc.root.element_type == "svg");
  }

  TEST_CASE("group with class keeps its shape children") {
    auto doc = parse_svg(R"(<svg><g class="topics"><rect/><rect/></g></svg>)");
    REQUIRE(doc.root.children.size() == 1);
    const auto& g = doc.root.children[0];
    CHECK(g.kind == NodeKind::Group);
    CHECK(g.attributes.at("class") == "topics");
    CHECK(g.children.size() == 2);
    auto prims = extract_primitives(doc);
    REQUIRE(prims.size() == 2);
    CHECK(prims[0].group_chain == std::vector<std::string>{".topics"});
    CHECK(prims[0].css_classes.empty());
  }

  TEST_CASE("opinionseer fixture spans exactly three element types (independent text scan)") {
    const std::string markup = slurp(fixture("opinionseer.svg"));
    std::regex tag(R"(<(rect|circle|ellipse|line|polyline|polygon|path|text)[\s/>])");
    std::set<std::string> scanned;
    std::size_t scanned_count = 0;
    for (auto it = std::sregex_iterator(markup.begin(), markup.end(), tag); it != std::sregex_iterator(); ++it) {
      scanned.insert((*it)[1]);
      ++scanned_count;
    }
    auto prims = extract_primitives(parse_svg(markup));
    std::set<std::string> types;
    for (const auto& p : prims) types.insert(p.element_type);
    CHECK(scanned.size() == 3);
    CHECK(types == scanned);
    CHECK(prims.size() == scanned_count);
  }

  TEST_CASE("translation accumulates into position and size") {
    auto prims =
        extract_primitives(parse_svg(R"svg(<svg><g transform="translate(10,0)"><circle cx="1" cy="2" r="3"/></g></svg>)svg"));
    REQUIRE(prims.size() == 1);
    CHECK(prims[0].channels.position == Point{11, 2});
    CHECK(prims[0].channels.size == doctest::Approx(36));
  }

  TEST_CASE("short hex fill normalizes and rect size is its area") {
    auto prims = extract_primitives(parse_svg(R"(<svg><rect width="4" height="5" fill="#f00"/></svg>)"));
    CHECK(prims[0].channels.fill == "#FF0000FF");
    CHECK(prims[0].channels.size == doctest::Approx(20));
  }

  TEST_CASE("nested translate and scale chains (hand-computed)") {
    auto prims = extract_primitives(parse_svg(
        R"svg(<svg><g transform="translate(10,20)"><g transform="scale(2)"><rect x="1" y="1" width="2" height="4"/></g></g></svg>)svg"));
    // local bbox (1,1)-(3,5); scaled (2,2)-(6,10); translated (12,22)-(16,30)
    CHECK(prims[0].channels.position == Point{14, 26});
    CHECK(prims[0].channels.size == doctest::Approx(32));

    auto rot = extract_primitives(
        parse_svg(R"svg(<svg><g transform="rotate(90)"><rect x="0" y="0" width="4" height="2"/></g></svg>)svg"));
    // (x, y) -> (-y, x): box (-2,0)-(0,4)
    CHECK(rot[0].channels.position.x == doctest::Approx(-1));
    CHECK(rot[0].channels.position.y == doctest::Approx(2));
    CHECK(rot[0].channels.size == doctest::Approx(8));
  }

  TEST_CASE("random translate/scale chains match the composed map") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> t(-50, 50), s(0.25, 4);
    for (int trial = 0; trial < 200; ++trial) {
      int depth = 1 + trial % 4;
      std::string open, close;
      // Outermost first: x_world = T1(S1(T2(S2(...x))))
      double ax = 1, ay = 1, bx = 0, by = 0;  // world = a*local + b
      for (int d = 0; d < depth; ++d) {
        double tx = std::round(t(rng)), ty = std::round(t(rng)), sx = s(rng), sy = s(rng);
        open += "<g transform=\"translate(" + std::to_string(tx) + "," + std::to_string(ty) + ") scale(" +
                std::to_string(sx) + "," + std::to_string(sy) + ")\">";
        close += "</g>";
        sx = std::stod(std::to_string(sx));
        sy = std::stod(std::to_string(sy));
        tx = std::stod(std::to_string(tx));
        ty = std::stod(std::to_string(ty));
        bx += ax * tx;
        by += ay * ty;
        ax *= sx;
        ay *= sy;
      }
      auto prims = extract_primitives(
          parse_svg("<svg>" + open + R"(<ellipse cx="3" cy="-2" rx="2" ry="1"/>)" + close + "</svg>"));
      CHECK(prims[0].channels.position.x == doctest::Approx(ax * 3 + bx).epsilon(1e-9));
      CHECK(prims[0].channels.position.y == doctest::Approx(ay * -2 + by).epsilon(1e-9));
      CHECK(prims[0].channels.size == doctest::Approx(4 * 2 * std::abs(ax * ay)).epsilon(1e-9));
    }
  }

  TEST_CASE("style attribute wins over presentation attributes and class rules apply") {
    auto doc = parse_svg(R"svg(<svg><style>.hot { fill: orange; stroke: black; stroke-width: 3 }</style>
      <rect class="hot" width="1" height="1"/>
      <rect fill="blue" style="fill: red" width="1" height="1"/></svg>)svg");
    auto prims = extract_primitives(doc);
    CHECK(prims[0].channels.fill == "#FFA500FF");
    CHECK(prims[0].channels.stroke_width == 3);
    CHECK(prims[1].channels.fill == "#FF0000FF");
  }

  TEST_CASE("opacity multiplies along the ancestor chain and stays in range") {
    auto prims = extract_primitives(
        parse_svg(R"(<svg><g opacity="0.5"><g opacity="0.5"><circle r="1" opacity="0.8"/></g></g></svg>)"));
    CHECK(prims[0].channels.opacity == doctest::Approx(0.2));
  }

  TEST_CASE("path shape class carries the command signature") {
    auto prims = extract_primitives(parse_svg(R"(<svg><path d="M0,0 C1,1 2,2 3,3 C4,4 5,5 6,6 Z"/></svg>)"));
    CHECK(prims[0].channels.shape_class == "path:MCCZ");
  }

  TEST_CASE("error cases") {
    CHECK(error_of([] { parse_svg("<svg><rect></svg>"); }) == ErrorCode::MalformedXml);
    CHECK(error_of([] { parse_svg("<html><rect/></html>"); }) == ErrorCode::NotSvg);
    CHECK(error_of([] { parse_svg("<svg><g/></svg>"); }) == ErrorCode::EmptyScene);
  }

  TEST_CASE("unsupported elements are skipped with a warning, never silently") {
    auto doc = parse_svg(R"(<svg><image href="x.png"/><use href="#a"/><script>1</script><rect width="1" height="1"/></svg>)");
    CHECK(extract_primitives(doc).size() == 1);
    CHECK(doc.warnings.size() >= 2);
    CHECK(doc.raw_markup.find("<script>") != std::string::npos);
  }

  TEST_CASE("unboundable path is kept with a geometry warning") {
    auto prims = extract_primitives(parse_svg(R"(<svg><path d="M0,0 L5"/><path d=""/></svg>)"));
    REQUIRE(prims.size() == 2);
    CHECK(prims[1].geometry_warning);
    CHECK(prims[1].channels.size == 0);
  }

  TEST_CASE("primitive ids are unique and stable across calls") {
    const std::string markup = slurp(fixture("opinionseer.svg"));
    auto a = extract_primitives(parse_svg(markup));
    auto b = extract_primitives(parse_svg(markup));
    std::set<std::string> ids;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].id == b[i].id);
      CHECK(to_json(a[i]) == to_json(b[i]));
      ids.insert(a[i].id);
    }
    CHECK(ids.size() == a.size());
  }

  TEST_CASE("source markup renders the shape standalone") {
    auto prims =
        extract_primitives(parse_svg(R"svg(<svg><g transform="translate(5,5)"><rect width="2" height="2"/></g></svg>)svg"));
    auto alone = extract_primitives(parse_svg("<svg>" + prims[0].source_markup + "</svg>"));
    REQUIRE(alone.size() == 1);
    CHECK(alone[0].channels.position == prims[0].channels.position);
    CHECK(alone[0].channels.size == doctest::Approx(prims[0].channels.size));
  }

  TEST_CASE("round trip and completeness on random documents") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 150; ++trial) {
      int shapes = 0;
      std::string markup = random_svg(rng, shapes);
      if (shapes == 0) continue;
      auto doc = parse_svg(markup);
      auto again = parse_svg(serialize_svg(doc));
      check_isomorphic(doc.root, again.root);
      CHECK(extract_primitives(doc).size() == static_cast<std::size_t>(shapes));
      (void)first_shape(doc.root);
    }
  }

  TEST_CASE("embedded rendering wraps each primitive once without namespaces") {
    auto doc = parse_svg(slurp(fixture("opinionseer.svg")));
    std::string html = render_embedded_svg(doc);
    std::size_t wrappers = 0;
    for (auto pos = html.find("data-nv-id="); pos != std::string::npos; pos = html.find("data-nv-id=", pos + 1))
      ++wrappers;
    CHECK(wrappers == extract_primitives(doc).size());
    CHECK(html.find("http") == std::string::npos);
  }
}
