#include <sstream>

#include "cli.hpp"
#include "narvis/json_util.hpp"
#include "support.hpp"

using narvis::Json;
using narvis::test::fixture;
using narvis::test::slurp;
using narvis::test::TempDir;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = narvis::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("analyze --dump-tree on the scatter fixture gives two appearance leaves") {
    auto r = run({"analyze", fixture("scatter.svg").string(), "--dump-tree"});
    REQUIRE(r.code == 0);
    Json tree = Json::parse(r.out);
    const Json& children = tree["root"]["children"];
    REQUIRE(children.size() == 2);
    for (const auto& c : children) {
      CHECK(c["basis"] == "appearance");
      CHECK(c["children"].empty());
    }
  }

  TEST_CASE("analyze summary and primitives") {
    auto r = run({"analyze", fixture("opinionseer.svg").string()});
    REQUIRE(r.code == 0);
    Json j = Json::parse(r.out);
    CHECK(j["unit_candidates"].size() == 5);
    CHECK(j["element_types"] == Json::array({"circle", "path", "rect"}));
    auto prims = run({"analyze", fixture("scatter.svg").string(), "--dump-primitives"});
    REQUIRE(prims.code == 0);
    CHECK(Json::parse(prims.out).size() == 10);
  }

  TEST_CASE("sequence prints the suggestion") {
    auto r = run({"sequence", fixture("textflow_project.json").string()});
    REQUIRE(r.code == 0);
    Json j = Json::parse(r.out);
    CHECK(j["suggested"]["order"].size() == 3);
    CHECK(j["violations"].empty());
  }

  TEST_CASE("compile twice gives identical files") {
    TempDir dir;
    auto a = (dir.path() / "a.html").string(), b = (dir.path() / "b.html").string();
    auto deck = fixture("textflow_deck.json").string(), svg = fixture("textflow.svg").string();
    REQUIRE(run({"compile", deck, svg, "-o", a}).code == 0);
    REQUIRE(run({"compile", deck, svg, "-o", b}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).find("http") == std::string::npos);
    auto beacon = (dir.path() / "c.html").string();
    REQUIRE(run({"compile", deck, svg, "-o", beacon, "--beacon", "http://localhost:8080/decks/textflow/events"}).code == 0);
    CHECK(slurp(beacon).find("http://localhost:8080/decks/textflow/events") != std::string::npos);
  }

  TEST_CASE("stats on the four-event log") {
    auto r = run({"stats", fixture("four_events.ndjson").string(), fixture("textflow_deck.json").string(), "--json"});
    REQUIRE(r.code == 0);
    Json j = Json::parse(r.out);
    Json s1;
    for (const auto& row : j["stats"]["per_slide"])
      if (row["slide_id"] == "s1") s1 = row;
    CHECK(s1["pass_means_s"] == Json::array({10.0, 5.0}));
    CHECK(j["stats"]["per_student"]["alice"].back() == Json::array({30000, 30.0}));
    auto text = run({"stats", fixture("four_events.ndjson").string(), fixture("textflow_deck.json").string()});
    REQUIRE(text.code == 0);
    CHECK(text.out.find("s1") != std::string::npos);
  }

  TEST_CASE("errors are structured on stderr with a nonzero exit") {
    auto missing = run({"analyze", "/no/such/file.svg"});
    CHECK(missing.code == 1);
    Json e = Json::parse(missing.err);
    CHECK(e["error"]["code"] == "NotFound");
    TempDir dir;
    auto bad = dir.path() / "bad.svg";
    std::ofstream(bad) << "<svg><g></svg>";
    auto malformed = run({"analyze", bad.string()});
    CHECK(malformed.code == 1);
    CHECK(Json::parse(malformed.err)["error"]["code"] == "MalformedXml");
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
  }
}
