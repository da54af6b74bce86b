#include <filesystem>
#include <set>
#include <thread>

#include "httplib.h"
#include "narvis/service.hpp"
#include "support.hpp"

using namespace narvis;
using narvis::test::fixture;
using narvis::test::slurp;
using narvis::test::TempDir;

namespace {

HttpResponse call(Service& svc, const std::string& method, const std::string& path, const Json& body = nullptr,
                  std::map<std::string, std::string> headers = {}) {
  HttpRequest req;
  req.method = method;
  req.path = path;
  if (!body.is_null()) {
    req.body = body.dump();
    headers.emplace("content-type", "application/json");
  }
  req.headers = std::move(headers);
  return svc.handle(req);
}

ServiceConfig config(const TempDir& dir) {
  ServiceConfig c;
  c.data_dir = dir.path();
  c.clock = [] { return std::int64_t{1'700'000'000'000}; };
  return c;
}

std::string node_by_label(const Json& upload, const std::string& label) {
  for (const auto& c : upload["unit_candidates"])
    if (c["label"] == label) return c["node_id"];
  FAIL("no candidate labelled " << label);
  return {};
}

/// Uploads the TextFlow fixture and selects its three units.
struct TextflowProject {
  std::string id;
  std::string flows, threads, keywords;
};

TextflowProject textflow(Service& svc) {
  auto up = call(svc, "POST", "/projects", {{"svg", slurp(fixture("textflow.svg"))}, {"project_id", "textflow"}});
  REQUIRE(up.status == 201);
  Json j = up.json();
  TextflowProject p{"textflow", node_by_label(j, "topic-flows"), node_by_label(j, "threads"), node_by_label(j, "keywords")};
  auto units = call(svc, "PUT", "/projects/textflow/units",
                    {{"version", 0},
                     {"units", {{{"node_id", p.flows}, {"name", "flows"}},
                                {{"node_id", p.threads}, {"name", "threads"}},
                                {{"node_id", p.keywords}, {"name", "keywords"}}}}});
  REQUIRE(units.status == 200);
  return p;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::SchemaViolation) == 400);
    CHECK(http_status(ErrorCode::MalformedXml) == 400);
    CHECK(http_status(ErrorCode::UnknownProject) == 404);
    CHECK(http_status(ErrorCode::VersionConflict) == 409);
    CHECK(http_status(ErrorCode::DependencyViolation) == 422);
    CHECK(http_status(ErrorCode::CycleIntroduced) == 422);
  }

  TEST_CASE("uploading the opinionseer fixture exposes five unit candidates") {
    TempDir dir;
    Service svc(config(dir));
    auto r = call(svc, "POST", "/projects", {{"svg", slurp(fixture("opinionseer.svg"))}});
    REQUIRE(r.status == 201);
    Json j = r.json();
    CHECK(j["unit_candidates"].size() == 5);
    CHECK(j["element_types"].size() == 3);
    CHECK(r.headers.at("x-narvis-api") == "1");
    const std::string id = j["project_id"];
    CHECK(call(svc, "GET", "/projects/" + id + "/tree").json()["tree"] == j["tree"]);
    // Hover contract: descendants match the candidate's primitive count.
    for (const auto& c : j["unit_candidates"]) {
      auto d = call(svc, "GET", "/projects/" + id + "/tree/nodes/" + c["node_id"].get<std::string>() + "/descendants");
      CHECK(d.json()["primitive_ids"].size() == c["primitive_count"]);
    }
    auto raw = call(svc, "POST", "/projects", nullptr);
    CHECK(raw.status == 400);
  }

  TEST_CASE("errors are structured") {
    TempDir dir;
    Service svc(config(dir));
    auto missing = call(svc, "GET", "/projects/nope/tree");
    CHECK(missing.status == 404);
    CHECK(missing.json()["code"] == "UnknownProject");
    auto bad = call(svc, "POST", "/projects", {{"svg", "<svg><rect"}});
    CHECK(bad.status == 400);
    CHECK(bad.json()["code"] == "MalformedXml");
    CHECK(bad.json().contains("pointer"));
    CHECK(call(svc, "GET", "/health", nullptr, {{"x-narvis-api", "2"}}).status == 400);
    CHECK(call(svc, "GET", "/nowhere").status == 404);
  }

  TEST_CASE("stale tree edits conflict") {
    TempDir dir;
    Service svc(config(dir));
    auto up = call(svc, "POST", "/projects", {{"svg", slurp(fixture("scatter.svg"))}}).json();
    const std::string id = up["project_id"];
    const std::string leaf = up["unit_candidates"][0]["node_id"];
    Json edit{{"op", "rename"}, {"node_id", leaf}, {"label", "reds"}};
    auto ok = call(svc, "POST", "/projects/" + id + "/tree/edits", {{"version", 1}, {"edit", edit}});
    REQUIRE(ok.status == 200);
    CHECK(ok.json()["version"] == 2);
    auto stale = call(svc, "POST", "/projects/" + id + "/tree/edits", {{"version", 1}, {"edit", edit}});
    CHECK(stale.status == 409);
    CHECK(stale.json()["code"] == "VersionConflict");
    auto via_header = call(svc, "POST", "/projects/" + id + "/tree/edits",
                           {{"edit", {{"op", "rename"}, {"node_id", leaf}, {"label", "r"}}}}, {{"if-match", "2"}});
    CHECK(via_header.status == 200);
    CHECK(call(svc, "GET", "/projects/" + id + "/tree/versions/1").json()["tree"] == up["tree"]);
    auto invalid = call(svc, "POST", "/projects/" + id + "/tree/edits",
                        {{"version", 3}, {"edit", {{"op", "rename"}, {"node_id", "n404"}, {"label", "x"}}}});
    CHECK(invalid.status == 422);
    CHECK(invalid.json()["code"] == "UnknownNode");
  }

  TEST_CASE("sequence PUT violating a dependency lists the violations") {
    TempDir dir;
    Service svc(config(dir));
    auto p = textflow(svc);
    const std::string uf = "u-" + p.flows, ut = "u-" + p.threads, uk = "u-" + p.keywords;
    auto rel = call(svc, "PUT", "/projects/textflow/relations",
                    {{"version", 1},
                     {"relations", {{{"from", uf}, {"to", ut}, {"kind", "dependent"}},
                                    {{"from", uf}, {"to", uk}, {"kind", "dependent"}},
                                    {{"from", ut}, {"to", uk}, {"kind", "independent"}}}}});
    REQUIRE(rel.status == 200);
    auto cycle = call(svc, "PUT", "/projects/textflow/relations",
                      {{"version", 2}, {"relations", {{{"from", ut}, {"to", uf}, {"kind", "dependent"}}}}});
    CHECK(cycle.status == 422);
    CHECK(cycle.json()["code"] == "CycleIntroduced");
    auto seq = call(svc, "GET", "/projects/textflow/sequence").json();
    CHECK(seq["suggested"]["order"] == Json::array({uf, ut, uk}));
    auto bad = call(svc, "PUT", "/projects/textflow/sequence", {{"version", 0}, {"order", {ut, uf, uk}}});
    CHECK(bad.status == 422);
    CHECK(bad.json()["code"] == "DependencyViolation");
    CHECK(!bad.json()["items"].empty());
    auto good = call(svc, "PUT", "/projects/textflow/sequence", {{"version", 0}, {"order", {uf, uk, ut}}});
    REQUIRE(good.status == 200);
    CHECK(good.json()["sequence"]["provenance"] == "author_adjusted");
  }

  TEST_CASE("full pipeline: units, channels, deck, compile, player, events, stats") {
    TempDir dir;
    Service svc(config(dir));
    auto p = textflow(svc);
    const std::string uk = "u-" + p.keywords;
    auto ch = call(svc, "GET", "/projects/textflow/units/" + uk + "/channels");
    REQUIRE(ch.status == 200);
    std::int64_t plans_version = ch.json()["version"];

    auto deck = call(svc, "POST", "/projects/textflow/deck", {{"version", 0}, {"title", "Reading TextFlow"}});
    REQUIRE(deck.status == 201);
    Json d = deck.json()["deck"];
    CHECK(d["deck_id"] == "textflow");
    std::int64_t deck_version = deck.json()["version"];

    // Toggling a channel off orphans its slide.
    auto plan = ch.json()["plan"];
    std::string channel;
    for (const auto& c : plan["channels"])
      if (c["enabled"] == true && c["channel"] != "position") channel = c["channel"];
    if (!channel.empty()) {
      auto t = call(svc, "PATCH", "/projects/textflow/units/" + uk + "/channels",
                    {{"version", plans_version}, {"op", "toggle"}, {"channel", channel}, {"enabled", false}});
      REQUIRE(t.status == 200);
      CHECK(t.json()["orphaned_slides"].size() == 1);
      deck_version = call(svc, "GET", "/projects/textflow/deck").json()["version"];
    }

    const std::string first = d["slides"][0]["slide_id"];
    auto q = call(svc, "PATCH", "/projects/textflow/deck/slides/" + first,
                  {{"version", deck_version},
                   {"edit", {{"op", "add_step"},
                             {"step", {{"step_id", ""},
                                       {"kind", "question"},
                                       {"question_id", ""},
                                       {"mode", "single_choice"},
                                       {"prompt", "Which topic is largest?"},
                                       {"options", {"a", "b", "c"}},
                                       {"correct", {1}}}}}}});
    REQUIRE_MESSAGE(q.status == 200, q.body);
    Json edited = q.json()["deck"];
    std::string qid;
    for (const auto& st : edited["slides"][0]["steps"])
      if (st["kind"] == "question") qid = st["question_id"];
    REQUIRE(!qid.empty());

    auto stats = call(svc, "GET", "/projects/textflow/deck/stats");
    CHECK(stats.json()["slides"][0]["questions"] == 1);

    auto compiled = call(svc, "POST", "/projects/textflow/compile", Json::object());
    REQUIRE(compiled.status == 201);
    CHECK(compiled.json()["slide_count"] == edited["slides"].size() + 1);
    auto player = call(svc, "GET", "/decks/textflow/player");
    CHECK(player.status == 200);
    CHECK(player.content_type.starts_with("text/html"));
    CHECK(player.body.find("/decks/textflow/events") != std::string::npos);

    auto post = [&](Json e) { return call(svc, "POST", "/decks/textflow/events", e); };
    Json base{{"deck_id", "textflow"}, {"student_token", "alice"}};
    auto ev = [&](const char* type, const std::string& slide, int t) {
      Json e = base;
      e["event_type"] = type;
      e["slide_id"] = slide;
      e["timestamp_ms"] = t;
      return e;
    };
    auto r0 = post(ev("slide_enter", first, 0));
    CHECK(r0.status == 202);
    CHECK(r0.json()["position"] == 0);
    CHECK(post(ev("slide_exit", first, 12000)).json()["position"] == 1);
    Json a = ev("answer", first, 11000);
    a["question_id"] = qid;
    a["selected"] = {1};
    CHECK(post(a).status == 202);
    Json c = base;
    c["event_type"] = "comment";
    c["text"] = "clear";
    c["timestamp_ms"] = 13000;
    CHECK(post(c).status == 202);
    Json bad = ev("answer", first, 1);
    CHECK(post(bad).status == 400);
    Json foreign = ev("slide_enter", first, 1);
    foreign["deck_id"] = "other";
    CHECK(post(foreign).status == 400);
    CHECK(call(svc, "POST", "/decks/ghost/events", [&] {
            Json g = ev("slide_enter", first, 1);
            g["deck_id"] = "ghost";
            return g;
          }()).status == 404);

    auto s = call(svc, "GET", "/decks/textflow/stats").json();
    bool found = false;
    for (const auto& row : s["per_slide"])
      if (row["slide_id"] == first) {
        CHECK(row["pass_means_s"] == Json::array({12.0}));
        found = true;
      }
    CHECK(found);
    CHECK(s["per_question"][qid]["accuracy"] == 1.0);
    CHECK(call(svc, "GET", "/decks/textflow/comments").json()["comments"][0]["text"] == "clear");

    CHECK(call(svc, "DELETE", "/projects/textflow").status == 200);
    CHECK(call(svc, "GET", "/decks/textflow/stats").status == 404);
  }

  TEST_CASE("projects reload byte-identically after a restart") {
    TempDir dir;
    std::map<std::string, std::string> before;
    std::string tree, deck;
    {
      Service svc(config(dir));
      textflow(svc);
      REQUIRE(call(svc, "POST", "/projects/textflow/deck", {{"version", 0}}).status == 201);
      tree = call(svc, "GET", "/projects/textflow/tree").body;
      deck = call(svc, "GET", "/projects/textflow/deck").body;
      before = snapshot(dir.path());
    }
    Service again(config(dir));
    CHECK(call(again, "GET", "/projects/textflow/tree").body == tree);
    CHECK(call(again, "GET", "/projects/textflow/deck").body == deck);
    CHECK(snapshot(dir.path()) == before);
    CHECK(call(again, "GET", "/projects").json()["projects"] == Json::array({"textflow"}));
  }

  TEST_CASE("HTTP transport round trip") {
    TempDir dir;
    Service svc(config(dir));
    HttpServer server(svc);
    int port = server.bind("127.0.0.1", 0);
    std::thread loop([&] { server.run(); });
    {
      httplib::Client client("127.0.0.1", port);
      auto up = client.Post("/projects?project_id=scatter", slurp(fixture("scatter.svg")), "image/svg+xml");
      REQUIRE(up);
      CHECK(up->status == 201);
      CHECK(up->get_header_value("x-narvis-api") == "1");
      CHECK(Json::parse(up->body)["unit_candidates"].size() == 2);
      auto health = client.Get("/health");
      REQUIRE(health);
      CHECK(health->status == 200);
      auto stale = client.Post("/projects/scatter/tree/edits",
                               Json{{"version", 9}, {"edit", {{"op", "rename"}, {"node_id", "n1"}, {"label", "x"}}}}.dump(),
                               "application/json");
      REQUIRE(stale);
      CHECK(stale->status == 409);
    }
    server.stop();
    loop.join();
  }
}
