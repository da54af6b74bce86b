#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

#include "narvis/analytics.hpp"
#include "narvis/compiler.hpp"
#include "random_deck.hpp"
#include "replay_oracle.hpp"

using namespace narvis;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fixture(const std::string& name) { return fs::path(NARVIS_FIXTURES) / name; }

/// Thrown by expect() with the failed condition.
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<void()>& body) {
  auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  try {
    body();
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (ok && limit_s > 0 && elapsed >= limit_s) {
    ok = false;
    detail = "took " + std::to_string(elapsed) + " s, limit " + std::to_string(limit_s) + " s";
  }
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.3f s", elapsed);
  std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << timing << ")";
  if (!ok) {
    std::cout << ": " << detail;
    ++failures;
  }
  std::cout << std::endl;
}

// ---- sequencing brute force ----

using Order = std::vector<std::string>;

std::set<std::pair<std::string, std::string>> brute_violations(const RelationGraph& g, const Order& order) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& e : g.edges) {
    if (e.kind != RelationKind::Dependent) continue;
    auto pf = std::find(order.begin(), order.end(), e.from) - order.begin();
    auto pt = std::find(order.begin(), order.end(), e.to) - order.begin();
    if (pf > pt) out.insert({e.from, e.to});
  }
  return out;
}

void check_graph(const RelationGraph& g) {
  auto suggested = suggest_sequence(g).order;
  expect(validate_sequence(g, suggested).empty(), "suggestion fails validation");
  expect(brute_violations(g, suggested).empty(), "suggestion violates a dependency");
  Order perm = g.units;
  std::sort(perm.begin(), perm.end());
  do {
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& e : validate_sequence(g, perm)) got.insert({e.from, e.to});
    expect(got == brute_violations(g, perm), "validate_sequence disagrees with brute force");
  } while (std::next_permutation(perm.begin(), perm.end()));
}

Order names(int n) {
  Order u;
  for (int i = 0; i < n; ++i) u.push_back(std::string(1, static_cast<char>('A' + i)));
  return u;
}

/// Every assignment of {none, a->b, b->a, independent} to each unit pair.
void exhaustive(int n) {
  Order units = names(n);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
  std::size_t combos = 1;
  for (std::size_t k = 0; k < pairs.size(); ++k) combos *= 4;
  for (std::size_t code = 0; code < combos; ++code) {
    RelationGraph g = make_graph(units);
    std::size_t c = code;
    bool cyclic = false;
    for (auto [i, j] : pairs) {
      int kind = static_cast<int>(c % 4);
      c /= 4;
      try {
        if (kind == 1) g = set_relation(g, units[i], units[j], SetRelation::Dependent);
        if (kind == 2) g = set_relation(g, units[j], units[i], SetRelation::Dependent);
        if (kind == 3) g = set_relation(g, units[i], units[j], SetRelation::Independent);
      } catch (const Error& e) {
        expect(e.code() == ErrorCode::CycleIntroduced, "unexpected error while relating");
        cyclic = true;
        break;
      }
    }
    if (!cyclic) check_graph(g);
  }
}

RelationGraph random_dag(std::mt19937& rng, int n) {
  Order hidden = names(n);
  std::shuffle(hidden.begin(), hidden.end(), rng);
  Order inserted = hidden;
  std::shuffle(inserted.begin(), inserted.end(), rng);
  RelationGraph g = make_graph(inserted);
  std::uniform_real_distribution<double> u(0, 1);
  double density = u(rng);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double x = u(rng);
      if (x < density * 0.7)
        g = set_relation(g, hidden[i], hidden[j], SetRelation::Dependent);
      else if (x < density)
        g = set_relation(g, hidden[i], hidden[j], SetRelation::Independent);
    }
  return g;
}

int run_cli(const std::string& args, const fs::path& out_file) {
  std::string cmd = std::string("\"") + NARVIS_CLI + "\" " + args + " > \"" + out_file.string() + "\" 2>&1";
  int rc = std::system(cmd.c_str());
  return rc;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

int main() {
  criterion("decomposition: opinionseer gives 5 unit candidates over 3 element types", 1.0, [] {
    auto prims = extract_primitives(parse_svg(slurp(fixture("opinionseer.svg"))));
    std::set<std::string> types;
    for (const auto& p : prims) types.insert(p.element_type);
    auto tree = build_tree(prims);
    expect(unit_candidates(tree).size() == 5, "expected 5 unit candidates");
    expect(types.size() == 3, "expected 3 element types");
  });

  criterion("sequencing: suggestion valid and validation equals brute force", 10.0, [] {
    for (int n = 1; n <= 4; ++n) exhaustive(n);
    std::mt19937 rng(31);
    for (int trial = 0; trial < 1000; ++trial) check_graph(random_dag(rng, 5 + trial % 2));
    for (int trial = 0; trial < 1000; ++trial) {
      auto g = random_dag(rng, 1 + trial % 10);
      auto s = suggest_sequence(g).order;
      expect(std::is_permutation(s.begin(), s.end(), g.units.begin(), g.units.end()), "suggestion is not a permutation");
      expect(validate_sequence(g, s).empty(), "suggestion fails validation");
      expect(brute_violations(g, s).empty(), "suggestion violates a dependency");
    }
  });

  criterion("channel detection: 12-fixture corpus matches hand labels in salience order", 0, [] {
    Json labels = Json::parse(slurp(fixture("channels/labels.json")));
    expect(labels.size() == 12, "corpus must have 12 fixtures");
    int mismatches = 0;
    std::string first;
    for (auto& [file, expected] : labels.items()) {
      SvgDocument doc = parse_svg(slurp(fixture("channels/" + file)));
      std::map<std::string, VisualPrimitive> prims;
      VisualUnit unit{"u", "unit", {}, "n0"};
      for (auto& p : extract_primitives(doc)) {
        unit.primitive_ids.push_back(p.id);
        prims.emplace(p.id, std::move(p));
      }
      auto plan = detect_channels(unit, prims, doc.view_box);
      Json got = Json::array();
      for (auto c : plan.enabled_order()) got.push_back(to_string(c));
      if (got != expected) {
        ++mismatches;
        if (first.empty()) first = file + " gave " + got.dump();
      }
      for (std::size_t i = 1; i < plan.channels.size(); ++i)
        expect(plan.channels[i - 1].salience_rank <= plan.channels[i].salience_rank, file + ": order not by salience");
    }
    expect(mismatches == 0, std::to_string(mismatches) + " mismatches, first: " + first);
  });

  criterion("deck round trip on 500 random decks; report counts for slides 1 and 3", 0, [] {
    std::mt19937 rng(500);
    for (int i = 0; i < 500; ++i) {
      Deck d = test::random_deck(rng);
      expect(parse_deck(serialize_deck(d)) == d, "round trip changed deck " + std::to_string(i));
    }
    auto rows = deck_stats(parse_deck(slurp(fixture("textflow_deck.json")))).rows;
    expect(rows.size() >= 3, "fixture has fewer than 3 slides");
    auto triple = [](const SlideStatsRow& r) {
      return std::to_string(r.transitions) + "," + std::to_string(r.symbol_annotations) + "," +
             std::to_string(r.text_annotations);
    };
    expect(triple(rows[0]) == "2,6,6", "slide 1 gave (" + triple(rows[0]) + ")");
    expect(triple(rows[2]) == "4,8,8", "slide 3 gave (" + triple(rows[2]) + ")");
  });

  criterion("compiler: skeleton 6-slide deck gives 7 slides, deterministic, offline, full manifest", 2.0, [] {
    std::string markup = slurp(fixture("skeleton.svg"));
    SvgDocument doc = parse_svg(markup);
    std::map<std::string, VisualPrimitive> prims;
    VisualUnit dots{"u-dots", "dots", {}, "n1"}, bars{"u-bars", "bars", {}, "n2"};
    for (auto& p : extract_primitives(doc)) {
      (p.id.starts_with("p0_") ? dots : bars).primitive_ids.push_back(p.id);
      prims.emplace(p.id, std::move(p));
    }
    std::vector<ChannelPlan> plans{detect_channels(dots, prims, doc.view_box), detect_channels(bars, prims, doc.view_box)};
    Deck deck = assemble_deck({{"u-dots", "u-bars"}, SequenceProvenance::Suggested}, plans, {dots, bars},
                              {.deck_id = "skeleton", .title = "Skeleton", .svg_doc_ref = "skeleton.svg"});
    expect(deck.slides.size() == 6 && deck.overview_slide, "skeleton deck is not 6 slides with overview");
    auto a = compile(deck, doc);
    auto b = compile(deck, parse_svg(markup));
    expect(a.slide_count == 7, "slide_count " + std::to_string(a.slide_count));
    expect(a.html == b.html, "output differs between runs");
    expect(!std::regex_search(a.html, std::regex("https?://", std::regex::icase)), "external URL without beacon");
    std::multiset<std::string> listed, steps;
    for (const auto& s : a.manifest["slides"])
      for (const auto& e : s["steps"]) listed.insert(e["step_id"].get<std::string>());
    for (const auto& s : deck.slides)
      for (const auto& st : s.steps) steps.insert(st.step_id);
    expect(listed == steps, "manifest does not list every step exactly once");
  });

  criterion("analytics: replay oracle on 100 random logs; worked 4-event log", 0, [] {
    std::mt19937 rng(100);
    Deck quiz = test::quiz_deck();
    for (int i = 0; i < 100; ++i) {
      auto log = test::random_log(rng, 200);
      expect(log.size() <= 200, "log too long");
      auto diff = test::compare_with_oracle(aggregate(quiz, log), test::replay(quiz, log, 30 * test::kMinute));
      expect(diff.empty(), "log " + std::to_string(i) + ": " + diff);
    }
    Deck deck = parse_deck(slurp(fixture("textflow_deck.json")));
    auto stats = aggregate(deck, parse_event_log(slurp(fixture("four_events.ndjson"))));
    for (const auto& s : stats.per_slide)
      if (s.slide_id == "s1") expect(s.pass_means_s == std::vector<double>{10.0, 5.0}, "slide1 pass means");
    expect(stats.per_student.at("alice").back().cumulative_s == 30.0, "cumulative total");
  });

  criterion("headless pipeline: CLI from SVG to HTML to stats on TextFlow exits 0", 0, [] {
    fs::path dir = fs::temp_directory_path() / ("narvis-acceptance-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    struct Cleanup {
      fs::path p;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(p, ec);
      }
    } cleanup{dir};
    fs::path log = dir / "log.txt";
    auto step = [&](const std::string& what, const std::string& args) {
      int rc = run_cli(args, log);
      expect(rc == 0, what + " exited " + std::to_string(rc) + ": " + slurp(log));
    };
    step("analyze", "analyze " + quoted(fixture("textflow.svg")));
    step("sequence", "sequence " + quoted(fixture("textflow_project.json")));
    step("assemble", "assemble " + quoted(fixture("textflow_project.json")) + " -o " + quoted(dir / "deck.json"));
    step("compile", "compile " + quoted(dir / "deck.json") + " " + quoted(fixture("textflow.svg")) + " -o " +
                        quoted(dir / "textflow.html"));
    expect(fs::file_size(dir / "textflow.html") > 0, "empty slideshow");
    step("stats", "stats " + quoted(fixture("four_events.ndjson")) + " " + quoted(dir / "deck.json"));
  });

  return failures == 0 ? 0 : 1;
}
