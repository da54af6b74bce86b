#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "CLI11.hpp"
#include "narvis/analytics.hpp"
#include "narvis/channels.hpp"
#include "narvis/compiler.hpp"
#include "narvis/component_tree.hpp"
#include "narvis/deck.hpp"
#include "narvis/error.hpp"
#include "narvis/narrative.hpp"
#include "narvis/project_store.hpp"
#include "narvis/service.hpp"
#include "narvis/svg.hpp"

namespace narvis::cli {

namespace fs = std::filesystem;
using json_util::ObjectReader;

namespace {

std::string read_input(const fs::path& path) {
  auto text = read_file(path);
  if (!text) throw Error(ErrorCode::NotFound, "file not found: " + path.string(), path.string());
  return *text;
}

void write_output(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string(), path.string());
  out << content;
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string(), path.string());
}

Json parse_json_file(const fs::path& path) {
  std::string text = read_input(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + " is not valid JSON: " + e.what(), "");
  }
}

void collect_by_label(const ClusterNode& node, const std::string& label, std::vector<const ClusterNode*>& out) {
  if (node.node_id == kRemovedNodeId) return;
  if (node.label == label) out.push_back(&node);
  for (const auto& c : node.children) collect_by_label(c, label, out);
}

/// A headless authoring session: one SVG plus the author's selections,
/// relations and optional manual order, all read from a project file.
struct Project {
  SvgDocument doc;
  std::map<std::string, VisualPrimitive> primitives;
  ComponentTree tree;
  std::vector<VisualUnit> units;
  std::vector<ChannelPlan> plans;
  RelationGraph graph;
  std::optional<std::vector<std::string>> order;
  AssembleOptions assemble;
};

std::string resolve_unit(const std::map<std::string, std::string>& by_name, const std::vector<VisualUnit>& units,
                         const std::string& ref, const std::string& pointer) {
  if (auto it = by_name.find(ref); it != by_name.end()) return it->second;
  for (const auto& u : units)
    if (u.unit_id == ref) return ref;
  throw Error(ErrorCode::UnknownUnit, "no unit named '" + ref + "'", pointer);
}

Project load_project(const fs::path& path) {
  Json j = parse_json_file(path);
  ObjectReader r(j, "");
  Project p;
  const fs::path svg_path = path.parent_path() / r.string("svg");
  p.doc = parse_svg(read_input(svg_path));
  auto prims = extract_primitives(p.doc);
  p.tree = build_tree(prims, svg_path.stem().string());
  for (auto& prim : prims) p.primitives.emplace(prim.id, std::move(prim));

  if (const Json* edits = r.optional("edits")) {
    const Json& arr = json_util::expect_array(*edits, r.at("edits"));
    for (std::size_t i = 0; i < arr.size(); ++i)
      p.tree = edit_tree(p.tree, tree_edit_from_json(arr[i], json_util::join_pointer(r.at("edits"), i)));
  }

  std::vector<UnitSelection> selections;
  std::vector<std::optional<std::vector<Channel>>> channel_choices;
  const Json& units = json_util::expect_array(r.required("units"), r.at("units"));
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string ptr = json_util::join_pointer(r.at("units"), i);
    ObjectReader ur(units[i], ptr);
    std::string node_id;
    if (ur.optional("node")) {
      node_id = ur.string("node");
    } else {
      std::string label = ur.string("label");
      std::vector<const ClusterNode*> hits;
      collect_by_label(p.tree.root, label, hits);
      if (hits.empty()) throw Error(ErrorCode::UnknownNode, "no tree node labelled '" + label + "'", ptr + "/label");
      if (hits.size() > 1)
        throw Error(ErrorCode::SchemaViolation, "label '" + label + "' is ambiguous; select by \"node\" instead",
                    ptr + "/label");
      node_id = hits.front()->node_id;
    }
    selections.push_back({node_id, ur.string("name")});
    std::optional<std::vector<Channel>> chosen;
    if (const Json* ch = ur.optional("channels")) {
      const Json& arr = json_util::expect_array(*ch, ur.at("channels"));
      chosen.emplace();
      for (std::size_t k = 0; k < arr.size(); ++k)
        chosen->push_back(channel_from_json(arr[k], json_util::join_pointer(ur.at("channels"), k)));
    }
    channel_choices.push_back(std::move(chosen));
    ur.finish();
  }
  p.units = select_units(p.tree, selections);

  std::map<std::string, std::string> by_name;
  for (const auto& u : p.units) by_name.emplace(u.name, u.unit_id);

  for (std::size_t i = 0; i < p.units.size(); ++i) {
    ChannelPlan plan = detect_channels(p.units[i], p.primitives, p.doc.view_box);
    if (const auto& chosen = channel_choices[i]) {
      std::vector<Channel> order = *chosen;
      for (const auto& spec : plan.channels)
        if (std::find(order.begin(), order.end(), spec.channel) == order.end()) order.push_back(spec.channel);
      plan = reorder_channels(plan, order);
      for (const auto& spec : plan.channels)
        if (std::find(chosen->begin(), chosen->end(), spec.channel) == chosen->end())
          plan = toggle_channel(plan, spec.channel, false);
    }
    p.plans.push_back(std::move(plan));
  }

  std::vector<std::string> ids;
  for (const auto& u : p.units) ids.push_back(u.unit_id);
  p.graph = make_graph(ids);
  if (const Json* rel = r.optional("relations")) {
    const Json& arr = json_util::expect_array(*rel, r.at("relations"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = json_util::join_pointer(r.at("relations"), i);
      ObjectReader er(arr[i], ptr);
      std::string from = resolve_unit(by_name, p.units, er.string("from"), er.at("from"));
      std::string to = resolve_unit(by_name, p.units, er.string("to"), er.at("to"));
      std::string kind = er.string("kind");
      er.finish();
      SetRelation k = SetRelation::None;
      if (kind == "dependent")
        k = SetRelation::Dependent;
      else if (kind == "independent")
        k = SetRelation::Independent;
      else if (kind != "none")
        json_util::schema_error(ptr + "/kind", "kind must be dependent, independent or none");
      p.graph = set_relation(p.graph, from, to, k);
    }
  }
  if (const Json* ord = r.optional("order")) {
    const Json& arr = json_util::expect_array(*ord, r.at("order"));
    p.order.emplace();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = json_util::join_pointer(r.at("order"), i);
      p.order->push_back(resolve_unit(by_name, p.units, json_util::expect_string(arr[i], ptr), ptr));
    }
  }
  p.assemble.deck_id = svg_path.stem().string();
  p.assemble.title = p.assemble.deck_id;
  p.assemble.svg_doc_ref = svg_path.filename().string();
  if (r.optional("deck_id")) p.assemble.deck_id = r.string("deck_id");
  if (r.optional("title")) p.assemble.title = r.string("title");
  if (r.optional("overview_slide")) p.assemble.overview_slide = r.boolean("overview_slide");
  r.finish();
  return p;
}

Json edges_json(const std::vector<RelationEdge>& edges) {
  Json out = Json::array();
  for (const auto& e : edges) out.push_back(to_json(e));
  return out;
}

int cmd_analyze(const std::string& svg_path, bool dump_primitives, bool dump_tree, std::ostream& out) {
  SvgDocument doc = parse_svg(read_input(svg_path));
  auto prims = extract_primitives(doc);
  ComponentTree tree = build_tree(prims, fs::path(svg_path).stem().string());
  if (dump_primitives) {
    Json arr = Json::array();
    for (const auto& p : prims) arr.push_back(to_json(p));
    out << arr.dump(2) << "\n";
    return 0;
  }
  if (dump_tree) {
    out << to_json(tree).dump(2) << "\n";
    return 0;
  }
  std::set<std::string> types;
  for (const auto& p : prims) types.insert(p.element_type);
  Json candidates = Json::array();
  for (const auto* n : unit_candidates(tree))
    candidates.push_back(
        {{"node_id", n->node_id}, {"label", n->label}, {"primitive_count", descendants_of(tree, n->node_id).size()}});
  out << Json{{"primitive_count", prims.size()},
              {"element_types", types},
              {"unit_candidates", candidates},
              {"warnings", doc.warnings}}
             .dump(2)
      << "\n";
  return 0;
}

int cmd_sequence(const std::string& project_path, std::ostream& out, std::ostream& err) {
  Project p = load_project(project_path);
  NarrativeSequence suggested = suggest_sequence(p.graph);
  const auto& order = p.order ? *p.order : suggested.order;
  auto violations = validate_sequence(p.graph, order);
  Json units = Json::array();
  for (const auto& u : p.units) units.push_back({{"unit_id", u.unit_id}, {"name", u.name}});
  out << Json{{"units", units},
              {"suggested", to_json(suggested)},
              {"order", order},
              {"violations", edges_json(violations)},
              {"nonadjacent_independent", edges_json(nonadjacent_independent_pairs(p.graph, order))}}
             .dump(2)
      << "\n";
  if (!violations.empty()) {
    adjust_sequence(p.graph, order);
    err << "sequence violates dependencies\n";
    return 1;
  }
  return 0;
}

int cmd_assemble(const std::string& project_path, const std::string& output, std::ostream& out) {
  Project p = load_project(project_path);
  NarrativeSequence seq = p.order ? adjust_sequence(p.graph, *p.order) : suggest_sequence(p.graph);
  Deck deck = assemble_deck(seq, p.plans, p.units, p.assemble);
  std::string text = serialize_deck(deck);
  if (output.empty() || output == "-")
    out << text;
  else
    write_output(output, text);
  return 0;
}

int cmd_compile(const std::string& deck_path, const std::string& svg_path, const std::string& output,
                const CompileOptions& opts, const std::string& manifest_path, std::ostream& out) {
  Deck deck = parse_deck(read_input(deck_path));
  SvgDocument doc = parse_svg(read_input(svg_path));
  CompiledSlideshow compiled = compile(deck, doc, opts);
  write_output(output, compiled.html);
  if (!manifest_path.empty()) write_output(manifest_path, compiled.manifest.dump(2) + "\n");
  out << Json{{"output", output}, {"slide_count", compiled.slide_count}, {"bytes", compiled.html.size()}}.dump()
      << "\n";
  return 0;
}

int cmd_stats(const std::string& events_path, const std::string& deck_path, bool as_json, std::ostream& out) {
  Deck deck = parse_deck(read_input(deck_path));
  auto log = parse_event_log(read_input(events_path));
  DeckStats stats = aggregate(deck, log);
  DeckReport report = deck_stats(deck);
  if (as_json) {
    out << Json{{"deck_report", to_json(report)}, {"stats", to_json(stats)}}.dump(2) << "\n";
  } else {
    out << format_report_table(report) << "\n" << format_stats(stats);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"narvis: turn a static SVG visualization into an explanatory slideshow", "narvis"};
  app.require_subcommand(1);

  std::string svg, project, deck, events, output, beacon, student, theme_path, manifest, data_dir = "narvis-data",
                                                                                     host = "127.0.0.1";
  bool dump_primitives = false, dump_tree = false, as_json = false, embed_fonts = false;
  int port = 8080;

  auto* analyze = app.add_subcommand("analyze", "extract primitives and build the component tree");
  analyze->add_option("svg", svg, "SVG file")->required();
  auto* dp = analyze->add_flag("--dump-primitives", dump_primitives, "print extracted primitives");
  analyze->add_flag("--dump-tree", dump_tree, "print the component tree")->excludes(dp);

  auto* sequence = app.add_subcommand("sequence", "print the suggested narrative sequence and validation");
  sequence->add_option("project", project, "project file")->required();

  auto* assemble = app.add_subcommand("assemble", "assemble a skeleton deck from a project file");
  assemble->add_option("project", project, "project file")->required();
  assemble->add_option("-o,--output", output, "deck file (default stdout)");

  auto* comp = app.add_subcommand("compile", "compile a deck into a self-contained HTML slideshow");
  comp->add_option("deck", deck, "deck file")->required();
  comp->add_option("svg", svg, "SVG file")->required();
  comp->add_option("-o,--output", output, "HTML file")->required();
  comp->add_option("--beacon", beacon, "event beacon URL");
  comp->add_option("--student", student, "student token embedded in beacon payloads");
  comp->add_option("--theme", theme_path, "theme JSON file");
  comp->add_option("--manifest", manifest, "write the slide/step manifest here");
  comp->add_flag("--embed-fonts", embed_fonts, "use the bundled font stack");

  auto* stats = app.add_subcommand("stats", "aggregate viewer events and report deck contents");
  stats->add_option("events", events, "NDJSON event log")->required();
  stats->add_option("deck", deck, "deck file")->required();
  stats->add_flag("--json", as_json, "print JSON instead of tables");

  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  serve->add_option("--port", port, "listen port")->envname("NARVIS_PORT");
  serve->add_option("--data-dir", data_dir, "storage directory")->envname("NARVIS_DATA_DIR");
  serve->add_option("--host", host, "listen address");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*analyze) return cmd_analyze(svg, dump_primitives, dump_tree, out);
    if (*sequence) return cmd_sequence(project, out, err);
    if (*assemble) return cmd_assemble(project, output, out);
    if (*comp) {
      CompileOptions opts;
      if (!beacon.empty()) opts.beacon_url = beacon;
      if (!student.empty()) opts.student_token = student;
      opts.embed_fonts = embed_fonts;
      if (!theme_path.empty()) opts.theme = parse_json_file(theme_path);
      return cmd_compile(deck, svg, output, opts, manifest, out);
    }
    if (*stats) return cmd_stats(events, deck, as_json, out);
    if (*serve) {
      Service service(ServiceConfig{.data_dir = data_dir, .clock = {}});
      err << "narvis: serving on http://" << host << ":" << port << "\n";
      serve_http(service, host, port);
      return 0;
    }
  } catch (const Error& e) {
    err << Json{{"error", error_body(e)}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << Json{{"error", {{"code", "Io"}, {"message", e.what()}, {"pointer", ""}}}}.dump() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace narvis::cli
