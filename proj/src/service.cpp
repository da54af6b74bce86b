#include "narvis/service.hpp"

#include <algorithm>
#include <set>

#include "narvis/channels.hpp"
#include "narvis/compiler.hpp"
#include "narvis/component_tree.hpp"
#include "narvis/deck.hpp"
#include "narvis/error.hpp"
#include "narvis/narrative.hpp"

namespace narvis {

namespace {

using json_util::ObjectReader;

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    if (end > start) out.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

HttpResponse json_response(const Json& j, int status = 200) {
  HttpResponse r;
  r.status = status;
  r.body = j.dump(2) + "\n";
  return r;
}

Json parse_body(const HttpRequest& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error&) {
    throw Error(ErrorCode::SchemaViolation, "request body is not valid JSON", "");
  }
}

std::int64_t read_version(const HttpRequest& req, ObjectReader& r) {
  if (r.optional("version")) {
    auto v = r.integer("version");
    if (v < 0) json_util::schema_error(r.at("version"), "version must be nonnegative");
    return v;
  }
  auto h = req.headers.find("if-match");
  if (h != req.headers.end()) {
    std::string v = h->second;
    std::erase(v, '"');
    try {
      std::size_t used = 0;
      long long n = std::stoll(v, &used);
      if (used == v.size() && n >= 0) return n;
    } catch (...) {
    }
    json_util::schema_error("/version", "If-Match must carry an integer version");
  }
  auto q = req.query.find("version");
  if (q != req.query.end()) {
    try {
      return std::stoll(q->second);
    } catch (...) {
    }
  }
  json_util::schema_error("/version", "mutations require the current version (body \"version\" or If-Match)");
}

Error not_found(const std::string& what) { return Error(ErrorCode::NotFound, what + " not found"); }

Json candidates_json(const ComponentTree& tree) {
  Json out = Json::array();
  for (const auto* n : unit_candidates(tree))
    out.push_back({{"node_id", n->node_id},
                   {"label", n->label},
                   {"primitive_count", descendants_of(tree, n->node_id).size()}});
  return out;
}

std::vector<ChannelPlan> plans_from(const Json& value) {
  std::vector<ChannelPlan> plans;
  if (value.is_array())
    for (std::size_t i = 0; i < value.size(); ++i) plans.push_back(plan_from_json(value[i], json_util::join_pointer("", i)));
  return plans;
}

Json plans_to_json(const std::vector<ChannelPlan>& plans) {
  Json out = Json::array();
  for (const auto& p : plans) out.push_back(to_json(p));
  return out;
}

std::vector<VisualUnit> units_from(const Json& value) {
  std::vector<VisualUnit> units;
  if (value.is_array())
    for (std::size_t i = 0; i < value.size(); ++i) units.push_back(unit_from_json(value[i], json_util::join_pointer("", i)));
  return units;
}

std::vector<std::string> unit_ids(const std::vector<VisualUnit>& units) {
  std::vector<std::string> ids;
  for (const auto& u : units) ids.push_back(u.unit_id);
  return ids;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaViolation:
    case ErrorCode::MalformedXml:
    case ErrorCode::NotSvg:
    case ErrorCode::EmptyScene:
    case ErrorCode::UnsupportedGeometry:
    case ErrorCode::EmptyInput: return 400;
    case ErrorCode::UnknownProject:
    case ErrorCode::UnknownDeck:
    case ErrorCode::NotFound: return 404;
    case ErrorCode::VersionConflict: return 409;
    case ErrorCode::Io: return 500;
    default: return 422;
  }
}

Json error_body(const Error& e) {
  Json j{{"code", to_string(e.code())}, {"message", e.what()}, {"pointer", e.pointer()}};
  if (!e.items().empty()) j["items"] = e.items();
  return j;
}

Service::Service(ServiceConfig config)
    : store_(config.data_dir, config.clock),
      events_(config.data_dir / "events", [this](const std::string& deck_id) {
        return store_.exists(deck_id) && store_.get(deck_id, "deck").version > 0;
      }) {}

std::shared_ptr<const Service::Parsed> Service::parsed(const std::string& project_id) {
  std::lock_guard lock(cache_mutex_);
  auto it = cache_.find(project_id);
  if (it != cache_.end()) return it->second;
  auto p = std::make_shared<Parsed>();
  p->doc = std::make_shared<SvgDocument>(parse_svg(store_.svg(project_id)));
  for (auto& prim : extract_primitives(*p->doc)) {
    p->order.push_back(prim.id);
    p->primitives.emplace(prim.id, std::move(prim));
  }
  cache_[project_id] = p;
  return p;
}

HttpResponse Service::handle(const HttpRequest& request) {
  HttpResponse response;
  try {
    auto api = request.headers.find(kApiVersionHeader);
    if (api != request.headers.end() && api->second != kApiVersion)
      throw Error(ErrorCode::SchemaViolation, "unsupported API version '" + api->second + "'", "");
    response = route(request);
  } catch (const Error& e) {
    response = json_response(error_body(e), http_status(e.code()));
  } catch (const Json::exception& e) {
    response = json_response(
        Json{{"code", "SchemaViolation"}, {"message", std::string("malformed JSON value: ") + e.what()}, {"pointer", ""}},
        400);
  } catch (const std::exception& e) {
    response = json_response(Json{{"code", "Io"}, {"message", e.what()}, {"pointer", ""}}, 500);
  }
  response.headers[kApiVersionHeader] = kApiVersion;
  if (request.path.starts_with("/decks/")) {
    response.headers["access-control-allow-origin"] = "*";
    response.headers["access-control-allow-methods"] = "GET, POST, OPTIONS";
    response.headers["access-control-allow-headers"] = "content-type";
  }
  return response;
}

HttpResponse Service::route(const HttpRequest& req) {
  const auto seg = split_path(req.path);
  const std::string& m = req.method;
  if (m == "OPTIONS") {
    HttpResponse r;
    r.status = 204;
    r.content_type.clear();
    return r;
  }
  if (seg.size() == 1 && seg[0] == "health" && m == "GET") return json_response({{"status", "ok"}});

  if (!seg.empty() && seg[0] == "projects") {
    if (seg.size() == 1 && m == "GET") return json_response({{"projects", store_.list()}});
    if (seg.size() == 1 && m == "POST") {
      std::string markup;
      std::optional<std::string> requested;
      auto ct = req.headers.find("content-type");
      if (ct != req.headers.end() && ct->second.find("json") != std::string::npos) {
        Json body = parse_body(req);
        ObjectReader r(body, "");
        markup = r.string("svg");
        if (r.optional("project_id")) requested = r.string("project_id");
        r.finish();
      } else {
        markup = req.body;
        if (auto q = req.query.find("project_id"); q != req.query.end()) requested = q->second;
      }
      SvgDocument doc = parse_svg(markup);
      auto prims = extract_primitives(doc);
      std::string id = store_.create(markup, requested);
      ComponentTree tree = build_tree(prims, id);
      std::lock_guard lock(store_.project_mutex(id));
      std::int64_t v = store_.put(id, "tree", 0, to_json(tree), true);
      std::set<std::string> types;
      for (const auto& p : prims) types.insert(p.element_type);
      return json_response({{"project_id", id},
                            {"version", v},
                            {"tree", to_json(tree)},
                            {"unit_candidates", candidates_json(tree)},
                            {"primitive_count", prims.size()},
                            {"element_types", types},
                            {"warnings", doc.warnings}},
                           201);
    }
    if (seg.size() < 2) throw not_found("route");
    const std::string& id = seg[1];
    if (!store_.exists(id)) throw Error(ErrorCode::UnknownProject, "unknown project '" + id + "'", id);

    if (seg.size() == 2 && m == "GET") {
      Json versions = Json::object();
      for (const char* a : {"tree", "units", "plans", "relations", "sequence", "deck"})
        versions[a] = store_.get(id, a).version;
      Json meta = store_.meta(id);
      meta["versions"] = std::move(versions);
      return json_response(meta);
    }
    if (seg.size() == 2 && m == "DELETE") {
      std::lock_guard lock(store_.project_mutex(id));
      store_.remove(id);
      events_.remove(id);
      std::lock_guard cache_lock(cache_mutex_);
      cache_.erase(id);
      return json_response({{"deleted", id}});
    }
    const std::string& what = seg[2];

    if (what == "svg" && seg.size() == 3 && m == "GET") {
      HttpResponse r;
      r.content_type = "image/svg+xml";
      r.body = store_.svg(id);
      return r;
    }
    if (what == "primitives" && seg.size() == 3 && m == "GET") {
      auto p = parsed(id);
      Json out = Json::array();
      for (const auto& pid : p->order) out.push_back(to_json(p->primitives.at(pid)));
      return json_response({{"primitives", out}, {"view_box", {p->doc->view_box.x, p->doc->view_box.y,
                                                               p->doc->view_box.width, p->doc->view_box.height}}});
    }

    if (what == "tree") {
      if (seg.size() == 3 && m == "GET") {
        auto t = store_.get(id, "tree");
        ComponentTree tree = tree_from_json(t.value);
        return json_response({{"version", t.version}, {"tree", t.value}, {"unit_candidates", candidates_json(tree)}});
      }
      if (seg.size() == 4 && seg[3] == "edits" && m == "POST") {
        Json body = parse_body(req);
        ObjectReader r(body, "");
        std::int64_t expected = read_version(req, r);
        std::vector<TreeEdit> edits;
        if (r.optional("edit")) edits.push_back(tree_edit_from_json(r.required("edit"), r.at("edit")));
        if (const Json* list = r.optional("edits")) {
          const Json& arr = json_util::expect_array(*list, r.at("edits"));
          for (std::size_t i = 0; i < arr.size(); ++i)
            edits.push_back(tree_edit_from_json(arr[i], json_util::join_pointer(r.at("edits"), i)));
        }
        r.finish();
        if (edits.empty()) json_util::schema_error("/edits", "no edits given");
        std::lock_guard lock(store_.project_mutex(id));
        auto current = store_.get(id, "tree");
        if (current.version != expected)
          throw Error(ErrorCode::VersionConflict,
                      "tree is at version " + std::to_string(current.version) + ", not " + std::to_string(expected),
                      "/version", {std::to_string(current.version)});
        ComponentTree tree = tree_from_json(current.value);
        for (const auto& e : edits) tree = edit_tree(tree, e);
        std::int64_t v = store_.put(id, "tree", expected, to_json(tree), true);
        return json_response({{"version", v}, {"tree", to_json(tree)}, {"unit_candidates", candidates_json(tree)}});
      }
      if (seg.size() == 5 && seg[3] == "versions" && m == "GET") {
        auto hist = store_.history(id, "tree");
        std::size_t n = 0;
        try {
          n = std::stoul(seg[4]);
        } catch (...) {
        }
        if (n == 0 || n > hist.size()) throw not_found("tree version " + seg[4]);
        return json_response({{"version", n}, {"tree", hist[n - 1]}});
      }
      if (seg.size() == 6 && seg[3] == "nodes" && seg[5] == "descendants" && m == "GET") {
        ComponentTree tree = tree_from_json(store_.get(id, "tree").value);
        if (!find_node(tree, seg[4])) throw not_found("node " + seg[4]);
        return json_response({{"node_id", seg[4]}, {"primitive_ids", descendants_of(tree, seg[4])}});
      }
    }

    if (what == "units") {
      if (seg.size() == 3 && m == "GET") {
        auto u = store_.get(id, "units");
        return json_response({{"version", u.version}, {"units", u.version ? u.value : Json::array()}});
      }
      if (seg.size() == 3 && m == "PUT") {
        Json body = parse_body(req);
        ObjectReader r(body, "");
        std::int64_t expected = read_version(req, r);
        std::vector<UnitSelection> selections;
        const Json& arr = json_util::expect_array(r.required("units"), r.at("units"));
        for (std::size_t i = 0; i < arr.size(); ++i) {
          ObjectReader ur(arr[i], json_util::join_pointer(r.at("units"), i));
          UnitSelection s{ur.string("node_id"), ur.string("name")};
          ur.finish();
          selections.push_back(std::move(s));
        }
        r.finish();
        std::lock_guard lock(store_.project_mutex(id));
        ComponentTree tree = tree_from_json(store_.get(id, "tree").value);
        auto units = select_units(tree, selections);
        auto p = parsed(id);
        auto old_units = units_from(store_.get(id, "units").value);
        auto old_plans_v = store_.get(id, "plans");
        auto old_plans = plans_from(old_plans_v.value);
        std::vector<ChannelPlan> plans;
        for (const auto& u : units) {
          auto same = std::find(old_units.begin(), old_units.end(), u);
          auto plan = std::find_if(old_plans.begin(), old_plans.end(),
                                   [&](const ChannelPlan& pl) { return pl.unit_id == u.unit_id; });
          if (same != old_units.end() && plan != old_plans.end())
            plans.push_back(*plan);
          else
            plans.push_back(detect_channels(u, p->primitives, p->doc->view_box));
        }
        auto old_graph_v = store_.get(id, "relations");
        RelationGraph graph = make_graph(unit_ids(units));
        if (old_graph_v.version) {
          RelationGraph old = graph_from_json(old_graph_v.value);
          for (const auto& e : old.edges)
            if (std::count(graph.units.begin(), graph.units.end(), e.from) &&
                std::count(graph.units.begin(), graph.units.end(), e.to))
              graph = set_relation(graph, e.from, e.to,
                                   e.kind == RelationKind::Dependent ? SetRelation::Dependent : SetRelation::Independent);
        }
        Json units_json = Json::array();
        for (const auto& u : units) units_json.push_back(to_json(u));
        std::int64_t v = store_.put(id, "units", expected, units_json);
        store_.put(id, "plans", old_plans_v.version, plans_to_json(plans));
        store_.put(id, "relations", old_graph_v.version, to_json(graph));
        auto seq = store_.get(id, "sequence");
        if (seq.version && !seq.value.is_null()) store_.put(id, "sequence", seq.version, nullptr);
        return json_response({{"version", v}, {"units", units_json}, {"plans", plans_to_json(plans)}});
      }
      if (seg.size() == 5 && seg[4] == "channels") {
        const std::string& uid = seg[3];
        auto plans_v = store_.get(id, "plans");
        auto plans = plans_from(plans_v.value);
        auto plan = std::find_if(plans.begin(), plans.end(), [&](const ChannelPlan& p) { return p.unit_id == uid; });
        if (plan == plans.end()) throw not_found("unit " + uid);
        if (m == "GET") return json_response({{"version", plans_v.version}, {"plan", to_json(*plan)}});
        if (m == "PATCH") {
          Json body = parse_body(req);
          ObjectReader r(body, "");
          std::int64_t expected = read_version(req, r);
          std::string op = r.string("op");
          std::lock_guard lock(store_.project_mutex(id));
          ChannelPlan updated;
          if (op == "reorder") {
            std::vector<Channel> order;
            const Json& arr = json_util::expect_array(r.required("order"), r.at("order"));
            for (std::size_t i = 0; i < arr.size(); ++i)
              order.push_back(channel_from_json(arr[i], json_util::join_pointer(r.at("order"), i)));
            updated = reorder_channels(*plan, order);
          } else if (op == "toggle") {
            Channel c = channel_from_json(r.required("channel"), r.at("channel"));
            updated = toggle_channel(*plan, c, r.boolean("enabled"));
          } else if (op == "set_complexity") {
            Channel c = channel_from_json(r.required("channel"), r.at("channel"));
            updated = set_complexity(*plan, c, static_cast<int>(r.integer("score")));
          } else if (op == "sort_by_complexity") {
            updated = sort_by_complexity(*plan);
          } else {
            json_util::schema_error(r.at("op"), "unknown plan operation '" + op + "'");
          }
          r.finish();
          *plan = updated;
          std::int64_t v = store_.put(id, "plans", expected, plans_to_json(plans));
          Json orphaned = Json::array();
          auto deck_v = store_.get(id, "deck");
          if (deck_v.version) {
            Deck deck = deck_from_json(deck_v.value);
            Deck flagged = flag_orphans(deck, plans);
            for (const auto& s : flagged.slides)
              if (s.orphaned) orphaned.push_back(s.slide_id);
            if (!(flagged == deck)) store_.put(id, "deck", deck_v.version, to_json(flagged), true);
          }
          return json_response({{"version", v}, {"plan", to_json(updated)}, {"orphaned_slides", orphaned}});
        }
      }
    }

    if (what == "relations" && seg.size() == 3) {
      if (m == "GET") {
        auto g = store_.get(id, "relations");
        return json_response({{"version", g.version}, {"graph", g.version ? g.value : to_json(RelationGraph{})}});
      }
      if (m == "PUT") {
        Json body = parse_body(req);
        ObjectReader r(body, "");
        std::int64_t expected = read_version(req, r);
        const Json& arr = json_util::expect_array(r.required("relations"), r.at("relations"));
        std::lock_guard lock(store_.project_mutex(id));
        auto current = store_.get(id, "relations");
        if (!current.version) throw Error(ErrorCode::InvariantViolation, "select units before relating them");
        RelationGraph graph = graph_from_json(current.value);
        for (std::size_t i = 0; i < arr.size(); ++i) {
          ObjectReader er(arr[i], json_util::join_pointer(r.at("relations"), i));
          std::string from = er.string("from"), to = er.string("to"), kind = er.string("kind");
          er.finish();
          SetRelation k = SetRelation::None;
          if (kind == "dependent")
            k = SetRelation::Dependent;
          else if (kind == "independent")
            k = SetRelation::Independent;
          else if (kind != "none")
            json_util::schema_error(er.at("kind"), "kind must be dependent, independent or none");
          graph = set_relation(graph, from, to, k);
        }
        r.finish();
        std::int64_t v = store_.put(id, "relations", expected, to_json(graph));
        return json_response({{"version", v}, {"graph", to_json(graph)}});
      }
    }

    if (what == "sequence" && seg.size() == 3) {
      auto g = store_.get(id, "relations");
      if (!g.version) throw Error(ErrorCode::InvariantViolation, "select units before sequencing them");
      RelationGraph graph = graph_from_json(g.value);
      NarrativeSequence suggested = suggest_sequence(graph);
      if (m == "GET") {
        auto stored = store_.get(id, "sequence");
        Json out{{"suggested", to_json(suggested)}, {"version", stored.version}, {"stored", stored.value}};
        const auto& order = stored.value.is_object() ? stored.value["order"].get<std::vector<std::string>>()
                                                     : suggested.order;
        Json notices = Json::array();
        for (const auto& e : nonadjacent_independent_pairs(graph, order)) notices.push_back(to_json(e));
        out["nonadjacent_independent"] = std::move(notices);
        return json_response(out);
      }
      if (m == "PUT") {
        Json body = parse_body(req);
        ObjectReader r(body, "");
        std::int64_t expected = read_version(req, r);
        std::vector<std::string> order;
        const Json& arr = json_util::expect_array(r.required("order"), r.at("order"));
        for (std::size_t i = 0; i < arr.size(); ++i)
          order.push_back(json_util::expect_string(arr[i], json_util::join_pointer(r.at("order"), i)));
        r.finish();
        NarrativeSequence seq = adjust_sequence(graph, order);
        if (seq.order == suggested.order) seq.provenance = SequenceProvenance::Suggested;
        std::lock_guard lock(store_.project_mutex(id));
        std::int64_t v = store_.put(id, "sequence", expected, to_json(seq));
        return json_response({{"version", v}, {"sequence", to_json(seq)}});
      }
    }

    if (what == "deck") {
      if (seg.size() == 3 && m == "GET") {
        auto d = store_.get(id, "deck");
        if (!d.version) throw not_found("deck");
        return json_response({{"version", d.version}, {"deck", d.value}});
      }
      if (seg.size() == 3 && m == "POST") {
        Json body = parse_body(req);
        ObjectReader r(body, "");
        std::int64_t expected = read_version(req, r);
        AssembleOptions opts;
        opts.deck_id = id;
        opts.svg_doc_ref = id;
        opts.title = id;
        if (r.optional("title")) opts.title = r.string("title");
        if (r.optional("overview_slide")) opts.overview_slide = r.boolean("overview_slide");
        r.finish();
        std::lock_guard lock(store_.project_mutex(id));
        auto units = units_from(store_.get(id, "units").value);
        if (units.empty()) throw Error(ErrorCode::InvariantViolation, "select units before assembling a deck");
        auto stored_seq = store_.get(id, "sequence");
        NarrativeSequence seq = stored_seq.value.is_object()
                                    ? sequence_from_json(stored_seq.value)
                                    : suggest_sequence(graph_from_json(store_.get(id, "relations").value));
        Deck deck = assemble_deck(seq, plans_from(store_.get(id, "plans").value), units, opts);
        std::int64_t v = store_.put(id, "deck", expected, to_json(deck), true);
        return json_response({{"version", v}, {"deck", to_json(deck)}}, 201);
      }
      if (seg.size() == 3 && m == "PUT") {
        Json body = parse_body(req);
        ObjectReader r(body, "");
        std::int64_t expected = read_version(req, r);
        Deck deck = deck_from_json(r.required("deck"));
        r.finish();
        validate_deck(deck);
        if (deck.deck_id != id)
          throw Error(ErrorCode::InvariantViolation, "deck_id must equal the project id", "/deck/deck_id");
        std::lock_guard lock(store_.project_mutex(id));
        std::int64_t v = store_.put(id, "deck", expected, to_json(deck), true);
        return json_response({{"version", v}, {"deck", to_json(deck)}});
      }
      if (seg.size() == 4 && seg[3] == "stats" && m == "GET") {
        auto d = store_.get(id, "deck");
        if (!d.version) throw not_found("deck");
        DeckReport report = deck_stats(deck_from_json(d.value));
        Json out = to_json(report);
        out["table"] = format_report_table(report);
        return json_response(out);
      }
      if (seg.size() >= 4 && seg[3] == "slides") {
        Json body = parse_body(req);
        ObjectReader r(body, "");
        std::int64_t expected = read_version(req, r);
        std::lock_guard lock(store_.project_mutex(id));
        auto d = store_.get(id, "deck");
        if (!d.version) throw not_found("deck");
        Deck deck = deck_from_json(d.value);
        Deck updated;
        if (seg.size() == 4 && m == "POST") {
          std::vector<Channel> tags;
          if (const Json* t = r.optional("channel_tags")) {
            const Json& arr = json_util::expect_array(*t, r.at("channel_tags"));
            for (std::size_t i = 0; i < arr.size(); ++i)
              tags.push_back(channel_from_json(arr[i], json_util::join_pointer(r.at("channel_tags"), i)));
          }
          std::vector<Step> steps;
          const Json& arr = json_util::expect_array(r.required("steps"), r.at("steps"));
          for (std::size_t i = 0; i < arr.size(); ++i) {
            Json step = arr[i];
            if (step.is_object() && !step.contains("step_id")) step["step_id"] = "";
            if (step.is_object() && step.value("kind", "") == "question" && !step.contains("question_id"))
              step["question_id"] = "";
            steps.push_back(step_from_json(step, json_util::join_pointer(r.at("steps"), i)));
          }
          updated = add_slide(deck, r.string("unit_id"), tags, steps);
        } else if (seg.size() >= 5) {
          const std::string& sid = seg[4];
          if (!deck.slide(sid)) throw not_found("slide " + sid);
          if (seg.size() == 5 && m == "PATCH") {
            updated = edit_slide(deck, sid, slide_edit_from_json(r.required("edit"), r.at("edit")));
          } else if (seg.size() == 5 && m == "DELETE") {
            updated = remove_slide(deck, sid);
          } else if (seg.size() == 6 && seg[5] == "move" && m == "POST") {
            auto index = r.integer("index");
            if (index < 0) json_util::schema_error(r.at("index"), "index must be nonnegative");
            updated = move_slide(deck, sid, static_cast<std::size_t>(index));
          } else {
            throw not_found("route");
          }
        } else {
          throw not_found("route");
        }
        r.finish();
        std::int64_t v = store_.put(id, "deck", expected, to_json(updated), true);
        return json_response({{"version", v}, {"deck", to_json(updated)}});
      }
    }

    if (what == "compile" && seg.size() == 3 && m == "POST") {
      Json body = parse_body(req);
      ObjectReader r(body, "");
      CompileOptions opts;
      bool beacon = true;
      if (r.optional("beacon")) beacon = r.boolean("beacon");
      if (beacon) opts.beacon_url = "/decks/" + id + "/events";
      if (r.optional("beacon_url")) opts.beacon_url = r.string("beacon_url");
      if (r.optional("student_token")) opts.student_token = r.string("student_token");
      if (r.optional("embed_fonts")) opts.embed_fonts = r.boolean("embed_fonts");
      if (const Json* t = r.optional("theme")) opts.theme = *t;
      r.finish();
      auto d = store_.get(id, "deck");
      if (!d.version) throw not_found("deck");
      auto compiled = compile(deck_from_json(d.value), *parsed(id)->doc, opts);
      std::lock_guard lock(store_.project_mutex(id));
      store_.put_blob(id, "player.html", compiled.html);
      Json info{{"deck_id", id},
                {"deck_version", d.version},
                {"slide_count", compiled.slide_count},
                {"manifest", compiled.manifest},
                {"player", "/decks/" + id + "/player"}};
      store_.put_blob(id, "compiled.json", info.dump(2) + "\n");
      return json_response(info, 201);
    }
    throw not_found("route");
  }

  if (seg.size() == 3 && seg[0] == "decks") {
    const std::string& id = seg[1];
    auto require_deck = [&]() -> Deck {
      if (!store_.exists(id)) throw Error(ErrorCode::UnknownDeck, "unknown deck '" + id + "'", id);
      auto d = store_.get(id, "deck");
      if (!d.version) throw Error(ErrorCode::UnknownDeck, "project '" + id + "' has no deck", id);
      return deck_from_json(d.value);
    };
    if (seg[2] == "player" && m == "GET") {
      if (!store_.exists(id)) throw Error(ErrorCode::UnknownDeck, "unknown deck '" + id + "'", id);
      auto html = store_.blob(id, "player.html");
      if (!html) throw not_found("compiled slideshow");
      HttpResponse r;
      r.content_type = "text/html; charset=utf-8";
      r.body = *html;
      return r;
    }
    if (seg[2] == "events" && m == "POST") {
      ViewerEvent e = event_from_json(parse_body(req));
      if (e.deck_id != id) json_util::schema_error("/deck_id", "deck_id does not match the URL");
      std::size_t pos = events_.append(e);
      return json_response({{"position", pos}}, 202);
    }
    if (seg[2] == "stats" && m == "GET") {
      Deck deck = require_deck();
      return json_response(to_json(aggregate(deck, events_.read(id))));
    }
    if (seg[2] == "comments" && m == "GET") {
      Deck deck = require_deck();
      return json_response({{"comments", to_json(aggregate(deck, events_.read(id)))["comments"]}});
    }
  }
  throw not_found("route");
}

}  // namespace narvis
