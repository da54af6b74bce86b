#include "narvis/narrative.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "narvis/error.hpp"

namespace narvis {

namespace {

bool same_pair(const RelationEdge& e, const std::string& a, const std::string& b) {
  return (e.from == a && e.to == b) || (e.from == b && e.to == a);
}

void require_unit(const RelationGraph& g, const std::string& u) {
  if (std::find(g.units.begin(), g.units.end(), u) == g.units.end())
    throw Error(ErrorCode::UnknownUnit, "unknown unit '" + u + "'", u);
}

// Shortest dependent path start ⇝ goal, or empty when none exists.
std::vector<std::string> dependent_path(const RelationGraph& g, const std::string& start, const std::string& goal) {
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{start};
  std::set<std::string> seen{start};
  while (!queue.empty()) {
    std::string u = queue.front();
    queue.pop_front();
    if (u == goal) {
      std::vector<std::string> path{goal};
      while (path.back() != start) path.push_back(parent[path.back()]);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (const auto& e : g.edges) {
      if (e.kind != RelationKind::Dependent || e.from != u || seen.contains(e.to)) continue;
      seen.insert(e.to);
      parent[e.to] = u;
      queue.push_back(e.to);
    }
  }
  return {};
}

bool independent_linked(const RelationGraph& g, const std::string& a, const std::string& b) {
  return std::any_of(g.edges.begin(), g.edges.end(),
                     [&](const RelationEdge& e) { return e.kind == RelationKind::Independent && same_pair(e, a, b); });
}

}  // namespace

RelationGraph make_graph(std::vector<std::string> units) {
  std::set<std::string> seen;
  for (const auto& u : units)
    if (!seen.insert(u).second) throw Error(ErrorCode::InvariantViolation, "duplicate unit '" + u + "'", u);
  return RelationGraph{std::move(units), {}};
}

RelationGraph set_relation(const RelationGraph& graph, const std::string& a, const std::string& b, SetRelation kind) {
  if (a == b) throw Error(ErrorCode::SelfRelation, "a unit cannot be related to itself", a);
  require_unit(graph, a);
  require_unit(graph, b);
  if (kind == SetRelation::Dependent) {
    auto cycle = dependent_path(graph, b, a);
    if (!cycle.empty()) {
      std::string names;
      for (const auto& u : cycle) names += (names.empty() ? "" : " -> ") + u;
      throw Error(ErrorCode::CycleIntroduced, "making " + b + " depend on " + a + " closes the cycle " + names, b,
                  cycle);
    }
  }
  RelationGraph out = graph;
  std::erase_if(out.edges, [&](const RelationEdge& e) { return same_pair(e, a, b); });
  if (kind == SetRelation::Dependent) out.edges.push_back({a, b, RelationKind::Dependent});
  if (kind == SetRelation::Independent) out.edges.push_back({a, b, RelationKind::Independent});
  return out;
}

NarrativeSequence suggest_sequence(const RelationGraph& graph) {
  std::map<std::string, int> indegree;
  for (const auto& u : graph.units) indegree[u] = 0;
  for (const auto& e : graph.edges)
    if (e.kind == RelationKind::Dependent) ++indegree[e.to];

  NarrativeSequence seq;
  std::vector<bool> emitted(graph.units.size(), false);
  while (seq.order.size() < graph.units.size()) {
    std::optional<std::size_t> pick, fallback;
    for (std::size_t i = 0; i < graph.units.size(); ++i) {
      if (emitted[i] || indegree[graph.units[i]] != 0) continue;
      if (!fallback) fallback = i;
      if (!seq.order.empty() && independent_linked(graph, seq.order.back(), graph.units[i])) {
        pick = i;
        break;
      }
    }
    if (!pick) pick = fallback;
    if (!pick) throw Error(ErrorCode::CycleIntroduced, "dependent relations contain a cycle");
    emitted[*pick] = true;
    const std::string& u = graph.units[*pick];
    seq.order.push_back(u);
    for (const auto& e : graph.edges)
      if (e.kind == RelationKind::Dependent && e.from == u) --indegree[e.to];
  }
  return seq;
}

std::vector<RelationEdge> validate_sequence(const RelationGraph& graph, const std::vector<std::string>& order) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (std::find(graph.units.begin(), graph.units.end(), order[i]) == graph.units.end())
      throw Error(ErrorCode::NotAPermutation, "'" + order[i] + "' is not a unit of the graph", order[i]);
    if (!position.emplace(order[i], i).second)
      throw Error(ErrorCode::NotAPermutation, "'" + order[i] + "' appears twice", order[i]);
  }
  if (order.size() != graph.units.size())
    throw Error(ErrorCode::NotAPermutation, "order lists " + std::to_string(order.size()) + " of " +
                                                std::to_string(graph.units.size()) + " units");
  std::vector<RelationEdge> violations;
  for (const auto& e : graph.edges)
    if (e.kind == RelationKind::Dependent && position[e.from] > position[e.to]) violations.push_back(e);
  return violations;
}

NarrativeSequence adjust_sequence(const RelationGraph& graph, const std::vector<std::string>& order) {
  auto violations = validate_sequence(graph, order);
  if (!violations.empty()) {
    std::vector<std::string> items;
    for (const auto& v : violations) items.push_back(v.from + "->" + v.to);
    throw Error(ErrorCode::DependencyViolation,
                std::to_string(violations.size()) + " dependent relation(s) violated; first: " + items.front(), "",
                items);
  }
  return {order, SequenceProvenance::AuthorAdjusted};
}

std::vector<RelationEdge> nonadjacent_independent_pairs(const RelationGraph& graph,
                                                        const std::vector<std::string>& order) {
  std::map<std::string, long> position;
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<long>(i);
  std::vector<RelationEdge> out;
  for (const auto& e : graph.edges) {
    if (e.kind != RelationKind::Independent) continue;
    auto a = position.find(e.from), b = position.find(e.to);
    if (a == position.end() || b == position.end() || std::abs(a->second - b->second) != 1) out.push_back(e);
  }
  return out;
}

std::string_view to_string(RelationKind kind) {
  return kind == RelationKind::Dependent ? "dependent" : "independent";
}

std::string_view to_string(SequenceProvenance p) {
  return p == SequenceProvenance::Suggested ? "suggested" : "author_adjusted";
}

Json to_json(const RelationEdge& e) { return Json{{"from", e.from}, {"to", e.to}, {"kind", to_string(e.kind)}}; }

Json to_json(const RelationGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges) edges.push_back(to_json(e));
  return Json{{"units", g.units}, {"edges", std::move(edges)}};
}

Json to_json(const NarrativeSequence& s) {
  return Json{{"order", s.order}, {"provenance", to_string(s.provenance)}};
}

RelationGraph graph_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  const Json& units = json_util::expect_array(r.required("units"), r.at("units"));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < units.size(); ++i)
    names.push_back(json_util::expect_string(units[i], json_util::join_pointer(r.at("units"), i)));
  RelationGraph g = make_graph(std::move(names));
  const Json& edges = json_util::expect_array(r.required("edges"), r.at("edges"));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    std::string at = json_util::join_pointer(r.at("edges"), i);
    json_util::ObjectReader er(edges[i], at);
    std::string from = er.string("from"), to = er.string("to"), kind = er.string("kind");
    er.finish();
    if (kind != "dependent" && kind != "independent") json_util::schema_error(er.at("kind"), "unknown relation kind");
    if (std::any_of(g.edges.begin(), g.edges.end(), [&](const RelationEdge& e) { return same_pair(e, from, to); }))
      json_util::schema_error(at, "more than one edge for the pair " + from + "/" + to);
    g = set_relation(g, from, to, kind == "dependent" ? SetRelation::Dependent : SetRelation::Independent);
  }
  r.finish();
  return g;
}

NarrativeSequence sequence_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  NarrativeSequence s;
  const Json& order = json_util::expect_array(r.required("order"), r.at("order"));
  for (std::size_t i = 0; i < order.size(); ++i)
    s.order.push_back(json_util::expect_string(order[i], json_util::join_pointer(r.at("order"), i)));
  std::string prov = r.string("provenance");
  if (prov == "suggested")
    s.provenance = SequenceProvenance::Suggested;
  else if (prov == "author_adjusted")
    s.provenance = SequenceProvenance::AuthorAdjusted;
  else
    json_util::schema_error(r.at("provenance"), "unknown provenance '" + prov + "'");
  r.finish();
  return s;
}

}  // namespace narvis
