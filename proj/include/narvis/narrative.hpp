#pragma once

#include <string>
#include <vector>

#include "narvis/json_util.hpp"

namespace narvis {

enum class RelationKind { Dependent, Independent };

/// For dependent edges `from` is the prerequisite: `to` depends on `from`.
/// Independent edges are unordered; they are stored as inserted.
struct RelationEdge {
  std::string from;
  std::string to;
  RelationKind kind = RelationKind::Dependent;
  bool operator==(const RelationEdge&) const = default;
};

struct RelationGraph {
  std::vector<std::string> units;  // insertion order
  std::vector<RelationEdge> edges;
  bool operator==(const RelationGraph&) const = default;
};

enum class SetRelation { Dependent, Independent, None };

enum class SequenceProvenance { Suggested, AuthorAdjusted };

struct NarrativeSequence {
  std::vector<std::string> order;
  SequenceProvenance provenance = SequenceProvenance::Suggested;
  bool operator==(const NarrativeSequence&) const = default;
};

RelationGraph make_graph(std::vector<std::string> units);

/// With SetRelation::Dependent, `a` is the prerequisite and `b` depends on it.
/// Any existing edge on the pair is replaced. Throws CycleIntroduced listing
/// the units of the would-be cycle (starting at `b`), UnknownUnit or
/// SelfRelation.
RelationGraph set_relation(const RelationGraph& graph, const std::string& a, const std::string& b, SetRelation kind);

/// Kahn's algorithm; among ready units prefer one independent-linked to the
/// unit emitted last, then the earliest inserted.
NarrativeSequence suggest_sequence(const RelationGraph& graph);

/// Dependent edges whose prerequisite comes after its dependent. Throws
/// NotAPermutation when `order` is not a permutation of graph.units.
std::vector<RelationEdge> validate_sequence(const RelationGraph& graph, const std::vector<std::string>& order);

/// Validates and returns an author-adjusted sequence; throws
/// DependencyViolation (items = "from->to" per violated edge).
NarrativeSequence adjust_sequence(const RelationGraph& graph, const std::vector<std::string>& order);

/// Independent pairs that are not adjacent in `order`, for UI notices.
std::vector<RelationEdge> nonadjacent_independent_pairs(const RelationGraph& graph,
                                                        const std::vector<std::string>& order);

std::string_view to_string(RelationKind kind);
std::string_view to_string(SequenceProvenance p);

Json to_json(const RelationGraph& g);
Json to_json(const NarrativeSequence& s);
Json to_json(const RelationEdge& e);
RelationGraph graph_from_json(const Json& j, const std::string& pointer = "");
NarrativeSequence sequence_from_json(const Json& j, const std::string& pointer = "");

}  // namespace narvis
