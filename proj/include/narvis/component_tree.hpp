#pragma once

#include <string>
#include <variant>
#include <vector>

#include "narvis/json_util.hpp"
#include "narvis/svg.hpp"

namespace narvis {

enum class ClusterBasis { Group, Class, ElementType, Appearance, Manual };

std::string_view to_string(ClusterBasis basis);
ClusterBasis parse_cluster_basis(std::string_view text, const std::string& pointer);

struct ClusterNode {
  std::string node_id;
  std::string label;
  ClusterBasis basis = ClusterBasis::Group;
  std::vector<ClusterNode> children;
  std::vector<std::string> primitive_ids;  // leaves only

  bool is_leaf() const { return children.empty(); }
  bool operator==(const ClusterNode&) const = default;
};

/// Hierarchical clustering of one document's primitives. Root children are
/// the unit candidates; primitives detached by `remove` live in a top-level
/// holder with node_id "removed".
struct ComponentTree {
  ClusterNode root;
  std::string doc_id;
  bool operator==(const ComponentTree&) const = default;
};

inline constexpr std::string_view kRemovedNodeId = "removed";

struct VisualUnit {
  std::string unit_id;
  std::string name;
  std::vector<std::string> primitive_ids;
  std::string source_node;
  bool operator==(const VisualUnit&) const = default;
};

/// Levels: (group chain, classes) → element type → (fill, stroke, shape class).
/// A level only splits when it separates at least two signatures; single-child
/// chains below the root are collapsed keeping the deepest node.
ComponentTree build_tree(const std::vector<VisualPrimitive>& primitives, std::string doc_id = "doc");

namespace tree_edit {
struct Split {
  std::string node_id;
  std::vector<std::vector<std::string>> parts;
};
struct Merge {
  std::vector<std::string> node_ids;
  std::string new_label;
};
struct Remove {
  std::string node_id;
};
struct Rename {
  std::string node_id;
  std::string label;
};
}  // namespace tree_edit

using TreeEdit = std::variant<tree_edit::Split, tree_edit::Merge, tree_edit::Remove, tree_edit::Rename>;

ComponentTree edit_tree(const ComponentTree& tree, const TreeEdit& edit);

/// Leaf primitive ids under `node_id`, in tree order.
std::vector<std::string> descendants_of(const ComponentTree& tree, const std::string& node_id);
const ClusterNode* find_node(const ComponentTree& tree, const std::string& node_id);
/// Unit-candidate subtrees: root children other than the removed holder.
std::vector<const ClusterNode*> unit_candidates(const ComponentTree& tree);

struct UnitSelection {
  std::string node_id;
  std::string name;
};

std::vector<VisualUnit> select_units(const ComponentTree& tree, const std::vector<UnitSelection>& selections);

Json to_json(const ClusterNode& node);
Json to_json(const ComponentTree& tree);
Json to_json(const VisualUnit& unit);
ClusterNode cluster_node_from_json(const Json& j, const std::string& pointer = "");
ComponentTree tree_from_json(const Json& j, const std::string& pointer = "");
VisualUnit unit_from_json(const Json& j, const std::string& pointer = "");
TreeEdit tree_edit_from_json(const Json& j, const std::string& pointer = "");

}  // namespace narvis
