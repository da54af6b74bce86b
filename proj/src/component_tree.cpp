#include "narvis/component_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "narvis/error.hpp"

namespace narvis {

namespace {

using Indices = std::vector<std::size_t>;

struct Bucket {
  std::string label;
  ClusterBasis basis;
  Indices members;
};

// Partition `members` by `key`, keeping first-appearance order.
template <typename KeyFn, typename LabelFn>
std::vector<Bucket> partition(const std::vector<VisualPrimitive>& prims, const Indices& members, KeyFn key,
                              LabelFn label, ClusterBasis basis) {
  std::vector<Bucket> out;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i : members) {
    std::string k = key(prims[i]);
    auto [it, inserted] = slot.try_emplace(k, out.size());
    if (inserted) out.push_back({label(prims[i]), basis, {}});
    out[it->second].members.push_back(i);
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool has_signature(const VisualPrimitive& p) { return !p.group_chain.empty() || !p.css_classes.empty(); }

std::string group_display(const VisualPrimitive& p) {
  if (!p.css_classes.empty()) return join(p.css_classes, " ");
  if (p.group_chain.empty()) return "ungrouped";
  std::string last = p.group_chain.back();
  if (!last.empty() && (last[0] == '#' || last[0] == '.')) last.erase(0, 1);
  return last;
}

void dedupe_labels(std::vector<ClusterNode>& siblings) {
  std::set<std::string> used;
  for (auto& node : siblings) {
    std::string base = node.label;
    for (int n = 2; used.contains(node.label); ++n) node.label = base + " (" + std::to_string(n) + ")";
    used.insert(node.label);
  }
}

// Returns the buckets of the first level at or below `level` that separates
// the members into at least two signatures.
std::pair<int, std::vector<Bucket>> next_split(const std::vector<VisualPrimitive>& prims, const Indices& members,
                                               int level) {
  for (; level <= 3; ++level) {
    std::vector<Bucket> buckets;
    if (level == 1) {
      bool any = std::any_of(members.begin(), members.end(), [&](std::size_t i) { return has_signature(prims[i]); });
      if (!any) continue;
      buckets = partition(
          prims, members,
          [](const VisualPrimitive& p) { return join(p.group_chain, "/") + "|" + join(p.css_classes, " "); },
          group_display, ClusterBasis::Group);
      // Class-derived buckets carry the class basis.
      for (auto& b : buckets)
        if (!prims[b.members.front()].css_classes.empty()) b.basis = ClusterBasis::Class;
    } else if (level == 2) {
      buckets = partition(
          prims, members, [](const VisualPrimitive& p) { return p.element_type; },
          [](const VisualPrimitive& p) { return p.element_type; }, ClusterBasis::ElementType);
    } else {
      std::set<std::string> shapes;
      for (std::size_t i : members) shapes.insert(prims[i].channels.shape_class);
      const bool show_shape = shapes.size() > 1;
      buckets = partition(
          prims, members,
          [](const VisualPrimitive& p) {
            return p.channels.fill + "|" + p.channels.stroke + "|" + p.channels.shape_class;
          },
          [show_shape](const VisualPrimitive& p) {
            std::string l = "fill " + p.channels.fill + ", stroke " + p.channels.stroke;
            if (show_shape) l += ", " + p.channels.shape_class;
            return l;
          },
          ClusterBasis::Appearance);
    }
    if (buckets.size() > 1) return {level, std::move(buckets)};
  }
  return {4, {}};
}

ClusterNode make_node(const std::vector<VisualPrimitive>& prims, std::string label, ClusterBasis basis,
                      const Indices& members, int level) {
  ClusterNode node{.node_id = {}, .label = std::move(label), .basis = basis, .children = {}, .primitive_ids = {}};
  auto [found, buckets] = next_split(prims, members, level);
  if (buckets.empty()) {
    for (std::size_t i : members) node.primitive_ids.push_back(prims[i].id);
    return node;
  }
  for (auto& b : buckets) node.children.push_back(make_node(prims, b.label, b.basis, b.members, found + 1));
  dedupe_labels(node.children);
  return node;
}

void assign_ids(ClusterNode& node, int& counter) {
  node.node_id = "n" + std::to_string(counter++);
  for (auto& c : node.children) assign_ids(c, counter);
}

int max_node_number(const ClusterNode& node) {
  int best = -1;
  if (node.node_id.size() > 1 && node.node_id[0] == 'n' &&
      std::all_of(node.node_id.begin() + 1, node.node_id.end(), [](char c) { return std::isdigit(c); }))
    best = std::stoi(node.node_id.substr(1));
  for (const auto& c : node.children) best = std::max(best, max_node_number(c));
  return best;
}

void collect_leaves(const ClusterNode& node, std::vector<std::string>& out) {
  if (node.is_leaf()) {
    out.insert(out.end(), node.primitive_ids.begin(), node.primitive_ids.end());
    return;
  }
  for (const auto& c : node.children) collect_leaves(c, out);
}

// Path of child indices from the root to `node_id`; nullopt when absent.
bool locate(const ClusterNode& node, const std::string& id, std::vector<std::size_t>& path) {
  if (node.node_id == id) return true;
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    if (locate(node.children[i], id, path)) return true;
    path.pop_back();
  }
  return false;
}

ClusterNode& node_at(ClusterNode& root, const std::vector<std::size_t>& path, std::size_t depth) {
  ClusterNode* n = &root;
  for (std::size_t i = 0; i < depth; ++i) n = &n->children[path[i]];
  return *n;
}

std::vector<std::size_t> require_path(const ComponentTree& tree, const std::string& id) {
  std::vector<std::size_t> path;
  if (!locate(tree.root, id, path)) throw Error(ErrorCode::UnknownNode, "unknown tree node '" + id + "'", id);
  return path;
}

bool inside_removed(const ComponentTree& tree, const std::vector<std::size_t>& path) {
  return !path.empty() && tree.root.children[path[0]].node_id == kRemovedNodeId;
}

void require_unique_label(const ClusterNode& parent, const std::string& label, const ClusterNode* self) {
  for (const auto& sib : parent.children)
    if (&sib != self && sib.label == label)
      throw Error(ErrorCode::InvariantViolation, "label '" + label + "' already used by a sibling");
}

ComponentTree apply(const ComponentTree& tree, const tree_edit::Split& e) {
  auto path = require_path(tree, e.node_id);
  if (path.empty()) throw Error(ErrorCode::InvariantViolation, "the root node cannot be split", e.node_id);
  if (inside_removed(tree, path))
    throw Error(ErrorCode::InvariantViolation, "removed primitives cannot be split", e.node_id);
  if (e.parts.size() < 2) throw Error(ErrorCode::InvalidPartition, "a split needs at least two parts", e.node_id);
  ComponentTree out = tree;
  ClusterNode& node = node_at(out.root, path, path.size());
  std::vector<std::string> leaves;
  collect_leaves(node, leaves);
  std::set<std::string> expected(leaves.begin(), leaves.end()), seen;
  for (const auto& part : e.parts) {
    if (part.empty()) throw Error(ErrorCode::InvalidPartition, "split parts must be nonempty", e.node_id);
    for (const auto& id : part) {
      if (!expected.contains(id))
        throw Error(ErrorCode::InvalidPartition, "primitive '" + id + "' is not under node " + e.node_id, e.node_id);
      if (!seen.insert(id).second)
        throw Error(ErrorCode::InvalidPartition, "primitive '" + id + "' appears in two parts", e.node_id);
    }
  }
  if (seen.size() != expected.size())
    throw Error(ErrorCode::InvalidPartition, "split parts omit some primitives of node " + e.node_id, e.node_id);
  int next = max_node_number(out.root) + 1;
  node.children.clear();
  node.primitive_ids.clear();
  node.basis = ClusterBasis::Manual;
  for (std::size_t i = 0; i < e.parts.size(); ++i) {
    node.children.push_back({.node_id = "n" + std::to_string(next++),
                             .label = "part " + std::to_string(i + 1),
                             .basis = ClusterBasis::Manual,
                             .children = {},
                             .primitive_ids = e.parts[i]});
  }
  return out;
}

ComponentTree apply(const ComponentTree& tree, const tree_edit::Merge& e) {
  if (e.node_ids.size() < 2) throw Error(ErrorCode::NotSiblings, "a merge needs at least two nodes");
  if (e.new_label.empty()) throw Error(ErrorCode::InvariantViolation, "merged node needs a label");
  std::vector<std::vector<std::size_t>> paths;
  for (const auto& id : e.node_ids) paths.push_back(require_path(tree, id));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    if (p.empty()) throw Error(ErrorCode::NotSiblings, "the root node cannot be merged", e.node_ids[i]);
    if (inside_removed(tree, p))
      throw Error(ErrorCode::InvariantViolation, "removed primitives cannot be merged", e.node_ids[i]);
    if (p.size() != paths[0].size() || !std::equal(p.begin(), p.end() - 1, paths[0].begin()))
      throw Error(ErrorCode::NotSiblings, "nodes to merge must share a parent", e.node_ids[i]);
  }
  std::set<std::size_t> idx;
  for (const auto& p : paths)
    if (!idx.insert(p.back()).second) throw Error(ErrorCode::NotSiblings, "a node is listed twice in the merge");

  ComponentTree out = tree;
  ClusterNode& parent = node_at(out.root, paths[0], paths[0].size() - 1);
  ClusterNode merged{.node_id = "n" + std::to_string(max_node_number(out.root) + 1),
                     .label = e.new_label,
                     .basis = ClusterBasis::Manual,
                     .children = {},
                     .primitive_ids = {}};
  const bool all_leaves = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return parent.children[i].is_leaf(); });
  std::vector<ClusterNode> kept;
  std::size_t insert_at = *idx.begin();
  for (std::size_t i = 0; i < parent.children.size(); ++i) {
    ClusterNode& c = parent.children[i];
    if (!idx.contains(i)) {
      kept.push_back(std::move(c));
      continue;
    }
    if (all_leaves) {
      merged.primitive_ids.insert(merged.primitive_ids.end(), c.primitive_ids.begin(), c.primitive_ids.end());
    } else if (c.is_leaf()) {
      merged.children.push_back(std::move(c));
    } else {
      for (auto& g : c.children) merged.children.push_back(std::move(g));
    }
  }
  dedupe_labels(merged.children);
  for (const auto& k : kept)
    if (k.label == merged.label)
      throw Error(ErrorCode::InvariantViolation, "label '" + merged.label + "' already used by a sibling");
  kept.insert(kept.begin() + static_cast<std::ptrdiff_t>(std::min(insert_at, kept.size())), std::move(merged));
  parent.children = std::move(kept);
  return out;
}

ComponentTree apply(const ComponentTree& tree, const tree_edit::Remove& e) {
  auto path = require_path(tree, e.node_id);
  if (path.empty()) throw Error(ErrorCode::InvariantViolation, "the root node cannot be removed", e.node_id);
  if (inside_removed(tree, path))
    throw Error(ErrorCode::InvariantViolation, "node is already removed", e.node_id);
  ComponentTree out = tree;
  ClusterNode& target = node_at(out.root, path, path.size());
  std::vector<std::string> ids;
  collect_leaves(target, ids);

  // Detach, then prune ancestors left without children (never the root).
  std::size_t depth = path.size();
  while (depth > 0) {
    ClusterNode& parent = node_at(out.root, path, depth - 1);
    parent.children.erase(parent.children.begin() + static_cast<std::ptrdiff_t>(path[depth - 1]));
    if (!parent.children.empty() || depth - 1 == 0) break;
    --depth;
  }

  auto holder = std::find_if(out.root.children.begin(), out.root.children.end(),
                             [](const ClusterNode& c) { return c.node_id == kRemovedNodeId; });
  if (holder == out.root.children.end()) {
    out.root.children.push_back({.node_id = std::string(kRemovedNodeId),
                                 .label = "removed",
                                 .basis = ClusterBasis::Manual,
                                 .children = {},
                                 .primitive_ids = {}});
    holder = out.root.children.end() - 1;
  } else {
    // Keep the holder last so candidate order stays stable.
    std::rotate(holder, holder + 1, out.root.children.end());
    holder = out.root.children.end() - 1;
  }
  holder->primitive_ids.insert(holder->primitive_ids.end(), ids.begin(), ids.end());
  return out;
}

ComponentTree apply(const ComponentTree& tree, const tree_edit::Rename& e) {
  auto path = require_path(tree, e.node_id);
  if (inside_removed(tree, path))
    throw Error(ErrorCode::InvariantViolation, "the removed holder cannot be renamed", e.node_id);
  if (e.label.empty()) throw Error(ErrorCode::InvariantViolation, "labels must be nonempty", e.node_id);
  ComponentTree out = tree;
  ClusterNode& node = node_at(out.root, path, path.size());
  if (!path.empty()) require_unique_label(node_at(out.root, path, path.size() - 1), e.label, &node);
  node.label = e.label;
  node.basis = ClusterBasis::Manual;
  return out;
}

}  // namespace

std::string_view to_string(ClusterBasis basis) {
  switch (basis) {
    case ClusterBasis::Group: return "group";
    case ClusterBasis::Class: return "class";
    case ClusterBasis::ElementType: return "element_type";
    case ClusterBasis::Appearance: return "appearance";
    case ClusterBasis::Manual: return "manual";
  }
  return "manual";
}

ClusterBasis parse_cluster_basis(std::string_view text, const std::string& pointer) {
  for (auto b : {ClusterBasis::Group, ClusterBasis::Class, ClusterBasis::ElementType, ClusterBasis::Appearance,
                 ClusterBasis::Manual})
    if (to_string(b) == text) return b;
  json_util::schema_error(pointer, "unknown basis '" + std::string(text) + "'");
}

ComponentTree build_tree(const std::vector<VisualPrimitive>& primitives, std::string doc_id) {
  if (primitives.empty()) throw Error(ErrorCode::EmptyInput, "cannot build a component tree without primitives");
  std::set<std::string> ids;
  for (const auto& p : primitives)
    if (!ids.insert(p.id).second) throw Error(ErrorCode::InvariantViolation, "duplicate primitive id " + p.id);
  Indices all(primitives.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  ComponentTree tree;
  tree.doc_id = std::move(doc_id);
  tree.root = make_node(primitives, "svg", ClusterBasis::Group, all, 1);
  if (tree.root.is_leaf()) {
    // Keep candidates below the root even when nothing splits.
    ClusterNode only{.node_id = {},
                     .label = primitives.front().element_type,
                     .basis = ClusterBasis::ElementType,
                     .children = {},
                     .primitive_ids = std::move(tree.root.primitive_ids)};
    tree.root.primitive_ids.clear();
    tree.root.children.push_back(std::move(only));
  }
  int counter = 0;
  assign_ids(tree.root, counter);
  return tree;
}

ComponentTree edit_tree(const ComponentTree& tree, const TreeEdit& edit) {
  return std::visit([&](const auto& e) { return apply(tree, e); }, edit);
}

const ClusterNode* find_node(const ComponentTree& tree, const std::string& node_id) {
  std::vector<std::size_t> path;
  if (!locate(tree.root, node_id, path)) return nullptr;
  const ClusterNode* n = &tree.root;
  for (std::size_t i : path) n = &n->children[i];
  return n;
}

std::vector<std::string> descendants_of(const ComponentTree& tree, const std::string& node_id) {
  const ClusterNode* n = find_node(tree, node_id);
  if (!n) throw Error(ErrorCode::UnknownNode, "unknown tree node '" + node_id + "'", node_id);
  std::vector<std::string> out;
  collect_leaves(*n, out);
  return out;
}

std::vector<const ClusterNode*> unit_candidates(const ComponentTree& tree) {
  std::vector<const ClusterNode*> out;
  for (const auto& c : tree.root.children)
    if (c.node_id != kRemovedNodeId) out.push_back(&c);
  return out;
}

std::vector<VisualUnit> select_units(const ComponentTree& tree, const std::vector<UnitSelection>& selections) {
  std::vector<std::vector<std::size_t>> paths;
  for (const auto& sel : selections) {
    auto path = require_path(tree, sel.node_id);
    if (inside_removed(tree, path))
      throw Error(ErrorCode::InvariantViolation, "removed primitives cannot form a unit", sel.node_id);
    if (sel.name.empty()) throw Error(ErrorCode::InvariantViolation, "unit names must be nonempty", sel.node_id);
    paths.push_back(std::move(path));
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = 0; j < paths.size(); ++j) {
      if (i == j) continue;
      const auto& a = paths[i];
      const auto& b = paths[j];
      if (a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin()))
        throw Error(ErrorCode::NestedSelection,
                    "selected nodes " + selections[i].node_id + " and " + selections[j].node_id + " are nested",
                    selections[j].node_id, {selections[i].node_id, selections[j].node_id});
    }
  }
  std::vector<VisualUnit> units;
  for (const auto& sel : selections) {
    units.push_back({.unit_id = "u-" + sel.node_id,
                     .name = sel.name,
                     .primitive_ids = descendants_of(tree, sel.node_id),
                     .source_node = sel.node_id});
  }
  return units;
}

Json to_json(const ClusterNode& node) {
  Json children = Json::array();
  for (const auto& c : node.children) children.push_back(to_json(c));
  return Json{{"node_id", node.node_id},
              {"label", node.label},
              {"basis", to_string(node.basis)},
              {"children", std::move(children)},
              {"primitive_ids", node.primitive_ids}};
}

Json to_json(const ComponentTree& tree) { return Json{{"doc_id", tree.doc_id}, {"root", to_json(tree.root)}}; }

Json to_json(const VisualUnit& unit) {
  return Json{{"unit_id", unit.unit_id},
              {"name", unit.name},
              {"primitive_ids", unit.primitive_ids},
              {"source_node", unit.source_node}};
}

namespace {

std::vector<std::string> string_list(const Json& j, const std::string& pointer) {
  json_util::expect_array(j, pointer);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(json_util::expect_string(j[i], json_util::join_pointer(pointer, i)));
  return out;
}

}  // namespace

ClusterNode cluster_node_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  ClusterNode n;
  n.node_id = r.string("node_id");
  n.label = r.string("label");
  n.basis = parse_cluster_basis(r.string("basis"), r.at("basis"));
  const Json& children = json_util::expect_array(r.required("children"), r.at("children"));
  for (std::size_t i = 0; i < children.size(); ++i)
    n.children.push_back(cluster_node_from_json(children[i], json_util::join_pointer(r.at("children"), i)));
  n.primitive_ids = string_list(r.required("primitive_ids"), r.at("primitive_ids"));
  r.finish();
  if (!n.children.empty() && !n.primitive_ids.empty())
    json_util::schema_error(r.at("primitive_ids"), "internal nodes carry no primitives");
  if (n.children.empty() && n.primitive_ids.empty())
    json_util::schema_error(r.at("primitive_ids"), "leaf nodes carry primitives");
  return n;
}

ComponentTree tree_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  ComponentTree t;
  t.doc_id = r.string("doc_id");
  t.root = cluster_node_from_json(r.required("root"), r.at("root"));
  r.finish();
  return t;
}

VisualUnit unit_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  VisualUnit u;
  u.unit_id = r.string("unit_id");
  u.name = r.string("name");
  u.primitive_ids = string_list(r.required("primitive_ids"), r.at("primitive_ids"));
  u.source_node = r.string("source_node");
  r.finish();
  if (u.primitive_ids.empty()) json_util::schema_error(r.at("primitive_ids"), "a unit needs primitives");
  return u;
}

TreeEdit tree_edit_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  std::string op = r.string("op");
  TreeEdit edit;
  if (op == "split") {
    tree_edit::Split s{r.string("node_id"), {}};
    const Json& parts = json_util::expect_array(r.required("parts"), r.at("parts"));
    for (std::size_t i = 0; i < parts.size(); ++i)
      s.parts.push_back(string_list(parts[i], json_util::join_pointer(r.at("parts"), i)));
    edit = std::move(s);
  } else if (op == "merge") {
    edit = tree_edit::Merge{string_list(r.required("node_ids"), r.at("node_ids")), r.string("label")};
  } else if (op == "remove") {
    edit = tree_edit::Remove{r.string("node_id")};
  } else if (op == "rename") {
    edit = tree_edit::Rename{r.string("node_id"), r.string("label")};
  } else {
    json_util::schema_error(r.at("op"), "unknown tree edit '" + op + "'");
  }
  r.finish();
  return edit;
}

}  // namespace narvis
