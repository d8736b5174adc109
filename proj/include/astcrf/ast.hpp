#pragma once

// Ordered labeled trees with values and semantic attributes, plus the JSON
// ingestion format used by every other module.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "astcrf/error.hpp"
#include "json.hpp"

namespace astcrf {

using Json = nlohmann::json;

/// Closed node-label alphabet.
enum class Label : int {
  VirtualRoot = 0,
  Statement,
  Block,
  Argument,
  Unknown,
  VariableAccess,
  FieldAccess,
  MethodCall,
  BinaryOperator,
  LogicalOperator,
  UnaryOperator,
  Literal,
  Assignment,
  Return,
  If,
  Then,
  Else,
  Try,
  Catch,
  TernaryOperator,
};

inline constexpr std::size_t kLabelCount = 20;

inline constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "VirtualRoot",    "Statement",       "Block",         "Argument",
    "Unknown",        "VariableAccess",  "FieldAccess",   "MethodCall",
    "BinaryOperator", "LogicalOperator", "UnaryOperator", "Literal",
    "Assignment",     "Return",          "If",            "Then",
    "Else",           "Try",             "Catch",         "TernaryOperator",
};

inline std::string_view to_string(Label label) {
  return kLabelNames.at(static_cast<std::size_t>(label));
}

inline std::optional<Label> label_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kLabelNames[i] == name) return static_cast<Label>(i);
  }
  return std::nullopt;
}

inline std::string label_alphabet_listing() {
  std::string out;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (i) out += ", ";
    out += kLabelNames[i];
  }
  return out;
}

struct Node {
  int position = 0;
  Label label = Label::Unknown;
  std::optional<std::string> value;
  Json attrs = Json::object();
  std::vector<Node> children;

  bool is_leaf() const noexcept { return children.empty(); }

  /// Boolean attribute lookup; absent or non-boolean attributes read as false.
  bool flag(std::string_view name) const {
    auto it = attrs.find(std::string(name));
    return it != attrs.end() && it->is_boolean() && it->get<bool>();
  }

  /// String attribute lookup; absent or non-string attributes read as empty.
  std::optional<std::string> text_attr(std::string_view name) const {
    auto it = attrs.find(std::string(name));
    if (it == attrs.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  }
};

struct Ast {
  Node root;
  std::string source_id;
  int node_count = 0;
};

namespace detail {

inline int count_nodes(const Node& node) {
  int n = 1;
  for (const auto& c : node.children) n += count_nodes(c);
  return n;
}

inline void assign_preorder(Node& node, int& next) {
  node.position = next++;
  for (auto& c : node.children) assign_preorder(c, next);
}

}  // namespace detail

/// Assigns positions 1..Q in pre-order and refreshes node_count.
inline Ast index_preorder(Ast ast) {
  int next = 1;
  detail::assign_preorder(ast.root, next);
  ast.node_count = next - 1;
  return ast;
}

/// Flat, position-indexed read-only view over an Ast. Slot 0 is unused so
/// that `node(p)` and `parent(p)` take pre-order positions directly.
class TreeIndex {
 public:
  explicit TreeIndex(const Ast& ast) {
    nodes_.assign(static_cast<std::size_t>(ast.node_count) + 1, nullptr);
    parent_.assign(nodes_.size(), 0);
    child_index_.assign(nodes_.size(), 0);
    walk(ast.root, 0, 0);
  }

  int size() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
  const Node& node(int position) const { return *nodes_.at(position); }
  Label label(int position) const { return node(position).label; }
  /// 0 for the root.
  int parent(int position) const { return parent_.at(position); }
  /// 0-based index of the node among its parent's children.
  int child_index(int position) const { return child_index_.at(position); }

  std::vector<int> children(int position) const {
    std::vector<int> out;
    for (const auto& c : node(position).children) out.push_back(c.position);
    return out;
  }

  bool is_ancestor(int ancestor, int position) const {
    for (int p = parent(position); p != 0; p = parent(p)) {
      if (p == ancestor) return true;
    }
    return false;
  }

 private:
  void walk(const Node& n, int parent, int index) {
    if (n.position <= 0 || n.position >= static_cast<int>(nodes_.size()) ||
        nodes_[n.position] != nullptr) {
      throw Error("tree is not pre-order indexed");
    }
    nodes_[n.position] = &n;
    parent_[n.position] = parent;
    child_index_[n.position] = index;
    int i = 0;
    for (const auto& c : n.children) walk(c, n.position, i++);
  }

  std::vector<const Node*> nodes_;
  std::vector<int> parent_;
  std::vector<int> child_index_;
};

// ---------------------------------------------------------------------------
// Ingestion format
// ---------------------------------------------------------------------------

namespace detail {

inline Node node_from_json(const Json& j, std::vector<std::string>& ancestor_ids,
                           const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": node must be an object");
  if (j.contains("ref")) {
    const std::string ref =
        j["ref"].is_string() ? j["ref"].get<std::string>() : j["ref"].dump();
    for (const auto& id : ancestor_ids) {
      if (id == ref) {
        throw ParseError(path + ": cycle, child references ancestor id '" + ref + "'");
      }
    }
    throw ParseError(path + ": shared node reference '" + ref + "' is not allowed in a tree");
  }
  Node node;
  auto lab = j.find("label");
  if (lab == j.end() || !lab->is_string()) {
    throw ParseError(path + ": missing string field 'label'");
  }
  auto label = label_from_string(lab->get<std::string>());
  if (!label) {
    throw ParseError(path + ": unknown label '" + lab->get<std::string>() +
                     "'; expected one of: " + label_alphabet_listing());
  }
  node.label = *label;
  if (auto v = j.find("value"); v != j.end() && !v->is_null()) {
    if (!v->is_string()) throw ParseError(path + ": 'value' must be a string or null");
    node.value = v->get<std::string>();
  }
  if (auto a = j.find("attrs"); a != j.end() && !a->is_null()) {
    if (!a->is_object()) throw ParseError(path + ": 'attrs' must be an object");
    node.attrs = *a;
  }
  bool pushed = false;
  if (auto id = j.find("id"); id != j.end()) {
    ancestor_ids.push_back(id->is_string() ? id->get<std::string>() : id->dump());
    pushed = true;
  }
  if (auto ch = j.find("children"); ch != j.end() && !ch->is_null()) {
    if (!ch->is_array()) throw ParseError(path + ": 'children' must be an array");
    for (std::size_t i = 0; i < ch->size(); ++i) {
      node.children.push_back(
          node_from_json((*ch)[i], ancestor_ids, path + ".children[" + std::to_string(i) + "]"));
    }
  }
  if (pushed) ancestor_ids.pop_back();
  if (node.label == Label::VirtualRoot &&
      (node.value.has_value() || node.children.size() != 1)) {
    throw ParseError(path + ": VirtualRoot must have a null value and exactly one child");
  }
  return node;
}

inline Json node_to_json(const Node& n) {
  Json j = Json::object();
  j["label"] = std::string(to_string(n.label));
  j["value"] = n.value ? Json(*n.value) : Json(nullptr);
  if (!n.attrs.empty()) j["attrs"] = n.attrs;
  Json ch = Json::array();
  for (const auto& c : n.children) ch.push_back(node_to_json(c));
  j["children"] = std::move(ch);
  return j;
}

}  // namespace detail

inline Ast ast_from_json(const Json& j) {
  std::vector<std::string> ids;
  Ast ast;
  ast.root = detail::node_from_json(j, ids, "$");
  if (auto s = j.find("source_id"); s != j.end() && s->is_string()) {
    ast.source_id = s->get<std::string>();
  }
  return index_preorder(std::move(ast));
}

inline Json ast_to_json(const Ast& ast) {
  Json j = detail::node_to_json(ast.root);
  if (!ast.source_id.empty()) j["source_id"] = ast.source_id;
  return j;
}

/// Parses one tree document. Syntax errors carry the line/column reported by
/// the JSON reader.
inline Ast parse_ast_document(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed AST document: ") + e.what());
  }
  return ast_from_json(j);
}

inline std::string serialize_ast(const Ast& ast, int indent = -1) {
  return ast_to_json(ast).dump(indent);
}

/// Shape, labels and values equal; positions and attrs are ignored.
inline bool isomorphic(const Node& a, const Node& b) {
  if (a.label != b.label || a.value != b.value || a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!isomorphic(a.children[i], b.children[i])) return false;
  }
  return true;
}

inline bool isomorphic(const Ast& a, const Ast& b) { return isomorphic(a.root, b.root); }

/// Like isomorphic() but attrs must match as well.
inline bool identical(const Node& a, const Node& b) {
  if (a.attrs != b.attrs || a.label != b.label || a.value != b.value ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!identical(a.children[i], b.children[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Virtual statement roots
// ---------------------------------------------------------------------------

inline constexpr std::string_view kStatementRootAttr = "statement_root";

namespace detail {

inline Node wrap_statements(Node node, bool parent_is_virtual) {
  for (auto& c : node.children) {
    c = wrap_statements(std::move(c), node.label == Label::VirtualRoot);
  }
  if (node.flag(kStatementRootAttr) && !parent_is_virtual && node.label != Label::VirtualRoot) {
    Node vr;
    vr.label = Label::VirtualRoot;
    vr.children.push_back(std::move(node));
    return vr;
  }
  return node;
}

}  // namespace detail

/// Inserts a VirtualRoot above every node flagged `statement_root`, unless
/// the node already sits under one. Idempotent.
inline Ast insert_virtual_roots(Ast ast) {
  ast.root = detail::wrap_statements(std::move(ast.root), false);
  return index_preorder(std::move(ast));
}

/// Maps each position of `original` to its position after
/// insert_virtual_roots(original). Index 0 is unused.
inline std::vector<int> virtual_root_position_map(const Ast& original) {
  std::vector<int> map(static_cast<std::size_t>(original.node_count) + 1, 0);
  int next = 1;
  auto walk = [&](auto&& self, const Node& n, bool parent_is_virtual) -> void {
    if (n.flag(kStatementRootAttr) && !parent_is_virtual && n.label != Label::VirtualRoot) {
      ++next;  // the inserted VirtualRoot
    }
    map[n.position] = next++;
    for (const auto& c : n.children) self(self, c, n.label == Label::VirtualRoot);
  };
  walk(walk, original.root, false);
  return map;
}

}  // namespace astcrf
