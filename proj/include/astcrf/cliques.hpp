#pragma once

// Node, edge and triangle cliques of the transform random field.

#include <compare>
#include <string>
#include <vector>

#include "astcrf/ast.hpp"

namespace astcrf {

enum class CliqueKind : int { Node = 0, Edge = 1, Triangle = 2 };

struct Clique {
  CliqueKind kind = CliqueKind::Node;
  /// (p), (parent, child) or (left, right) sibling pair, (parent, left, right).
  std::vector<int> members;
  /// For edges: true when the members are immediate siblings.
  bool sibling = false;

  auto operator<=>(const Clique&) const = default;
  int arity() const noexcept { return static_cast<int>(members.size()); }
};

inline std::string to_string(const Clique& c) {
  std::string s = c.kind == CliqueKind::Node ? "N(" : c.kind == CliqueKind::Edge ? "E(" : "T(";
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(c.members[i]);
  }
  return s + ")";
}

/// Node cliques in position order, then edges (parent-child edges of each
/// parent followed by its sibling edges), then triangles, parents visited in
/// position order.
inline std::vector<Clique> build_clique_graph(const Ast& ast) {
  TreeIndex idx(ast);
  std::vector<Clique> nodes, edges, triangles;
  for (int p = 1; p <= idx.size(); ++p) {
    nodes.push_back({CliqueKind::Node, {p}, false});
    const auto ch = idx.children(p);
    for (int c : ch) edges.push_back({CliqueKind::Edge, {p, c}, false});
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      edges.push_back({CliqueKind::Edge, {ch[i], ch[i + 1]}, true});
      triangles.push_back({CliqueKind::Triangle, {p, ch[i], ch[i + 1]}, false});
    }
  }
  std::vector<Clique> out = std::move(nodes);
  out.insert(out.end(), edges.begin(), edges.end());
  out.insert(out.end(), triangles.begin(), triangles.end());
  return out;
}

}  // namespace astcrf
