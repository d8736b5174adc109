#pragma once

// Tree decomposition of the clique graph. Each parent's children form a fan
// of triangles chained on {p, c_{i+1}}; a child's own fan hangs off the first
// parent-fan clique containing it, with separator {c}.

#include <algorithm>
#include <map>
#include <vector>

#include "astcrf/cliques.hpp"

namespace astcrf {

struct JunctionTree {
  /// Members of each maximal clique. Node 0 is the root; every node's parent
  /// has a smaller index.
  std::vector<std::vector<int>> nodes;
  std::vector<int> parent;
  /// Positions shared with the parent, sorted ascending; empty for the root.
  std::vector<std::vector<int>> separator;
  std::vector<std::vector<int>> children;

  int size() const noexcept { return static_cast<int>(nodes.size()); }
  bool contains(int node, int position) const {
    const auto& m = nodes.at(node);
    return std::find(m.begin(), m.end(), position) != m.end();
  }
};

namespace detail {

inline std::vector<int> sorted_intersection(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

/// Throws if some position's cliques do not form a connected subtree, or a
/// position in `positions` is not covered.
inline void verify_running_intersection(const JunctionTree& jt, int positions) {
  std::vector<int> holders(static_cast<std::size_t>(positions) + 1, 0);
  std::vector<int> links(holders.size(), 0);
  for (int j = 0; j < jt.size(); ++j) {
    for (int p : jt.nodes[j]) {
      if (p < 1 || p > positions) throw Error("junction tree clique references unknown position");
      ++holders[p];
      if (jt.parent[j] >= 0 && jt.contains(jt.parent[j], p)) ++links[p];
    }
  }
  for (int p = 1; p <= positions; ++p) {
    if (holders[p] == 0) throw Error("junction tree does not cover position " + std::to_string(p));
    if (links[p] != holders[p] - 1) {
      throw Error("running intersection violated at position " + std::to_string(p));
    }
  }
}

inline JunctionTree build_junction_tree(const std::vector<Clique>& cliques) {
  int positions = 0;
  std::map<int, std::vector<int>> kids;
  std::map<int, int> parent_of;
  for (const auto& c : cliques) {
    for (int p : c.members) positions = std::max(positions, p);
    if (c.kind == CliqueKind::Edge && !c.sibling) {
      kids[c.members[0]].push_back(c.members[1]);
      parent_of[c.members[1]] = c.members[0];
    }
  }
  JunctionTree jt;
  auto add = [&](std::vector<int> members, int parent) {
    jt.nodes.push_back(members);
    jt.parent.push_back(parent);
    jt.separator.push_back(parent < 0 ? std::vector<int>{}
                                      : detail::sorted_intersection(members, jt.nodes[parent]));
    jt.children.emplace_back();
    if (parent >= 0) jt.children[parent].push_back(jt.size() - 1);
    return jt.size() - 1;
  };

  if (positions == 0) return jt;
  // first fan clique holding each position as a child
  std::map<int, int> home;
  int root = 1;
  while (parent_of.count(root)) root = parent_of[root];
  if (kids.empty()) {
    add({root}, -1);
  }
  for (const auto& [p, ch] : kids) {
    int attach = -1;
    if (auto it = parent_of.find(p); it != parent_of.end()) attach = home.at(p);
    if (ch.size() == 1) {
      const int j = add({p, ch[0]}, attach);
      home.emplace(ch[0], j);
      continue;
    }
    int prev = attach;
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      prev = add({p, ch[i], ch[i + 1]}, prev);
      home.emplace(ch[i], prev);
      home.emplace(ch[i + 1], prev);
    }
  }
  verify_running_intersection(jt, positions);
  return jt;
}

}  // namespace astcrf
