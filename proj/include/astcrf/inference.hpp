#pragma once

// Exact inference on the junction tree: log-partition and clique marginals by
// log-space sum-product, MAP and top-k by k-best max-product.
//
// Rankings compare per-clique log potentials quantized to 2^-32 and summed
// as integers, so equal scores are exactly equal regardless of summation
// route. Ties fall back to lexicographic order of transform ordinals by
// position (EMPTY first).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "astcrf/junction_tree.hpp"
#include "astcrf/model.hpp"

namespace astcrf {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kQuantScale = 4294967296.0;      // 2^32
inline constexpr double kMaxCliquePotential = 65536.0;  // 2^16

/// Sum of the weights of `ids` in the given (ascending) order.
inline double clique_log_potential(const std::vector<int>& ids, const std::vector<double>& weights) {
  double s = 0.0;
  for (int id : ids) s += weights.at(id);
  return s;
}

inline std::int64_t quantize_potential(double phi) {
  if (!(std::abs(phi) <= kMaxCliquePotential)) {
    throw InferenceError("clique potential " + std::to_string(phi) + " outside the rankable range");
  }
  return std::llround(phi * kQuantScale);
}

inline double log_sum_exp(const std::vector<double>& xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

struct CliqueScore {
  bool admissible = true;
  double phi = 0.0;
  std::int64_t quantized = 0;
};

inline bool clique_violated(const Clique& c, const std::vector<Transform>& t, const AdmissibleSets& adm,
                            const TreeIndex& idx) {
  const auto& m = c.members;
  switch (c.kind) {
    case CliqueKind::Node:
      return adm.node_violated(t[0], idx.label(m[0]));
    case CliqueKind::Edge:
      return !c.sibling && adm.edge_violated(t[0], idx.label(m[0]), t[1], idx.label(m[1]));
    case CliqueKind::Triangle:
      return adm.triangle_violated(t[0], idx.label(m[0]), t[1], idx.label(m[1]), t[2], idx.label(m[2]));
  }
  return false;
}

/// Log potential of one clique assignment, computed directly from feature
/// activation and the violation predicates.
inline CliqueScore clique_score(const Clique& c, const std::vector<Transform>& t, const CharacteristicVector& vec,
                                const Model& model, const TreeIndex& idx) {
  CliqueScore s;
  if (clique_violated(c, t, model.admissible, idx)) {
    s.admissible = false;
    s.phi = kNegInf;
    return s;
  }
  std::vector<int> ids;
  for (const auto& [id, v] : activate_features(c, t, vec, model.vocab, idx)) ids.push_back(id);
  s.phi = clique_log_potential(ids, model.weights);
  s.quantized = quantize_potential(s.phi);
  return s;
}

/// Unnormalized log score of a full labeling; -inf when any clique
/// assignment is inadmissible.
inline double score_assignment(const Ast& ast, const TransformLabeling& labeling, const Model& model) {
  if (static_cast<int>(labeling.labels.size()) != ast.node_count) {
    throw InferenceError("labeling does not cover the tree");
  }
  TreeIndex idx(ast);
  const auto vec = node_characteristics(ast);
  double total = 0.0;
  for (const auto& c : build_clique_graph(ast)) {
    std::vector<Transform> t;
    for (int p : c.members) t.push_back(labeling.at(p));
    const auto s = clique_score(c, t, vec, model, idx);
    if (!s.admissible) return kNegInf;
    total += s.phi;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Prepared instance: domains, clique tables and junction-tree index maps.
// Independent of the weights, so training prepares each example once.
// ---------------------------------------------------------------------------

struct TableShape {
  std::vector<int> vars;
  std::vector<int> dims;
  std::vector<int> strides;
  int size = 1;

  TableShape() = default;
  TableShape(std::vector<int> v, const std::vector<std::vector<Transform>>& domain) : vars(std::move(v)) {
    dims.resize(vars.size());
    strides.resize(vars.size());
    for (std::size_t i = vars.size(); i-- > 0;) {
      dims[i] = static_cast<int>(domain.at(vars[i]).size());
      strides[i] = size;
      size *= dims[i];
    }
  }

  int digit(int entry, std::size_t i) const { return (entry / strides[i]) % dims[i]; }
};

/// For every entry of `big`, the index of the matching entry of `small`
/// (whose vars are a subset of big's).
inline std::vector<int> projection(const TableShape& big, const TableShape& small) {
  std::vector<int> where(small.vars.size());
  for (std::size_t s = 0; s < small.vars.size(); ++s) {
    auto it = std::find(big.vars.begin(), big.vars.end(), small.vars[s]);
    if (it == big.vars.end()) throw Error("projection onto vars outside the table");
    where[s] = static_cast<int>(it - big.vars.begin());
  }
  std::vector<int> out(static_cast<std::size_t>(big.size));
  for (int e = 0; e < big.size; ++e) {
    int idx = 0;
    for (std::size_t s = 0; s < small.vars.size(); ++s) idx += big.digit(e, where[s]) * small.strides[s];
    out[e] = idx;
  }
  return out;
}

class InstanceGraph {
 public:
  struct CliqueTable {
    TableShape shape;
    std::vector<char> admissible;
    /// Firing feature ids per entry, ascending.
    std::vector<std::vector<int>> features;
    int home = 0;
    /// JT-home entry -> clique entry
    std::vector<int> from_home;
  };

  struct JtNode {
    TableShape shape;
    TableShape separator;
    /// own entry -> separator entry
    std::vector<int> to_separator;
    /// parent entry -> separator entry (empty for the root)
    std::vector<int> from_parent;
    std::vector<int> cliques;
  };

  InstanceGraph(const Ast& ast, const Model& model)
      : ast_(std::make_shared<const Ast>(ast)), idx_(std::make_shared<const TreeIndex>(*ast_)) {
    const int q = ast_->node_count;
    domain_.assign(static_cast<std::size_t>(q) + 1, {});
    for (int p = 1; p <= q; ++p) {
      const Label l = idx_->label(p);
      if (!model.admissible.knows(l)) {
        warnings_.push_back("label " + std::string(to_string(l)) + " at position " + std::to_string(p) +
                            " unseen in training; domain restricted to EMPTY");
      }
      domain_[p] = model.admissible.node_domain(l);
    }
    const auto vec = node_characteristics(*ast_);
    cliques_ = build_clique_graph(*ast_);
    jt_ = build_junction_tree(cliques_);

    jt_nodes_.resize(static_cast<std::size_t>(jt_.size()));
    for (int j = 0; j < jt_.size(); ++j) {
      auto& n = jt_nodes_[j];
      n.shape = TableShape(jt_.nodes[j], domain_);
      n.separator = TableShape(jt_.separator[j], domain_);
      n.to_separator = projection(n.shape, n.separator);
      if (jt_.parent[j] >= 0) n.from_parent = projection(jt_nodes_[jt_.parent[j]].shape, n.separator);
    }

    std::vector<std::vector<int>> holders(static_cast<std::size_t>(q) + 1);
    for (int j = 0; j < jt_.size(); ++j) {
      for (int p : jt_.nodes[j]) holders[p].push_back(j);
    }
    tables_.resize(cliques_.size());
    for (std::size_t ci = 0; ci < cliques_.size(); ++ci) {
      const auto& c = cliques_[ci];
      auto& t = tables_[ci];
      t.shape = TableShape(c.members, domain_);
      t.admissible.resize(static_cast<std::size_t>(t.shape.size));
      t.features.resize(static_cast<std::size_t>(t.shape.size));
      for (int e = 0; e < t.shape.size; ++e) {
        const auto assignment = decode(t.shape, e);
        t.admissible[e] = !clique_violated(c, assignment, model.admissible, *idx_);
        for (const auto& [id, v] : activate_features(c, assignment, vec, model.vocab, *idx_)) {
          t.features[e].push_back(id);
        }
      }
      t.home = -1;
      for (int j : holders[c.members[0]]) {
        bool all = true;
        for (int p : c.members) all = all && jt_.contains(j, p);
        if (all) {
          t.home = j;
          break;
        }
      }
      if (t.home < 0) throw Error("clique " + to_string(c) + " has no junction-tree home");
      t.from_home = projection(jt_nodes_[t.home].shape, t.shape);
      jt_nodes_[t.home].cliques.push_back(static_cast<int>(ci));
    }
  }

  const Ast& ast() const noexcept { return *ast_; }
  const TreeIndex& index() const noexcept { return *idx_; }
  const std::vector<Transform>& domain(int position) const { return domain_.at(position); }
  const std::vector<Clique>& cliques() const noexcept { return cliques_; }
  const CliqueTable& table(int clique) const { return tables_.at(clique); }
  const JunctionTree& junction_tree() const noexcept { return jt_; }
  const JtNode& jt_node(int j) const { return jt_nodes_.at(j); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  std::vector<Transform> decode(const TableShape& shape, int entry) const {
    std::vector<Transform> out(shape.vars.size());
    for (std::size_t i = 0; i < shape.vars.size(); ++i) out[i] = domain_[shape.vars[i]][shape.digit(entry, i)];
    return out;
  }

  /// Entry of clique `ci` matching `labeling`; -1 when some member's
  /// transform lies outside its domain.
  int entry_of(int ci, const TransformLabeling& labeling) const {
    const auto& t = tables_.at(ci);
    int e = 0;
    for (std::size_t i = 0; i < t.shape.vars.size(); ++i) {
      const auto& d = domain_[t.shape.vars[i]];
      auto it = std::find(d.begin(), d.end(), labeling.at(t.shape.vars[i]));
      if (it == d.end()) return -1;
      e += static_cast<int>(it - d.begin()) * t.shape.strides[i];
    }
    return e;
  }

 private:
  std::shared_ptr<const Ast> ast_;
  std::shared_ptr<const TreeIndex> idx_;
  std::vector<std::vector<Transform>> domain_;
  std::vector<Clique> cliques_;
  std::vector<CliqueTable> tables_;
  JunctionTree jt_;
  std::vector<JtNode> jt_nodes_;
  std::vector<std::string> warnings_;
};

struct Potentials {
  /// Per clique entry; -inf when inadmissible.
  std::vector<std::vector<double>> clique;
  /// Per junction-tree entry: sum of the home cliques' potentials.
  std::vector<std::vector<double>> jt;
};

inline Potentials compute_potentials(const InstanceGraph& g, const std::vector<double>& weights) {
  Potentials pot;
  pot.clique.resize(g.cliques().size());
  for (std::size_t ci = 0; ci < g.cliques().size(); ++ci) {
    const auto& t = g.table(static_cast<int>(ci));
    auto& out = pot.clique[ci];
    out.resize(static_cast<std::size_t>(t.shape.size));
    for (int e = 0; e < t.shape.size; ++e) {
      out[e] = t.admissible[e] ? clique_log_potential(t.features[e], weights) : kNegInf;
    }
  }
  const auto& jt = g.junction_tree();
  pot.jt.resize(static_cast<std::size_t>(jt.size()));
  for (int j = 0; j < jt.size(); ++j) {
    const auto& n = g.jt_node(j);
    auto& out = pot.jt[j];
    out.assign(static_cast<std::size_t>(n.shape.size), 0.0);
    for (int ci : n.cliques) {
      const auto& t = g.table(ci);
      for (int e = 0; e < n.shape.size; ++e) out[e] += pot.clique[ci][t.from_home[e]];
    }
  }
  return pot;
}

struct SumProductResult {
  double log_z = 0.0;
  /// Per clique entry probability.
  std::vector<std::vector<double>> marginals;
};

namespace detail {

inline std::vector<double> marginalize(const std::vector<double>& table, const std::vector<int>& map, int size) {
  std::vector<double> m(static_cast<std::size_t>(size), kNegInf);
  for (std::size_t e = 0; e < table.size(); ++e) {
    if (table[e] > m[map[e]]) m[map[e]] = table[e];
  }
  std::vector<double> s(static_cast<std::size_t>(size), 0.0);
  for (std::size_t e = 0; e < table.size(); ++e) {
    if (m[map[e]] != kNegInf) s[map[e]] += std::exp(table[e] - m[map[e]]);
  }
  for (int i = 0; i < size; ++i) {
    if (m[i] != kNegInf) m[i] += std::log(s[i]);
  }
  return m;
}

}  // namespace detail

inline SumProductResult sum_product(const InstanceGraph& g, const Potentials& pot) {
  const auto& jt = g.junction_tree();
  const int n = jt.size();
  std::vector<std::vector<double>> up(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> down(static_cast<std::size_t>(n));

  auto absorb = [&](std::vector<double>& table, int child) {
    const auto& cn = g.jt_node(child);
    for (std::size_t e = 0; e < table.size(); ++e) table[e] += up[child][cn.from_parent[e]];
  };

  for (int j = n - 1; j >= 0; --j) {
    if (jt.parent[j] < 0) continue;
    std::vector<double> t = pot.jt[j];
    for (int c : jt.children[j]) absorb(t, c);
    up[j] = detail::marginalize(t, g.jt_node(j).to_separator, g.jt_node(j).separator.size);
  }

  std::vector<double> root = pot.jt[0];
  for (int c : jt.children[0]) absorb(root, c);
  SumProductResult r;
  r.log_z = log_sum_exp(root);
  if (r.log_z == kNegInf) throw InferenceError("no admissible assignment for this tree");

  std::vector<std::vector<double>> belief(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    std::vector<double> inbound = pot.jt[j];
    if (jt.parent[j] >= 0) {
      const auto& nj = g.jt_node(j);
      for (std::size_t e = 0; e < inbound.size(); ++e) inbound[e] += down[j][nj.to_separator[e]];
    }
    for (int c : jt.children[j]) {
      std::vector<double> t = inbound;
      for (int o : jt.children[j]) {
        if (o != c) absorb(t, o);
      }
      const auto& cn = g.jt_node(c);
      down[c] = detail::marginalize(t, cn.from_parent, cn.separator.size);
    }
    belief[j] = std::move(inbound);
    for (int c : jt.children[j]) absorb(belief[j], c);
  }

  r.marginals.resize(g.cliques().size());
  for (std::size_t ci = 0; ci < g.cliques().size(); ++ci) {
    const auto& t = g.table(static_cast<int>(ci));
    auto m = detail::marginalize(belief[t.home], t.from_home, t.shape.size);
    for (double& v : m) v = std::exp(v - r.log_z);
    r.marginals[ci] = std::move(m);
  }
  return r;
}

struct CliqueMarginal {
  Clique clique;
  std::map<std::vector<Transform>, double> distribution;
};

struct InferenceResult {
  double log_z = 0.0;
  std::vector<CliqueMarginal> marginals;
};

inline InferenceResult log_partition_and_marginals(const Ast& ast, const Model& model) {
  InstanceGraph g(ast, model);
  const auto sp = sum_product(g, compute_potentials(g, model.weights));
  InferenceResult r;
  r.log_z = sp.log_z;
  for (std::size_t ci = 0; ci < g.cliques().size(); ++ci) {
    CliqueMarginal m{g.cliques()[ci], {}};
    const auto& t = g.table(static_cast<int>(ci));
    for (int e = 0; e < t.shape.size; ++e) m.distribution[g.decode(t.shape, e)] = sp.marginals[ci][e];
    r.marginals.push_back(std::move(m));
  }
  return r;
}

// ---------------------------------------------------------------------------
// k-best max-product
// ---------------------------------------------------------------------------

struct RankedLabeling {
  TransformLabeling labeling;
  double score = 0.0;
  std::int64_t rank_score = 0;
  double probability = 0.0;
};

namespace detail {

inline constexpr std::uint8_t kUnassigned = 0xFF;

struct Partial {
  std::int64_t score;
  std::vector<std::uint8_t> assign;
};

inline bool ranks_before(const Partial& a, const Partial& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.assign < b.assign;
}

inline void keep_best(std::vector<Partial>& v, int k) {
  std::sort(v.begin(), v.end(), ranks_before);
  if (static_cast<int>(v.size()) > k) v.resize(static_cast<std::size_t>(k));
}

inline std::vector<Partial> combine(const std::vector<Partial>& a, const std::vector<Partial>& b, int k) {
  std::vector<Partial> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a) {
    for (const auto& y : b) {
      Partial p{x.score + y.score, x.assign};
      for (std::size_t i = 0; i < p.assign.size(); ++i) {
        if (y.assign[i] != kUnassigned) p.assign[i] = y.assign[i];
      }
      out.push_back(std::move(p));
    }
  }
  keep_best(out, k);
  return out;
}

}  // namespace detail

/// The k best admissible labelings, best first, with probabilities from
/// `log_z`.
inline std::vector<RankedLabeling> top_k(const InstanceGraph& g, const Potentials& pot, double log_z, int k) {
  if (k < 1) throw InferenceError("k must be at least 1");
  using detail::Partial;
  const auto& jt = g.junction_tree();
  const int n = jt.size();
  const std::size_t width = static_cast<std::size_t>(g.ast().node_count) + 1;

  std::vector<std::vector<std::int64_t>> qjt(static_cast<std::size_t>(n));
  std::vector<std::vector<char>> ok(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto& node = g.jt_node(j);
    qjt[j].assign(static_cast<std::size_t>(node.shape.size), 0);
    ok[j].assign(static_cast<std::size_t>(node.shape.size), 1);
    for (int ci : node.cliques) {
      const auto& t = g.table(ci);
      std::vector<std::int64_t> q(static_cast<std::size_t>(t.shape.size), 0);
      for (int e = 0; e < t.shape.size; ++e) {
        if (t.admissible[e]) q[e] = quantize_potential(pot.clique[ci][e]);
      }
      for (int e = 0; e < node.shape.size; ++e) {
        const int ce = t.from_home[e];
        if (!t.admissible[ce]) ok[j][e] = 0;
        qjt[j][e] += q[ce];
      }
    }
  }

  std::vector<std::vector<std::vector<Partial>>> msg(static_cast<std::size_t>(n));
  std::vector<Partial> best;
  for (int j = n - 1; j >= 0; --j) {
    const auto& node = g.jt_node(j);
    std::vector<std::vector<Partial>> lists(static_cast<std::size_t>(node.shape.size));
    for (int e = 0; e < node.shape.size; ++e) {
      if (!ok[j][e]) continue;
      Partial base{qjt[j][e], std::vector<std::uint8_t>(width, detail::kUnassigned)};
      base.assign[0] = 0;
      const auto t = g.decode(node.shape, e);
      for (std::size_t i = 0; i < t.size(); ++i) base.assign[node.shape.vars[i]] = static_cast<std::uint8_t>(ordinal(t[i]));
      std::vector<Partial> list{std::move(base)};
      for (int c : jt.children[j]) {
        const auto& from = msg[c][g.jt_node(c).from_parent[e]];
        if (from.empty()) {
          list.clear();
          break;
        }
        list = detail::combine(list, from, k);
      }
      lists[e] = std::move(list);
    }
    if (jt.parent[j] < 0) {
      for (auto& l : lists) {
        for (auto& p : l) best.push_back(std::move(p));
      }
      detail::keep_best(best, k);
    } else {
      auto& out = msg[j];
      out.resize(static_cast<std::size_t>(node.separator.size));
      for (int e = 0; e < node.shape.size; ++e) {
        for (auto& p : lists[e]) out[node.to_separator[e]].push_back(std::move(p));
      }
      for (auto& l : out) detail::keep_best(l, k);
    }
    for (int c : jt.children[j]) msg[c].clear();
  }

  std::vector<RankedLabeling> result;
  for (const auto& p : best) {
    RankedLabeling r;
    r.labeling = TransformLabeling(g.ast());
    for (int pos = 1; pos <= g.ast().node_count; ++pos) r.labeling.set(pos, static_cast<Transform>(p.assign[pos]));
    r.rank_score = p.score;
    double s = 0.0;
    for (std::size_t ci = 0; ci < g.cliques().size(); ++ci) {
      s += pot.clique[ci][g.entry_of(static_cast<int>(ci), r.labeling)];
    }
    r.score = s;
    r.probability = std::exp(s - log_z);
    result.push_back(std::move(r));
  }
  return result;
}

inline std::vector<RankedLabeling> top_k(const Ast& ast, const Model& model, int k) {
  InstanceGraph g(ast, model);
  const auto pot = compute_potentials(g, model.weights);
  const double log_z = sum_product(g, pot).log_z;
  return top_k(g, pot, log_z, k);
}

inline TransformLabeling map_assignment(const Ast& ast, const Model& model) {
  return top_k(ast, model, 1).front().labeling;
}

}  // namespace astcrf
