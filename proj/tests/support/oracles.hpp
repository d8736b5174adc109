#pragma once

// Independent reference implementations used by the tests: a random instance
// generator, a direct per-labeling scorer, exhaustive enumeration and central
// finite differences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "astcrf/characteristics.hpp"
#include "astcrf/features.hpp"
#include "astcrf/model.hpp"

namespace astcrf::testing {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }
template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v.at(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(v.size()) - 1)));
}

struct TreeOptions {
  int min_nodes = 1;
  int max_nodes = 8;
  std::vector<Label> labels{Label::VariableAccess, Label::MethodCall, Label::Literal, Label::BinaryOperator,
                            Label::LogicalOperator, Label::Block, Label::VirtualRoot};
};

inline void random_attrs(Rng& rng, Node& n) {
  static const std::vector<std::string> var_flags{"instance_of_enclosing_class", "compatible_var_in_scope",
                                                  "local_unreferenced_before", "field_unassigned_elsewhere",
                                                  "same_type_null_guarded_elsewhere", "arg_var_swap_matches_call"};
  static const std::vector<std::string> call_flags{"param_compatible_with_return", "same_signature_guarded",
                                                   "same_signature_try_wrapped", "overloads",
                                                   "arg_var_swap_matches_call"};
  static const std::vector<std::string> kinds{"primitive", "object"};
  switch (n.label) {
    case Label::VariableAccess:
      n.value = pick(rng, std::vector<std::string>{"a", "b", "ab"});
      for (const auto& f : var_flags) {
        if (coin(rng, 0.4)) n.attrs[f] = true;
      }
      if (coin(rng, 0.7)) n.attrs["type_kind"] = pick(rng, kinds);
      if (coin(rng, 0.3)) n.attrs["scope_variables"] = {"ac", "zzz"};
      break;
    case Label::MethodCall:
      n.value = pick(rng, std::vector<std::string>{"getA", "size", "get"});
      for (const auto& f : call_flags) {
        if (coin(rng, 0.4)) n.attrs[f] = true;
      }
      if (coin(rng, 0.7)) n.attrs["return_type_kind"] = pick(rng, kinds);
      break;
    case Label::Literal:
      n.value = pick(rng, std::vector<std::string>{"0", "1", "null"});
      break;
    case Label::BinaryOperator:
      n.value = pick(rng, std::vector<std::string>{"+", "==", "!=", "<"});
      break;
    case Label::LogicalOperator:
      n.value = pick(rng, std::vector<std::string>{"&&", "||"});
      if (coin(rng, 0.5)) n.attrs["unreferenced_boolean_var"] = true;
      break;
    case Label::VirtualRoot:
      n.attrs["stmt_kind"] = std::string(kStatementKinds[static_cast<std::size_t>(uniform_int(rng, 0, 8))]);
      if (coin(rng, 0.3)) n.attrs["throws_exception"] = true;
      break;
    default:
      break;
  }
}

/// Grows a tree by appending each new node as the last child of a uniformly
/// chosen existing node.
inline Ast random_tree(Rng& rng, const TreeOptions& opt = {}) {
  const int n = uniform_int(rng, opt.min_nodes, opt.max_nodes);
  std::vector<Node> nodes(static_cast<std::size_t>(n));
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    nodes[i].label = pick(rng, opt.labels);
    random_attrs(rng, nodes[i]);
    if (i > 0) parent[i] = uniform_int(rng, 0, i - 1);
  }
  std::vector<std::vector<int>> kids(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) kids[parent[i]].push_back(i);
  std::function<Node(int)> build = [&](int i) {
    Node out = nodes[i];
    for (int c : kids[i]) out.children.push_back(build(c));
    // A VirtualRoot needs exactly one child.
    if (out.label == Label::VirtualRoot && out.children.size() != 1) out.label = Label::Statement;
    return out;
  };
  Ast a;
  a.root = build(0);
  return index_preorder(std::move(a));
}

struct RandomInstance {
  Ast ast;
  Model model;
  /// The transforms in play, EMPTY first.
  std::vector<Transform> transforms;
};

struct InstanceOptions {
  TreeOptions tree;
  int min_transforms = 2;
  int max_transforms = 4;
  double weight_range = 2.0;
};

/// Random tree, transform subset, vocabulary, admissible sets (always holding
/// the all-EMPTY tuples) and weights drawn from U[-range, range].
inline RandomInstance random_instance(Rng& rng, const InstanceOptions& opt = {}) {
  RandomInstance r;
  r.ast = random_tree(rng, opt.tree);
  const TreeIndex idx(r.ast);

  std::vector<Transform> pool;
  for (std::size_t t = 1; t < kTransformCount; ++t) pool.push_back(static_cast<Transform>(t));
  std::shuffle(pool.begin(), pool.end(), rng);
  const int m = uniform_int(rng, opt.min_transforms, opt.max_transforms);
  r.transforms.push_back(Transform::Empty);
  r.transforms.insert(r.transforms.end(), pool.begin(), pool.begin() + (m - 1));
  std::sort(r.transforms.begin(), r.transforms.end());

  auto subset = [&](double p) {
    std::vector<Transform> out{Transform::Empty};
    for (std::size_t i = 1; i < r.transforms.size(); ++i) {
      if (coin(rng, p)) out.push_back(r.transforms[i]);
    }
    return out;
  };

  ViableSets viable;
  for (Label l : opt.tree.labels) viable[static_cast<std::size_t>(l)] = subset(0.6);
  for (auto& v : viable) {
    if (v.empty()) v.push_back(Transform::Empty);
  }

  std::set<Label> present;
  std::set<std::array<int, 2>> edge_labels;
  std::set<std::array<int, 3>> tri_labels;
  for (int p = 1; p <= idx.size(); ++p) {
    present.insert(idx.label(p));
    const auto ch = idx.children(p);
    for (int c : ch) edge_labels.insert({static_cast<int>(idx.label(p)), static_cast<int>(idx.label(c))});
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      tri_labels.insert({static_cast<int>(idx.label(p)), static_cast<int>(idx.label(ch[i])),
                         static_cast<int>(idx.label(ch[i + 1]))});
    }
  }

  IndicatorSets ind;
  for (Label l : present) {
    for (Transform t : r.transforms) {
      if (coin(rng, 0.6)) ind.nodetran.insert({ordinal(t), static_cast<int>(l)});
    }
  }
  for (const auto& e : edge_labels) {
    for (Transform a : r.transforms) {
      for (Transform b : r.transforms) {
        if (coin(rng, 0.5)) ind.edgetran.insert({ordinal(a), e[0], ordinal(b), e[1]});
      }
    }
  }
  for (const auto& k : tri_labels) {
    for (Transform a : r.transforms) {
      for (Transform b : r.transforms) {
        for (Transform c : r.transforms) {
          const TriangleKey key{ordinal(a), k[0], ordinal(b), k[1], ordinal(c), k[2]};
          if (coin(rng, 0.4)) ind.triangletran.insert(key);
          if (coin(rng, 0.3)) ind.triangletran_spe.insert(key);
        }
      }
    }
  }

  AdmissibleSets adm;
  for (Label l : present) {
    if (!coin(rng, 0.85)) continue;
    const auto s = subset(0.7);
    adm.node[l] = {s.begin(), s.end()};
  }
  const int e = ordinal(Transform::Empty);
  for (const auto& k : edge_labels) {
    if (!coin(rng, 0.6)) continue;
    auto& s = adm.edge[k];
    s.insert({e, e});
    for (Transform a : r.transforms) {
      for (Transform b : r.transforms) {
        if (coin(rng, 0.6)) s.insert({ordinal(a), ordinal(b)});
      }
    }
  }
  for (const auto& k : tri_labels) {
    if (!coin(rng, 0.5)) continue;
    auto& s = adm.triangle[k];
    s.insert({e, e, e});
    for (Transform a : r.transforms) {
      for (Transform b : r.transforms) {
        for (Transform c : r.transforms) {
          if (coin(rng, 0.6)) s.insert({ordinal(a), ordinal(b), ordinal(c)});
        }
      }
    }
  }

  r.model.vocab = FeatureVocabulary(viable, build_observation_features(viable), std::move(ind));
  r.model.admissible = std::move(adm);
  std::uniform_real_distribution<double> w(-opt.weight_range, opt.weight_range);
  r.model.weights.resize(static_cast<std::size_t>(r.model.vocab.size()));
  for (double& x : r.model.weights) x = w(rng);
  return r;
}

// ---------------------------------------------------------------------------
// Direct scorer and exhaustive enumeration
// ---------------------------------------------------------------------------

/// Score of a full labeling computed straight from the feature definitions:
/// per local group (node, parent-child pair, adjacent sibling pair with their
/// parent) the firing feature ids are summed in ascending order. Returns
/// nullopt when any tuple is inadmissible.
struct DirectScore {
  double score = 0.0;
  std::int64_t quantized = 0;
};

inline std::optional<DirectScore> direct_score(const Ast& ast, const CharacteristicVector& vec,
                                               const std::vector<Transform>& labels, const Model& model) {
  const TreeIndex idx(ast);
  const auto& vocab = model.vocab;
  const auto& adm = model.admissible;
  const auto& cat = CharacteristicCatalog::instance();
  auto T = [&](int p) { return labels.at(static_cast<std::size_t>(p - 1)); };
  auto L = [&](int p) { return idx.label(p); };
  auto I = [](auto x) { return static_cast<int>(x); };

  DirectScore out;
  auto group = [&](std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    double s = 0.0;
    for (int id : ids) s += model.weights.at(static_cast<std::size_t>(id));
    out.score += s;
    out.quantized += std::llround(s * 4294967296.0);
  };

  for (int p = 1; p <= idx.size(); ++p) {
    const Transform t = T(p);
    const Label l = L(p);
    auto nit = adm.node.find(l);
    if (nit == adm.node.end() ? t != Transform::Empty : nit->second.count(t) == 0) return std::nullopt;
    std::vector<int> ids;
    const auto& viable = vocab.viable(l);
    if (std::find(viable.begin(), viable.end(), t) != viable.end()) {
      for (int c : cat.for_label(l)) {
        const int id = vocab.observation_id(l, t, c, vec.get(p, c));
        if (id < 0) throw std::logic_error("missing observation feature");
        ids.push_back(id);
      }
    }
    if (int id = vocab.node_id({ordinal(t), I(l)}); id >= 0) ids.push_back(id);
    group(ids);
  }
  for (int p = 1; p <= idx.size(); ++p) {
    const auto ch = idx.children(p);
    for (int c : ch) {
      auto it = adm.edge.find({I(L(p)), I(L(c))});
      if (it != adm.edge.end() && !it->second.count({ordinal(T(p)), ordinal(T(c))})) return std::nullopt;
      std::vector<int> ids;
      if (int id = vocab.edge_id({ordinal(T(p)), I(L(p)), ordinal(T(c)), I(L(c))}); id >= 0) ids.push_back(id);
      group(ids);
    }
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      const int a = ch[i], b = ch[i + 1];
      auto it = adm.triangle.find({I(L(p)), I(L(a)), I(L(b))});
      if (it != adm.triangle.end() && !it->second.count({ordinal(T(p)), ordinal(T(a)), ordinal(T(b))})) {
        return std::nullopt;
      }
      const TriangleKey key{ordinal(T(p)), I(L(p)), ordinal(T(a)), I(L(a)), ordinal(T(b)), I(L(b))};
      std::vector<int> ids;
      if (int id = vocab.triangle_id(key); id >= 0) ids.push_back(id);
      const Node& na = idx.node(a);
      const Node& nb = idx.node(b);
      if (na.label == nb.label && na.value == nb.value) {
        if (int id = vocab.triangle_spe_id(key); id >= 0) ids.push_back(id);
      }
      group(ids);
    }
  }
  return out;
}

struct EnumeratedLabeling {
  std::vector<Transform> labels;
  double score;
  std::int64_t quantized;
  double probability = 0.0;
};

struct Enumeration {
  double log_z = -std::numeric_limits<double>::infinity();
  /// Admissible labelings: quantized score descending, then ordinals ascending.
  std::vector<EnumeratedLabeling> ranked;
  /// Every labeling over `transforms` that broke a constraint.
  std::vector<std::vector<Transform>> inadmissible;
};

/// Visits every labeling of `ast` over `transforms`.
inline Enumeration enumerate_labelings(const Ast& ast, const Model& model, const std::vector<Transform>& transforms) {
  const auto vec = node_characteristics(ast);
  const int q = ast.node_count;
  const int m = static_cast<int>(transforms.size());
  Enumeration out;
  std::vector<int> digit(static_cast<std::size_t>(q), 0);
  std::vector<Transform> labels(static_cast<std::size_t>(q), transforms.at(0));
  while (true) {
    for (int i = 0; i < q; ++i) labels[i] = transforms[digit[i]];
    if (auto s = direct_score(ast, vec, labels, model)) {
      out.ranked.push_back({labels, s->score, s->quantized});
    } else {
      out.inadmissible.push_back(labels);
    }
    int i = q - 1;
    while (i >= 0 && ++digit[i] == m) digit[i--] = 0;
    if (i < 0) break;
  }
  if (!out.ranked.empty()) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& r : out.ranked) mx = std::max(mx, r.score);
    double sum = 0.0;
    for (const auto& r : out.ranked) sum += std::exp(r.score - mx);
    out.log_z = mx + std::log(sum);
    for (auto& r : out.ranked) r.probability = std::exp(r.score - out.log_z);
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const auto& a, const auto& b) {
    if (a.quantized != b.quantized) return a.quantized > b.quantized;
    return std::lexicographical_compare(a.labels.begin(), a.labels.end(), b.labels.begin(), b.labels.end());
  });
  return out;
}

/// Probability mass of every observed tuple of each group of positions.
inline std::map<std::vector<Transform>, double> group_marginal(const Enumeration& e, const std::vector<int>& positions) {
  std::map<std::vector<Transform>, double> out;
  for (const auto& r : e.ranked) {
    std::vector<Transform> key;
    for (int p : positions) key.push_back(r.labels.at(static_cast<std::size_t>(p - 1)));
    out[key] += r.probability;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Numerics
// ---------------------------------------------------------------------------

/// Central differences of `f` at `x` with step `h`.
inline std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                               std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// |a - n| / max(1, |a|, |n|)
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

/// Random labeled examples over a fixed transform subset; every example has
/// at least one non-EMPTY label.
inline std::vector<TransformLabeling> random_labeled_set(Rng& rng, int count, const std::vector<Transform>& transforms,
                                                         const TreeOptions& tree_opt = {}) {
  std::vector<TransformLabeling> out;
  for (int i = 0; i < count; ++i) {
    TransformLabeling l(random_tree(rng, tree_opt));
    l.ast.source_id = "ex" + std::to_string(i);
    for (int p = 1; p <= l.ast.node_count; ++p) {
      if (coin(rng, 0.35)) l.set(p, pick(rng, transforms));
    }
    if (l.actual_count() == 0) {
      l.set(uniform_int(rng, 1, l.ast.node_count),
            transforms.at(static_cast<std::size_t>(uniform_int(rng, 1, static_cast<int>(transforms.size()) - 1))));
    }
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace astcrf::testing
