#pragma once

// Viable transform sets, the observation and indicator feature vocabulary,
// and sparse feature activation for a clique assignment.

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "astcrf/characteristics.hpp"
#include "astcrf/cliques.hpp"
#include "astcrf/transforms.hpp"

namespace astcrf {

/// (T, L)
using NodeKey = std::array<int, 2>;
/// (T_parent, L_parent, T_child, L_child)
using EdgeKey = std::array<int, 4>;
/// (T_p, L_p, T_left, L_left, T_right, L_right)
using TriangleKey = std::array<int, 6>;

/// T(L) for every label, each sorted by ordinal and containing EMPTY.
using ViableSets = std::array<std::vector<Transform>, kLabelCount>;

struct ObservationFeature {
  Label label;
  Transform transform;
  int characteristic;
  bool direct;

  auto operator<=>(const ObservationFeature&) const = default;
};

struct IndicatorSets {
  std::set<NodeKey> nodetran;
  std::set<EdgeKey> edgetran;
  std::set<TriangleKey> triangletran;
  std::set<TriangleKey> triangletran_spe;
};

using SparseFeatures = std::map<int, double>;

/// Feature ids: observation features first (in list order), then node, edge,
/// triangle and same-value triangle indicators in key order.
class FeatureVocabulary {
 public:
  FeatureVocabulary() { reindex(); }
  FeatureVocabulary(ViableSets viable, std::vector<ObservationFeature> observation, IndicatorSets indicators)
      : viable_(std::move(viable)), observation_(std::move(observation)), ind_(std::move(indicators)) {
    reindex();
  }

  const ViableSets& viable() const noexcept { return viable_; }
  const std::vector<Transform>& viable(Label l) const { return viable_.at(static_cast<std::size_t>(l)); }
  const std::vector<ObservationFeature>& observation() const noexcept { return observation_; }
  const IndicatorSets& indicators() const noexcept { return ind_; }

  int observation_count() const noexcept { return static_cast<int>(observation_.size()); }
  int indicator_count() const noexcept {
    return static_cast<int>(ind_.nodetran.size() + ind_.edgetran.size() + ind_.triangletran.size() +
                            ind_.triangletran_spe.size());
  }
  /// K
  int size() const noexcept { return observation_count() + indicator_count(); }

  int observation_id(Label l, Transform t, int characteristic, bool direct) const {
    auto it = obs_index_.find({l, t, characteristic, direct});
    return it == obs_index_.end() ? -1 : it->second;
  }
  int node_id(const NodeKey& k) const { return find(node_index_, k); }
  int edge_id(const EdgeKey& k) const { return find(edge_index_, k); }
  int triangle_id(const TriangleKey& k) const { return find(tri_index_, k); }
  int triangle_spe_id(const TriangleKey& k) const { return find(spe_index_, k); }

  /// Human-readable description of a feature id.
  std::string describe(int id) const {
    if (id < observation_count()) {
      const auto& f = observation_[id];
      return "obs(" + std::string(to_string(f.label)) + "," + std::string(to_string(f.transform)) + "," +
             CharacteristicCatalog::instance().name(f.characteristic) + "," + (f.direct ? "direct" : "inverse") + ")";
    }
    auto name = [](auto& index, int id, const char* tag) -> std::string {
      for (const auto& [k, v] : index) {
        if (v != id) continue;
        std::string s = tag;
        for (std::size_t i = 0; i < k.size(); ++i) {
          s += i ? "," : "(";
          s += i % 2 == 0 ? std::string(to_string(static_cast<Transform>(k[i])))
                          : std::string(to_string(static_cast<Label>(k[i])));
        }
        return s + ")";
      }
      return {};
    };
    for (auto s : {name(node_index_, id, "node"), name(edge_index_, id, "edge"), name(tri_index_, id, "triangle"),
                   name(spe_index_, id, "triangle_spe")}) {
      if (!s.empty()) return s;
    }
    return "feature#" + std::to_string(id);
  }

 private:
  template <typename Map, typename Key>
  static int find(const Map& m, const Key& k) {
    auto it = m.find(k);
    return it == m.end() ? -1 : it->second;
  }

  void reindex() {
    obs_index_.clear();
    node_index_.clear();
    edge_index_.clear();
    tri_index_.clear();
    spe_index_.clear();
    int id = 0;
    for (const auto& f : observation_) obs_index_[{f.label, f.transform, f.characteristic, f.direct}] = id++;
    for (const auto& k : ind_.nodetran) node_index_[k] = id++;
    for (const auto& k : ind_.edgetran) edge_index_[k] = id++;
    for (const auto& k : ind_.triangletran) tri_index_[k] = id++;
    for (const auto& k : ind_.triangletran_spe) spe_index_[k] = id++;
  }

  ViableSets viable_{};
  std::vector<ObservationFeature> observation_;
  IndicatorSets ind_;
  std::map<std::tuple<Label, Transform, int, bool>, int> obs_index_;
  std::map<NodeKey, int> node_index_;
  std::map<EdgeKey, int> edge_index_;
  std::map<TriangleKey, int> tri_index_;
  std::map<TriangleKey, int> spe_index_;
};

/// T(L): transforms observed at least once on a node labeled L, plus EMPTY.
inline ViableSets build_viable_transform_sets(const std::vector<TransformLabeling>& data) {
  std::array<std::set<Transform>, kLabelCount> seen;
  for (auto& s : seen) s.insert(Transform::Empty);
  for (const auto& ex : data) {
    TreeIndex idx(ex.ast);
    for (int p = 1; p <= idx.size(); ++p) seen[static_cast<std::size_t>(idx.label(p))].insert(ex.at(p));
  }
  ViableSets out;
  for (std::size_t l = 0; l < kLabelCount; ++l) out[l].assign(seen[l].begin(), seen[l].end());
  return out;
}

inline bool same_value_siblings(const TreeIndex& idx, int left, int right) {
  return idx.label(left) == idx.label(right) && idx.node(left).value == idx.node(right).value;
}

/// Unions of the node, parent-child edge, triangle and same-value triangle
/// tuples observed in `data`.
inline IndicatorSets build_indicator_vocab(const std::vector<TransformLabeling>& data) {
  IndicatorSets s;
  for (const auto& ex : data) {
    TreeIndex idx(ex.ast);
    auto L = [&](int p) { return static_cast<int>(idx.label(p)); };
    auto T = [&](int p) { return ordinal(ex.at(p)); };
    for (int p = 1; p <= idx.size(); ++p) {
      s.nodetran.insert({T(p), L(p)});
      const auto ch = idx.children(p);
      for (int c : ch) s.edgetran.insert({T(p), L(p), T(c), L(c)});
      for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
        const int a = ch[i], b = ch[i + 1];
        const TriangleKey key{T(p), L(p), T(a), L(a), T(b), L(b)};
        s.triangletran.insert(key);
        if (same_value_siblings(idx, a, b)) s.triangletran_spe.insert(key);
      }
    }
  }
  return s;
}

/// Direct and inverse features for every (L, t in T(L), c in C^L).
inline std::vector<ObservationFeature> build_observation_features(const ViableSets& viable) {
  std::vector<ObservationFeature> out;
  const auto& cat = CharacteristicCatalog::instance();
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    const auto label = static_cast<Label>(l);
    for (Transform t : viable[l]) {
      for (int c : cat.for_label(label)) {
        out.push_back({label, t, c, true});
        out.push_back({label, t, c, false});
      }
    }
  }
  return out;
}

inline FeatureVocabulary build_vocabulary(const std::vector<TransformLabeling>& data) {
  auto viable = build_viable_transform_sets(data);
  auto obs = build_observation_features(viable);
  return FeatureVocabulary(std::move(viable), std::move(obs), build_indicator_vocab(data));
}

/// Features firing for `assignment` (one transform per clique member).
/// Observation features fire on node cliques only; sibling edges carry none.
inline SparseFeatures activate_features(const Clique& clique, const std::vector<Transform>& assignment,
                                        const CharacteristicVector& vec, const FeatureVocabulary& vocab,
                                        const TreeIndex& idx) {
  if (static_cast<int>(assignment.size()) != clique.arity()) {
    throw Error("assignment arity does not match clique " + to_string(clique));
  }
  SparseFeatures out;
  auto fire = [&](int id) {
    if (id >= 0) out[id] = 1.0;
  };
  const auto& m = clique.members;
  auto L = [&](int i) { return static_cast<int>(idx.label(m[i])); };
  auto T = [&](int i) { return ordinal(assignment[i]); };
  switch (clique.kind) {
    case CliqueKind::Node: {
      const Label label = idx.label(m[0]);
      const Transform t = assignment[0];
      const auto& viable = vocab.viable(label);
      if (std::find(viable.begin(), viable.end(), t) != viable.end()) {
        for (int c : CharacteristicCatalog::instance().for_label(label)) {
          fire(vocab.observation_id(label, t, c, vec.get(m[0], c)));
        }
      }
      fire(vocab.node_id({T(0), L(0)}));
      break;
    }
    case CliqueKind::Edge:
      if (!clique.sibling) fire(vocab.edge_id({T(0), L(0), T(1), L(1)}));
      break;
    case CliqueKind::Triangle: {
      const TriangleKey key{T(0), L(0), T(1), L(1), T(2), L(2)};
      fire(vocab.triangle_id(key));
      if (same_value_siblings(idx, m[1], m[2])) fire(vocab.triangle_spe_id(key));
      break;
    }
  }
  return out;
}

}  // namespace astcrf
