#pragma once

// Admissibility constraints, hyperparameters and the trained model with its
// JSON file format.

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "astcrf/features.hpp"

namespace astcrf {

/// Clique assignments allowed at inference time, keyed by the clique's label
/// tuple. A tuple whose labels were never observed is unconstrained, except
/// that nodes of unseen labels only admit EMPTY.
struct AdmissibleSets {
  std::map<Label, std::set<Transform>> node;
  /// (L_parent, L_child) -> {(T_parent, T_child)}
  std::map<std::array<int, 2>, std::set<std::array<int, 2>>> edge;
  /// (L_p, L_left, L_right) -> {(T_p, T_left, T_right)}
  std::map<std::array<int, 3>, std::set<std::array<int, 3>>> triangle;

  bool knows(Label l) const { return node.count(l) > 0; }

  bool node_violated(Transform t, Label l) const {
    auto it = node.find(l);
    if (it == node.end()) return t != Transform::Empty;
    return it->second.count(t) == 0;
  }

  bool edge_violated(Transform tp, Label lp, Transform tc, Label lc) const {
    auto it = edge.find({static_cast<int>(lp), static_cast<int>(lc)});
    return it != edge.end() && it->second.count({ordinal(tp), ordinal(tc)}) == 0;
  }

  bool triangle_violated(Transform tp, Label lp, Transform ta, Label la, Transform tb, Label lb) const {
    auto it = triangle.find({static_cast<int>(lp), static_cast<int>(la), static_cast<int>(lb)});
    return it != triangle.end() && it->second.count({ordinal(tp), ordinal(ta), ordinal(tb)}) == 0;
  }

  /// Transforms a node of label `l` may take, in ordinal order.
  std::vector<Transform> node_domain(Label l) const {
    auto it = node.find(l);
    if (it == node.end()) return {Transform::Empty};
    return {it->second.begin(), it->second.end()};
  }
};

/// Observed node, parent-child and triangle tuples of `data`, each key set
/// extended with its all-EMPTY tuple.
inline AdmissibleSets build_admissible_sets(const std::vector<TransformLabeling>& data) {
  AdmissibleSets a;
  const int e = ordinal(Transform::Empty);
  for (const auto& ex : data) {
    TreeIndex idx(ex.ast);
    auto L = [&](int p) { return static_cast<int>(idx.label(p)); };
    auto T = [&](int p) { return ordinal(ex.at(p)); };
    for (int p = 1; p <= idx.size(); ++p) {
      auto& n = a.node[idx.label(p)];
      n.insert(Transform::Empty);
      n.insert(ex.at(p));
      const auto ch = idx.children(p);
      for (int c : ch) {
        auto& s = a.edge[{L(p), L(c)}];
        s.insert({e, e});
        s.insert({T(p), T(c)});
      }
      for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
        auto& s = a.triangle[{L(p), L(ch[i]), L(ch[i + 1])}];
        s.insert({e, e, e});
        s.insert({T(p), T(ch[i]), T(ch[i + 1])});
      }
    }
  }
  return a;
}

struct Hyperparameters {
  double delta2 = 500.0;
  double q = 0.5;
  int G = 200;
  int k_default = 3;
};

inline constexpr std::string_view kModelFormatVersion = "astcrf-model/1";

struct Model {
  FeatureVocabulary vocab;
  std::vector<double> weights;
  AdmissibleSets admissible;
  Hyperparameters hyper;

  int size() const noexcept { return vocab.size(); }
};

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

namespace detail {

inline Label json_label(const Json& j) {
  auto l = label_from_string(j.get<std::string>());
  if (!l) throw ParseError("model references unknown label '" + j.get<std::string>() + "'");
  return *l;
}

inline Transform json_transform(const Json& j) {
  auto t = transform_from_string(j.get<std::string>());
  if (!t) throw ParseError("model references unknown transform '" + j.get<std::string>() + "'");
  return *t;
}

template <std::size_t N>
Json key_to_json(const std::array<int, N>& k) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < N; ++i) {
    arr.push_back(i % 2 == 0 ? std::string(to_string(static_cast<Transform>(k[i])))
                             : std::string(to_string(static_cast<Label>(k[i]))));
  }
  return arr;
}

template <std::size_t N>
std::array<int, N> key_from_json(const Json& j) {
  if (!j.is_array() || j.size() != N) throw ParseError("malformed indicator tuple " + j.dump());
  std::array<int, N> k{};
  for (std::size_t i = 0; i < N; ++i) {
    k[i] = i % 2 == 0 ? ordinal(json_transform(j[i])) : static_cast<int>(json_label(j[i]));
  }
  return k;
}

template <std::size_t N>
Json names(const std::array<int, N>& k, bool labels) {
  Json arr = Json::array();
  for (int v : k) {
    arr.push_back(labels ? std::string(to_string(static_cast<Label>(v)))
                         : std::string(to_string(static_cast<Transform>(v))));
  }
  return arr;
}

template <std::size_t N>
std::array<int, N> from_names(const Json& j, bool labels) {
  if (!j.is_array() || j.size() != N) throw ParseError("malformed admissible tuple " + j.dump());
  std::array<int, N> k{};
  for (std::size_t i = 0; i < N; ++i) {
    k[i] = labels ? static_cast<int>(json_label(j[i])) : ordinal(json_transform(j[i]));
  }
  return k;
}

template <std::size_t N>
Json constraint_to_json(const std::map<std::array<int, N>, std::set<std::array<int, N>>>& m) {
  Json arr = Json::array();
  for (const auto& [labels, tuples] : m) {
    Json t = Json::array();
    for (const auto& tup : tuples) t.push_back(names(tup, false));
    arr.push_back({{"labels", names(labels, true)}, {"tuples", std::move(t)}});
  }
  return arr;
}

template <std::size_t N>
std::map<std::array<int, N>, std::set<std::array<int, N>>> constraint_from_json(const Json& j) {
  std::map<std::array<int, N>, std::set<std::array<int, N>>> m;
  for (const auto& e : j) {
    auto& s = m[from_names<N>(e.at("labels"), true)];
    for (const auto& t : e.at("tuples")) s.insert(from_names<N>(t, false));
  }
  return m;
}

}  // namespace detail

inline Json model_to_json(const Model& m) {
  Json j = Json::object();
  j["meta"] = {{"format", std::string(kModelFormatVersion)},
               {"delta2", m.hyper.delta2},
               {"q", m.hyper.q},
               {"G", m.hyper.G},
               {"k_default", m.hyper.k_default},
               {"created", "astcrf " + std::string(kModelFormatVersion)}};
  Json labels = Json::array(), transforms = Json::array(), chars = Json::array();
  for (auto n : kLabelNames) labels.push_back(std::string(n));
  for (auto n : kTransformNames) transforms.push_back(std::string(n));
  const auto& cat = CharacteristicCatalog::instance();
  for (int i = 0; i < cat.size(); ++i) chars.push_back(cat.name(i));
  j["alphabets"] = {{"labels", labels}, {"transforms", transforms}, {"characteristics", chars}};

  Json viable = Json::object();
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    Json ts = Json::array();
    for (auto t : m.vocab.viable()[l]) ts.push_back(std::string(to_string(t)));
    viable[std::string(kLabelNames[l])] = std::move(ts);
  }
  j["viable"] = std::move(viable);

  Json node = Json::object();
  for (const auto& [l, ts] : m.admissible.node) {
    Json arr = Json::array();
    for (auto t : ts) arr.push_back(std::string(to_string(t)));
    node[std::string(to_string(l))] = std::move(arr);
  }
  j["admissible"] = {{"node", std::move(node)},
                     {"edge", detail::constraint_to_json(m.admissible.edge)},
                     {"triangle", detail::constraint_to_json(m.admissible.triangle)}};

  Json obs = Json::array();
  for (const auto& f : m.vocab.observation()) {
    obs.push_back({std::string(to_string(f.label)), std::string(to_string(f.transform)), cat.name(f.characteristic),
                   f.direct ? "direct" : "inverse"});
  }
  j["observation_features"] = std::move(obs);

  const auto& ind = m.vocab.indicators();
  auto keys = [](const auto& set) {
    Json arr = Json::array();
    for (const auto& k : set) arr.push_back(detail::key_to_json(k));
    return arr;
  };
  j["indicator_features"] = {{"node", keys(ind.nodetran)},
                             {"edge", keys(ind.edgetran)},
                             {"triangle", keys(ind.triangletran)},
                             {"triangle_spe", keys(ind.triangletran_spe)}};
  j["weights"] = m.weights;
  return j;
}

inline Model model_from_json(const Json& j) {
  try {
    Model m;
    const auto& meta = j.at("meta");
    m.hyper.delta2 = meta.value("delta2", 500.0);
    m.hyper.q = meta.value("q", 0.5);
    m.hyper.G = meta.value("G", 200);
    m.hyper.k_default = meta.value("k_default", 3);

    ViableSets viable;
    for (std::size_t l = 0; l < kLabelCount; ++l) viable[l] = {Transform::Empty};
    for (const auto& [name, ts] : j.at("viable").items()) {
      auto& v = viable[static_cast<std::size_t>(detail::json_label(Json(name)))];
      v.clear();
      for (const auto& t : ts) v.push_back(detail::json_transform(t));
    }

    const auto& cat = CharacteristicCatalog::instance();
    std::vector<ObservationFeature> obs;
    for (const auto& f : j.at("observation_features")) {
      if (!f.is_array() || f.size() != 4) throw ParseError("malformed observation feature " + f.dump());
      const std::string dir = f[3].get<std::string>();
      if (dir != "direct" && dir != "inverse") throw ParseError("bad feature direction '" + dir + "'");
      obs.push_back({detail::json_label(f[0]), detail::json_transform(f[1]), cat.id(f[2].get<std::string>()),
                     dir == "direct"});
    }

    IndicatorSets ind;
    const auto& jf = j.at("indicator_features");
    for (const auto& k : jf.at("node")) ind.nodetran.insert(detail::key_from_json<2>(k));
    for (const auto& k : jf.at("edge")) ind.edgetran.insert(detail::key_from_json<4>(k));
    for (const auto& k : jf.at("triangle")) ind.triangletran.insert(detail::key_from_json<6>(k));
    for (const auto& k : jf.at("triangle_spe")) ind.triangletran_spe.insert(detail::key_from_json<6>(k));
    m.vocab = FeatureVocabulary(std::move(viable), std::move(obs), std::move(ind));

    const auto& ja = j.at("admissible");
    for (const auto& [name, ts] : ja.at("node").items()) {
      auto& s = m.admissible.node[detail::json_label(Json(name))];
      for (const auto& t : ts) s.insert(detail::json_transform(t));
    }
    m.admissible.edge = detail::constraint_from_json<2>(ja.at("edge"));
    m.admissible.triangle = detail::constraint_from_json<3>(ja.at("triangle"));

    m.weights = j.at("weights").get<std::vector<double>>();
    if (static_cast<int>(m.weights.size()) != m.vocab.size()) {
      throw ParseError("model has " + std::to_string(m.weights.size()) + " weights for " +
                       std::to_string(m.vocab.size()) + " features");
    }
    return m;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

inline std::string serialize_model(const Model& m) { return model_to_json(m).dump(1) + "\n"; }

inline Model parse_model(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace astcrf
