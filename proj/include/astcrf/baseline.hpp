#pragma once

// Frequency baseline: P(L, T) = N1 / N0 where N0 counts training nodes of
// label L and N1 those of them labeled T.

#include <algorithm>
#include <map>
#include <vector>

#include "astcrf/transforms.hpp"

namespace astcrf {

struct BaselineEntry {
  Label label;
  Transform transform;
  double probability;
};

struct BaselineModel {
  std::vector<BaselineEntry> tuples;

  double probability(Label l, Transform t) const {
    for (const auto& e : tuples) {
      if (e.label == l && e.transform == t) return e.probability;
    }
    return 0.0;
  }
};

inline BaselineModel build_baseline(const std::vector<TransformLabeling>& data) {
  std::map<Label, long> n0;
  std::map<std::pair<Label, Transform>, long> n1;
  for (const auto& ex : data) {
    TreeIndex idx(ex.ast);
    for (int p = 1; p <= idx.size(); ++p) {
      ++n0[idx.label(p)];
      if (ex.at(p) != Transform::Empty) ++n1[{idx.label(p), ex.at(p)}];
    }
  }
  BaselineModel m;
  for (const auto& [key, n] : n1) {
    m.tuples.push_back({key.first, key.second, static_cast<double>(n) / static_cast<double>(n0.at(key.first))});
  }
  return m;
}

inline Json baseline_to_json(const BaselineModel& m) {
  Json arr = Json::array();
  for (const auto& e : m.tuples) {
    arr.push_back({{"label", std::string(to_string(e.label))},
                   {"transform", std::string(to_string(e.transform))},
                   {"probability", e.probability}});
  }
  return {{"baseline", arr}};
}

inline BaselineModel baseline_from_json(const Json& j) {
  BaselineModel m;
  try {
    for (const auto& e : j.at("baseline")) {
      auto l = label_from_string(e.at("label").get<std::string>());
      auto t = transform_from_string(e.at("transform").get<std::string>());
      if (!l || !t) throw ParseError("baseline entry with unknown label or transform: " + e.dump());
      const double p = e.at("probability").get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw ParseError("baseline probability outside [0, 1]");
      m.tuples.push_back({*l, *t, p});
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed baseline file: ") + e.what());
  }
  return m;
}

namespace detail {

struct BaselineCandidate {
  int position;
  Transform transform;
  double probability;
};

struct BaselineCombo {
  std::vector<std::size_t> parts;  // indices into the single-node candidate list
  double probability;
};

}  // namespace detail

/// Single-node candidates by P descending (ties by position, then transform
/// ordinal), then two-node and three-node combinations of distinct positions
/// by product of P. Returns at most k labelings.
inline std::vector<TransformLabeling> baseline_rank(const Ast& ast, const BaselineModel& baseline, int k) {
  using detail::BaselineCandidate;
  using detail::BaselineCombo;
  std::vector<TransformLabeling> out;
  if (k <= 0) return out;
  TreeIndex idx(ast);
  std::vector<BaselineCandidate> cands;
  for (int p = 1; p <= idx.size(); ++p) {
    for (const auto& e : baseline.tuples) {
      if (e.label == idx.label(p) && e.transform != Transform::Empty && e.probability > 0.0) {
        cands.push_back({p, e.transform, e.probability});
      }
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    if (a.position != b.position) return a.position < b.position;
    return ordinal(a.transform) < ordinal(b.transform);
  });

  auto emit = [&](const std::vector<std::size_t>& parts) {
    TransformLabeling l(ast);
    for (std::size_t i : parts) l.set(cands[i].position, cands[i].transform);
    out.push_back(std::move(l));
    return static_cast<int>(out.size()) >= k;
  };
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (emit({i})) return out;
  }
  for (std::size_t size = 2; size <= 3; ++size) {
    std::vector<BaselineCombo> combos;
    std::vector<std::size_t> cur;
    auto rec = [&](auto&& self, std::size_t from, double prob) -> void {
      if (cur.size() == size) {
        combos.push_back({cur, prob});
        return;
      }
      for (std::size_t i = from; i < cands.size(); ++i) {
        bool clash = false;
        for (std::size_t j : cur) clash = clash || cands[j].position == cands[i].position;
        if (clash) continue;
        cur.push_back(i);
        self(self, i + 1, prob * cands[i].probability);
        cur.pop_back();
      }
    };
    rec(rec, 0, 1.0);
    std::stable_sort(combos.begin(), combos.end(),
                     [](const auto& a, const auto& b) { return a.probability > b.probability; });
    for (const auto& c : combos) {
      if (emit(c.parts)) return out;
    }
  }
  return out;
}

}  // namespace astcrf
