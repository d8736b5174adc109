#pragma once

// Exhaustive enumeration over every labeling of a small tree. Test oracle for
// the junction-tree routines; shares only feature activation and the
// violation predicates with them.

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "astcrf/inference.hpp"

namespace astcrf {

inline constexpr std::int64_t kBruteForceLimit = 10'000'000;

struct BruteForceResult {
  double log_z = kNegInf;
  /// All admissible labelings in rank order.
  std::vector<RankedLabeling> ranked;
  /// Aligned with build_clique_graph(ast).
  std::vector<CliqueMarginal> marginals;
};

inline BruteForceResult brute_force_inference(const Ast& ast, const Model& model) {
  TreeIndex idx(ast);
  const int q = ast.node_count;
  std::vector<std::vector<Transform>> candidates(static_cast<std::size_t>(q) + 1);
  std::int64_t total = 1;
  for (int p = 1; p <= q; ++p) {
    for (std::size_t t = 0; t < kTransformCount; ++t) {
      const auto tr = static_cast<Transform>(t);
      if (!model.admissible.node_violated(tr, idx.label(p))) candidates[p].push_back(tr);
    }
    total *= static_cast<std::int64_t>(candidates[p].size());
    if (total > kBruteForceLimit) {
      throw InferenceError("brute-force enumeration refused: more than " + std::to_string(kBruteForceLimit) +
                           " assignments");
    }
  }

  const auto vec = node_characteristics(ast);
  const auto cliques = build_clique_graph(ast);
  std::vector<std::map<std::vector<Transform>, CliqueScore>> memo(cliques.size());
  auto score_of = [&](std::size_t ci, const std::vector<Transform>& t) -> const CliqueScore& {
    auto it = memo[ci].find(t);
    if (it == memo[ci].end()) it = memo[ci].emplace(t, clique_score(cliques[ci], t, vec, model, idx)).first;
    return it->second;
  };

  struct Row {
    std::vector<int> digits;
    double score;
    std::int64_t rank;
  };
  std::vector<Row> rows;
  std::vector<int> digit(static_cast<std::size_t>(q) + 1, 0);
  std::vector<Transform> full(static_cast<std::size_t>(q) + 1, Transform::Empty);
  for (std::int64_t n = 0; n < total; ++n) {
    for (int p = 1; p <= q; ++p) full[p] = candidates[p][digit[p]];
    double s = 0.0;
    std::int64_t r = 0;
    bool ok = true;
    for (std::size_t ci = 0; ci < cliques.size() && ok; ++ci) {
      std::vector<Transform> t;
      for (int p : cliques[ci].members) t.push_back(full[p]);
      const auto& cs = score_of(ci, t);
      ok = cs.admissible;
      s += cs.phi;
      r += cs.quantized;
    }
    if (ok) rows.push_back({digit, s, r});
    for (int p = q; p >= 1; --p) {
      if (++digit[p] < static_cast<int>(candidates[p].size())) break;
      digit[p] = 0;
    }
  }

  BruteForceResult out;
  if (rows.empty()) throw InferenceError("no admissible assignment for this tree");
  std::vector<double> scores;
  for (const auto& r : rows) scores.push_back(r.score);
  out.log_z = log_sum_exp(scores);

  for (const auto& c : cliques) out.marginals.push_back({c, {}});
  for (std::size_t ci = 0; ci < cliques.size(); ++ci) {
    // every domain tuple, including those with probability zero
    std::vector<int> d(cliques[ci].members.size(), 0);
    while (true) {
      std::vector<Transform> t;
      for (std::size_t i = 0; i < d.size(); ++i) t.push_back(candidates[cliques[ci].members[i]][d[i]]);
      out.marginals[ci].distribution[t] = 0.0;
      std::size_t i = d.size();
      while (i-- > 0) {
        if (++d[i] < static_cast<int>(candidates[cliques[ci].members[i]].size())) break;
        d[i] = 0;
      }
      if (i == static_cast<std::size_t>(-1)) break;
    }
  }

  std::vector<std::pair<std::int64_t, std::vector<std::uint8_t>>> keys;
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    const auto& r = rows[ri];
    const double p = std::exp(r.score - out.log_z);
    std::vector<std::uint8_t> ords(static_cast<std::size_t>(q) + 1, 0);
    for (int pos = 1; pos <= q; ++pos) ords[pos] = static_cast<std::uint8_t>(ordinal(candidates[pos][r.digits[pos]]));
    for (std::size_t ci = 0; ci < cliques.size(); ++ci) {
      std::vector<Transform> t;
      for (int pos : cliques[ci].members) t.push_back(static_cast<Transform>(ords[pos]));
      out.marginals[ci].distribution[t] += p;
    }
    keys.emplace_back(r.rank, std::move(ords));
  }

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a].first != keys[b].first) return keys[a].first > keys[b].first;
    return keys[a].second < keys[b].second;
  });
  for (std::size_t i : order) {
    RankedLabeling r;
    r.labeling = TransformLabeling(ast);
    for (int pos = 1; pos <= q; ++pos) r.labeling.set(pos, static_cast<Transform>(keys[i].second[pos]));
    r.score = rows[i].score;
    r.rank_score = rows[i].rank;
    r.probability = std::exp(r.score - out.log_z);
    out.ranked.push_back(std::move(r));
  }
  return out;
}

}  // namespace astcrf
