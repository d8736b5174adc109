#pragma once

// Top-k exact-match evaluation, per single-transform slice and for the
// multiple-transform slice.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "astcrf/baseline.hpp"
#include "astcrf/dataset.hpp"
#include "astcrf/inference.hpp"

namespace astcrf {

/// Ranked labelings for a tree, best first, at most k of them.
using Predictor = std::function<std::vector<TransformLabeling>(const Ast&, int k)>;

inline Predictor model_predictor(const Model& model) {
  return [&model](const Ast& ast, int k) {
    std::vector<TransformLabeling> out;
    for (auto& r : top_k(ast, model, k)) out.push_back(std::move(r.labeling));
    return out;
  };
}

inline Predictor baseline_predictor(const BaselineModel& baseline) {
  return [&baseline](const Ast& ast, int k) { return baseline_rank(ast, baseline, k); };
}

struct SliceResult {
  int total = 0;
  /// k -> examples whose ground truth is among the first k predictions
  std::map<int, int> correct;

  double accuracy(int k) const {
    auto it = correct.find(k);
    return total == 0 || it == correct.end() ? 0.0 : static_cast<double>(it->second) / total;
  }
};

struct EvalRecord {
  std::string source_id;
  std::string slice;
  /// 1-based rank of the first exact match; 0 when absent.
  int rank = 0;
};

struct EvalReport {
  std::vector<int> ks;
  /// Transform name (single-transform examples) or "multiple".
  std::map<std::string, SliceResult> slices;
  SliceResult single;
  SliceResult overall;
  std::vector<EvalRecord> records;
};

inline std::string slice_of(const TransformLabeling& l) {
  return l.actual_count() > 1 ? "multiple" : std::string(to_string(single_transform(l)));
}

inline EvalReport evaluate(const std::vector<TransformLabeling>& test, const Predictor& predictor,
                           std::vector<int> ks = {1, 3}) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty() || ks.front() < 1) throw Error("evaluation cut-offs must be positive");
  EvalReport rep;
  rep.ks = ks;
  auto count = [&](SliceResult& s, int rank) {
    ++s.total;
    for (int k : ks) s.correct[k] += rank >= 1 && rank <= k ? 1 : 0;
  };
  for (const auto& ex : test) {
    const auto preds = predictor(ex.ast, ks.back());
    int rank = 0;
    for (std::size_t i = 0; i < preds.size() && static_cast<int>(i) < ks.back(); ++i) {
      if (preds[i].labels == ex.labels) {
        rank = static_cast<int>(i) + 1;
        break;
      }
    }
    const std::string slice = slice_of(ex);
    count(rep.slices[slice], rank);
    if (slice != "multiple") count(rep.single, rank);
    count(rep.overall, rank);
    rep.records.push_back({ex.ast.source_id, slice, rank});
  }
  return rep;
}

inline Json slice_to_json(const SliceResult& s, const std::vector<int>& ks) {
  Json j = {{"total", s.total}};
  for (int k : ks) {
    const auto it = s.correct.find(k);
    j["top" + std::to_string(k) + "_correct"] = it == s.correct.end() ? 0 : it->second;
    j["top" + std::to_string(k) + "_accuracy"] = s.accuracy(k);
  }
  return j;
}

inline Json eval_report_to_json(const EvalReport& r) {
  Json slices = Json::object();
  for (const auto& [name, s] : r.slices) slices[name] = slice_to_json(s, r.ks);
  Json records = Json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"source_id", rec.source_id}, {"slice", rec.slice}, {"rank", rec.rank}});
  }
  return {{"ks", r.ks},
          {"slices", slices},
          {"single", slice_to_json(r.single, r.ks)},
          {"overall", slice_to_json(r.overall, r.ks)},
          {"records", records}};
}

inline std::string eval_report_table(const EvalReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %7s", "slice", "total");
  out += buf;
  for (int k : r.ks) {
    std::snprintf(buf, sizeof buf, " %9s", ("top-" + std::to_string(k)).c_str());
    out += buf;
  }
  out += "\n";
  auto row = [&](const std::string& name, const SliceResult& s) {
    std::snprintf(buf, sizeof buf, "%-16s %7d", name.c_str(), s.total);
    out += buf;
    for (int k : r.ks) {
      std::snprintf(buf, sizeof buf, " %8.1f%%", 100.0 * s.accuracy(k));
      out += buf;
    }
    out += "\n";
  };
  for (const auto& [name, s] : r.slices) row(name, s);
  row("single (all)", r.single);
  row("overall", r.overall);
  return out;
}

}  // namespace astcrf
