#pragma once

// Transform names, per-node labelings and the labeled-example format.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "astcrf/ast.hpp"

namespace astcrf {

/// Ordinal order matters: EMPTY is 0 and ties are broken by ordinal.
enum class Transform : int {
  Empty = 0,
  WrapMeth,
  UnwrapMeth,
  VarRwVar,
  VarRwMeth,
  MethRwVar,
  MethRwMeth,
  BinOperatorRep,
  ConstantRep,
  LogExpExp,
  LogExpRed,
  WrapIfN,
  WrapIfO,
  WrapIfElseN,
  WrapIfElseO,
  UnwrapIf,
  WrapTry,
};

inline constexpr std::size_t kTransformCount = 17;

inline constexpr std::array<std::string_view, kTransformCount> kTransformNames = {
    "EMPTY",          "Wrap-Meth",    "Unwrap-Meth", "Var-RW-Var",    "Var-RW-Meth",
    "Meth-RW-Var",    "Meth-RW-Meth", "BinOperator-Rep", "Constant-Rep", "LogExp-Exp",
    "LogExp-Red",     "Wrap-IF-N",    "Wrap-IF-O",   "Wrap-IFELSE-N", "Wrap-IFELSE-O",
    "Unwrap-IF",      "Wrap-TRY",
};

inline std::string_view to_string(Transform t) {
  return kTransformNames.at(static_cast<std::size_t>(t));
}

inline std::optional<Transform> transform_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kTransformCount; ++i) {
    if (kTransformNames[i] == name) return static_cast<Transform>(i);
  }
  return std::nullopt;
}

inline int ordinal(Transform t) noexcept { return static_cast<int>(t); }

/// Transforms that only ever sit on a statement's VirtualRoot (apart from the
/// ternary case of Wrap-IFELSE, which targets the wrapped expression).
inline bool is_statement_transform(Transform t) noexcept {
  switch (t) {
    case Transform::WrapIfN:
    case Transform::WrapIfO:
    case Transform::WrapIfElseN:
    case Transform::WrapIfElseO:
    case Transform::WrapTry:
      return true;
    default:
      return false;
  }
}

/// One transform per position of `ast`; `labels[p - 1]` is the transform at
/// position p.
struct TransformLabeling {
  Ast ast;
  std::vector<Transform> labels;

  TransformLabeling() = default;
  explicit TransformLabeling(Ast tree)
      : ast(std::move(tree)), labels(static_cast<std::size_t>(ast.node_count), Transform::Empty) {}

  Transform at(int position) const { return labels.at(static_cast<std::size_t>(position - 1)); }
  void set(int position, Transform t) { labels.at(static_cast<std::size_t>(position - 1)) = t; }

  /// Number of non-EMPTY labels.
  int actual_count() const {
    int n = 0;
    for (auto t : labels) n += t != Transform::Empty;
    return n;
  }

  bool operator==(const TransformLabeling& o) const { return labels == o.labels; }
};

struct LabelingStats {
  std::map<Transform, int> per_transform;
  int single = 0;
  int multiple = 0;
};

inline LabelingStats labeling_stats(const std::vector<TransformLabeling>& labelings) {
  LabelingStats s;
  for (const auto& l : labelings) {
    for (auto t : l.labels) {
      if (t != Transform::Empty) ++s.per_transform[t];
    }
    const int n = l.actual_count();
    if (n == 1) {
      ++s.single;
    } else if (n > 1) {
      ++s.multiple;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Labeled-example format: {"ast": <tree>, "labels": {"11": "Meth-RW-Meth"}}
// ---------------------------------------------------------------------------

inline Json labels_to_json(const TransformLabeling& l) {
  Json labels = Json::object();
  for (std::size_t i = 0; i < l.labels.size(); ++i) {
    if (l.labels[i] != Transform::Empty) {
      labels[std::to_string(i + 1)] = std::string(to_string(l.labels[i]));
    }
  }
  return labels;
}

inline Json labeling_to_json(const TransformLabeling& l) {
  Json j = Json::object();
  j["ast"] = ast_to_json(l.ast);
  j["labels"] = labels_to_json(l);
  return j;
}

inline TransformLabeling labeling_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("ast")) throw ParseError("labeled example needs 'ast'");
  TransformLabeling l(ast_from_json(j["ast"]));
  if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("'labels' must be an object");
    for (const auto& [key, val] : it->items()) {
      int pos = 0;
      try {
        std::size_t used = 0;
        pos = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw ParseError("label key '" + key + "' is not a position");
      }
      if (pos < 1 || pos > l.ast.node_count) {
        throw ParseError("label position " + key + " outside 1.." + std::to_string(l.ast.node_count));
      }
      if (!val.is_string()) throw ParseError("label at " + key + " must be a string");
      auto t = transform_from_string(val.get<std::string>());
      if (!t) throw ParseError("unknown transform '" + val.get<std::string>() + "'");
      l.set(pos, *t);
    }
  }
  return l;
}

/// A dataset document is either a JSON array of labeled examples or a single
/// labeled example.
inline std::vector<TransformLabeling> dataset_from_json(const Json& j) {
  std::vector<TransformLabeling> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(labeling_from_json(e));
  } else {
    out.push_back(labeling_from_json(j));
  }
  return out;
}

inline Json dataset_to_json(const std::vector<TransformLabeling>& data) {
  Json arr = Json::array();
  for (const auto& l : data) arr.push_back(labeling_to_json(l));
  return arr;
}

}  // namespace astcrf
