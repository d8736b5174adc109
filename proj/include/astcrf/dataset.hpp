#pragma once

// Dataset assembly from edit scripts and seeded train/test splitting.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "astcrf/edit_script.hpp"
#include "astcrf/extract.hpp"

namespace astcrf {

struct PreparedDataset {
  std::vector<TransformLabeling> examples;
  /// One line per script that was dropped.
  std::vector<std::string> log;
};

inline std::string script_name(const EditScript& s, std::size_t i) {
  return "script " + std::to_string(i) + (s.before.source_id.empty() ? "" : " (" + s.before.source_id + ")");
}

/// Root-op filter, then extraction; scripts over the threshold, with
/// conflicting rules or without any transform are dropped and logged.
inline PreparedDataset prepare_dataset(const std::vector<EditScript>& scripts,
                                       int threshold = kDefaultRootOpThreshold) {
  if (threshold < 1) throw Error("root-op threshold must be at least 1");
  PreparedDataset out;
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    const auto& s = scripts[i];
    const int roots = count_root_edit_ops(s);
    if (roots > threshold) {
      out.log.push_back(script_name(s, i) + ": " + std::to_string(roots) + " root edit operations exceed " +
                        std::to_string(threshold));
      continue;
    }
    try {
      auto l = extract_transforms(s);
      if (l.actual_count() == 0) {
        out.log.push_back(script_name(s, i) + ": no repair transform extracted");
        continue;
      }
      if (l.ast.source_id.empty()) l.ast.source_id = s.before.source_id;
      out.examples.push_back(std::move(l));
    } catch (const ExtractionConflict& e) {
      out.log.push_back(script_name(s, i) + ": " + e.what());
    } catch (const Error& e) {
      out.log.push_back(script_name(s, i) + ": " + e.what());
    }
  }
  return out;
}

struct DatasetSplit {
  std::vector<TransformLabeling> train;
  std::vector<TransformLabeling> test;
  std::vector<std::string> warnings;
};

/// The single transform of a single-transform example, else Empty.
inline Transform single_transform(const TransformLabeling& l) {
  if (l.actual_count() != 1) return Transform::Empty;
  for (auto t : l.labels) {
    if (t != Transform::Empty) return t;
  }
  return Transform::Empty;
}

/// Samples `per_transform_test` single-transform examples of every transform
/// and `multiple_test` multi-transform examples into the test set. Train keeps
/// the remaining examples in their original order.
inline DatasetSplit split_dataset(const std::vector<TransformLabeling>& data, int per_transform_test,
                                  int multiple_test, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> single(kTransformCount);
  std::vector<std::size_t> multiple;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int n = data[i].actual_count();
    if (n == 1) {
      single[static_cast<std::size_t>(single_transform(data[i]))].push_back(i);
    } else if (n > 1) {
      multiple.push_back(i);
    }
  }
  DatasetSplit out;
  std::vector<char> in_test(data.size(), 0);
  auto take = [&](std::vector<std::size_t>& pool, int want, const std::string& what) {
    if (want <= 0) return;
    std::shuffle(pool.begin(), pool.end(), rng);
    if (static_cast<int>(pool.size()) < want) {
      out.warnings.push_back(what + ": only " + std::to_string(pool.size()) + " of " + std::to_string(want) +
                             " requested test examples available");
    }
    const std::size_t n = std::min(pool.size(), static_cast<std::size_t>(want));
    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
      in_test[pool[i]] = 1;
      out.test.push_back(data[pool[i]]);
    }
  };
  for (std::size_t t = 1; t < kTransformCount; ++t) {
    take(single[t], per_transform_test, std::string(to_string(static_cast<Transform>(t))));
  }
  take(multiple, multiple_test, "multiple");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!in_test[i]) out.train.push_back(data[i]);
  }
  return out;
}

}  // namespace astcrf
