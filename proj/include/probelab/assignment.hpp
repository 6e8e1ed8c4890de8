#pragma once

#include "probelab/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace probelab {

inline constexpr int kNoiseLabel = -1;

/// Partition of n rows; -1 marks noise, clusters are numbered 0..K-1 in
/// order of their lowest member index.
struct ClusterAssignment {
  std::vector<int> labels;
  int clusters = 0;
  std::string method;  // "hdbscan" | "kmeans" | "given"
  std::string metric = "euclidean";
  std::size_t min_cluster_size = 0;
  std::size_t min_samples = 0;
  std::string selection;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  std::size_t noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoiseLabel));
  }
  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(clusters), 0);
    for (int l : labels) {
      if (l >= 0) ++out[static_cast<std::size_t>(l)];
    }
    return out;
  }
};

/// Renumbers non-negative labels to 0..K-1 by first appearance; returns K.
inline int relabel_by_first_index(std::vector<int>& labels) {
  std::map<int, int> remap;
  for (int& l : labels) {
    if (l < 0) {
      l = kNoiseLabel;
      continue;
    }
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  return static_cast<int>(remap.size());
}

/// Adjusted Rand index between two labelings. Noise (-1) counts as one
/// more label. Two single-block partitions score 1.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error("adjusted_rand_index: length mismatch");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra;
  std::map<int, double> rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0;
  for (const auto& [key, v] : joint) index += c2(v);
  double sa = 0;
  double sb = 0;
  for (const auto& [key, v] : ra) sa += c2(v);
  for (const auto& [key, v] : rb) sb += c2(v);
  const double expected = sa * sb / c2(n);
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace probelab
