#pragma once

#include "probelab/dataset.hpp"
#include "probelab/linalg.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace probelab {

inline constexpr int kNoiseGroup = -1;

struct SideStats {
  RowVector mean;
  RowVector sigma;  // floored at kSigmaFloor
};

struct NormGroup {
  int id = 0;
  std::size_t count = 0;
  SideStats pos;
  SideStats neg;
};

/// Per-group, per-side standardization parameters. A single group
/// covering every row is Burns normalization.
struct NormStats {
  std::vector<NormGroup> groups;
  std::vector<int> assignment;

  const NormGroup& group(int id) const {
    for (const auto& g : groups) {
      if (g.id == id) return g;
    }
    throw Error("norm stats: unknown group id " + std::to_string(id));
  }
  std::size_t dim() const { return groups.empty() ? 0 : static_cast<std::size_t>(groups.front().pos.mean.size()); }
};

/// Column means and floored population standard deviations. The mean is
/// accumulated relative to the first row so constant columns come out
/// exactly constant.
inline SideStats side_stats(const Matrix& x) {
  const RowVector anchor = x.row(0);
  const RowVector shift = (x.rowwise() - anchor).colwise().mean();
  SideStats s;
  s.mean = anchor + shift;
  s.sigma = column_stddev(x, s.mean).cwiseMax(kSigmaFloor);
  return s;
}

inline void standardize_rows(Matrix& x, const std::vector<std::size_t>& rows, const SideStats& s) {
  const RowVector inv = s.sigma.cwiseInverse();
  for (auto r : rows) {
    const auto i = static_cast<Eigen::Index>(r);
    x.row(i) = ((x.row(i) - s.mean).array() * inv.array()).matrix();
  }
}

namespace detail {

inline NormGroup fit_group(const ContrastPairSet& set, int id, const std::vector<std::size_t>& rows) {
  NormGroup g;
  g.id = id;
  g.count = rows.size();
  g.pos = side_stats(gather_rows(set.pos, rows));
  g.neg = side_stats(gather_rows(set.neg, rows));
  return g;
}

inline std::map<int, std::vector<std::size_t>> members(const std::vector<int>& assignment) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

}  // namespace detail

/// Affine per-group, per-side transform. Without an override the stats'
/// own assignment is used; stats with a single group and no matching
/// assignment apply that group to every row.
inline ContrastPairSet apply_norm(const ContrastPairSet& set, const NormStats& stats,
                                  const std::optional<std::vector<int>>& assignment_override = std::nullopt) {
  validate(set);
  if (stats.groups.empty()) throw Error("norm stats: no groups");
  if (stats.dim() != set.dim()) {
    throw Error("norm stats: dimension " + std::to_string(stats.dim()) + " does not match data d=" +
                std::to_string(set.dim()));
  }
  std::vector<int> assignment;
  if (assignment_override) {
    assignment = *assignment_override;
  } else if (stats.assignment.size() == set.size()) {
    assignment = stats.assignment;
  } else if (stats.groups.size() == 1) {
    assignment.assign(set.size(), stats.groups.front().id);
  } else {
    throw Error("norm stats: assignment length does not match the data");
  }
  if (assignment.size() != set.size()) throw Error("norm: assignment length does not match n");

  ContrastPairSet out = set;
  for (const auto& [id, rows] : detail::members(assignment)) {
    const NormGroup& g = stats.group(id);
    standardize_rows(out.pos, rows, g.pos);
    standardize_rows(out.neg, rows, g.neg);
  }
  return out;
}

/// Standardizes each side over the whole set.
inline std::pair<ContrastPairSet, NormStats> burns_normalize(const ContrastPairSet& set) {
  validate(set);
  if (set.size() < 2) throw Error("burns_normalize: need at least 2 pairs");
  std::vector<std::size_t> rows(set.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  NormStats stats;
  stats.groups.push_back(detail::fit_group(set, 0, rows));
  stats.assignment.assign(set.size(), 0);
  return {apply_norm(set, stats), std::move(stats)};
}

/// Standardizes each side separately within every cluster.
///
/// Noise rows (label -1) form their own group when there are at least two
/// of them. A single noise row is standardized with whole-set statistics.
/// Any real cluster with fewer than two members is an error.
inline std::pair<ContrastPairSet, NormStats> cluster_normalize(const ContrastPairSet& set,
                                                               const std::vector<int>& assignment) {
  validate(set);
  if (assignment.size() != set.size()) throw Error("cluster_normalize: assignment length does not match n");
  if (set.size() < 2) throw Error("cluster_normalize: need at least 2 pairs");
  NormStats stats;
  stats.assignment = assignment;
  for (const auto& [id, rows] : detail::members(assignment)) {
    if (id < kNoiseGroup) throw Error("cluster_normalize: invalid cluster id " + std::to_string(id));
    if (rows.size() >= 2) {
      stats.groups.push_back(detail::fit_group(set, id, rows));
    } else if (id == kNoiseGroup) {
      std::vector<std::size_t> all(set.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      NormGroup g = detail::fit_group(set, id, all);
      g.count = rows.size();
      stats.groups.push_back(std::move(g));
    } else {
      throw Error("cluster_normalize: cluster " + std::to_string(id) + " has fewer than 2 members");
    }
  }
  return {apply_norm(set, stats), std::move(stats)};
}

/// Row i is (pos_i + neg_i) / 2.
inline Matrix pair_average(const ContrastPairSet& set) { return (set.pos + set.neg) * 0.5; }

/// Row i is pos_i - neg_i.
inline Matrix contrast_diffs(const ContrastPairSet& set) { return set.pos - set.neg; }

}  // namespace probelab
