#pragma once

#include "probelab/assignment.hpp"
#include "probelab/dataset.hpp"
#include "probelab/hdbscan.hpp"
#include "probelab/kmeans.hpp"
#include "probelab/norm.hpp"

#include <string>

namespace probelab {

enum class ClusterMethod { hdbscan, kmeans };

inline std::string to_string(ClusterMethod m) { return m == ClusterMethod::hdbscan ? "hdbscan" : "kmeans"; }

inline ClusterMethod parse_cluster_method(const std::string& s) {
  if (s == "hdbscan") return ClusterMethod::hdbscan;
  if (s == "kmeans") return ClusterMethod::kmeans;
  throw Error("unknown cluster method '" + s + "' (valid: hdbscan, kmeans)");
}

struct ClusterParams {
  ClusterMethod method = ClusterMethod::hdbscan;
  HdbscanParams hdbscan;
  KmeansParams kmeans;
};

inline ClusterAssignment cluster_points(const Matrix& points, const ClusterParams& params) {
  if (params.method == ClusterMethod::hdbscan) return hdbscan(points, params.hdbscan);
  return kmeans(points, params.kmeans).assignment;
}

/// Clusters the pair averages (pos_i + neg_i) / 2, which carry no
/// contrastive signal.
inline ClusterAssignment cluster_pair_averages(const ContrastPairSet& set, const ClusterParams& params) {
  validate(set);
  return cluster_points(pair_average(set), params);
}

}  // namespace probelab
