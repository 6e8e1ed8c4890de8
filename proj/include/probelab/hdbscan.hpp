#pragma once

#include "probelab/assignment.hpp"
#include "probelab/linalg.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace probelab {

enum class ClusterSelection { eom, leaf };

inline std::string to_string(ClusterSelection s) { return s == ClusterSelection::eom ? "eom" : "leaf"; }

struct HdbscanParams {
  std::size_t min_cluster_size = 5;
  std::size_t min_samples = 0;  // 0: same as min_cluster_size
  ClusterSelection selection = ClusterSelection::eom;

  std::size_t effective_min_samples() const { return min_samples == 0 ? min_cluster_size : min_samples; }
};

namespace hdbscan_detail {

struct Edge {
  std::size_t a;
  std::size_t b;
  double weight;
};

// Core distance: distance to the min_samples-th nearest point, the point
// itself counted as the first (scikit-learn convention).
inline std::vector<double> core_distances(const Matrix& x, std::size_t min_samples) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  const std::size_t rank = std::min(min_samples, n) - 1;
  std::vector<double> core(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = euclidean(x.row(static_cast<Eigen::Index>(i)).data(), x.row(static_cast<Eigen::Index>(j)).data(), d);
    dist[i] = 0.0;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(rank), dist.end());
    core[i] = dist[rank];
  }
  return core;
}

inline double mutual_reachability(const Matrix& x, const std::vector<double>& core, std::size_t i, std::size_t j) {
  const double dij = euclidean(x.row(static_cast<Eigen::Index>(i)).data(), x.row(static_cast<Eigen::Index>(j)).data(),
                               static_cast<std::size_t>(x.cols()));
  return std::max({core[i], core[j], dij});
}

// Exact Prim over the implicit complete mutual-reachability graph.
// Ties in the frontier pick the lowest point index.
inline std::vector<Edge> prim_mst(const Matrix& x, const std::vector<double>& core) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<Edge> edges;
  if (n < 2) return edges;
  edges.reserve(n - 1);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> key(n, inf);
  std::vector<std::size_t> from(n, 0);
  std::vector<char> in_tree(n, 0);
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t best = n;
    double best_key = inf;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double w = mutual_reachability(x, core, current, v);
      if (w < key[v]) {
        key[v] = w;
        from[v] = current;
      }
      if (best == n || key[v] < best_key) {
        best = v;
        best_key = key[v];
      }
    }
    in_tree[best] = 1;
    edges.push_back({from[best], best, best_key});
    current = best;
  }
  return edges;
}

// Single-linkage hierarchy in which merges at exactly equal distance are
// collapsed into one multiway node. Nodes [0, n) are points.
struct Hierarchy {
  struct Node {
    double distance = 0.0;
    std::size_t size = 1;
    std::vector<std::size_t> children;
  };
  std::vector<Node> nodes;
  std::size_t points = 0;

  std::size_t root() const { return nodes.size() - 1; }
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline Hierarchy single_linkage(std::size_t n, std::vector<Edge> edges) {
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) { return l.weight < r.weight; });
  Hierarchy h;
  h.points = n;
  h.nodes.resize(n);
  DisjointSets sets(n);
  std::vector<std::size_t> node_of(n);
  std::iota(node_of.begin(), node_of.end(), 0);

  std::size_t begin = 0;
  while (begin < edges.size()) {
    std::size_t end = begin;
    while (end < edges.size() && edges[end].weight == edges[begin].weight) ++end;

    std::vector<std::pair<std::size_t, std::size_t>> before;  // (point, node) per endpoint
    for (std::size_t e = begin; e < end; ++e) {
      before.emplace_back(edges[e].a, node_of[sets.find(edges[e].a)]);
      before.emplace_back(edges[e].b, node_of[sets.find(edges[e].b)]);
    }
    for (std::size_t e = begin; e < end; ++e) sets.unite(edges[e].a, edges[e].b);

    std::vector<std::pair<std::size_t, std::size_t>> grouped;  // (new root, old node)
    for (const auto& [point, node] : before) grouped.emplace_back(sets.find(point), node);
    std::sort(grouped.begin(), grouped.end());
    grouped.erase(std::unique(grouped.begin(), grouped.end()), grouped.end());

    for (std::size_t g = 0; g < grouped.size();) {
      const std::size_t root = grouped[g].first;
      Hierarchy::Node node;
      node.distance = edges[begin].weight;
      node.size = 0;
      for (; g < grouped.size() && grouped[g].first == root; ++g) {
        node.children.push_back(grouped[g].second);
        node.size += h.nodes[grouped[g].second].size;
      }
      h.nodes.push_back(std::move(node));
      node_of[root] = h.nodes.size() - 1;
    }
    begin = end;
  }
  return h;
}

inline double lambda_of(double distance) {
  return distance > 0.0 ? 1.0 / distance : std::numeric_limits<double>::infinity();
}

// lambda_leave - lambda_birth with inf - inf taken as 0.
inline double excess(double leave, double birth) { return leave == birth ? 0.0 : leave - birth; }

struct CondensedTree {
  struct Cluster {
    int parent = -1;
    double birth = 0.0;
    double stability = 0.0;
    std::size_t size = 0;
    std::vector<int> children;
  };
  std::vector<Cluster> clusters;     // 0 is the root
  std::vector<int> point_cluster;    // cluster each point last belonged to
  std::vector<double> point_lambda;  // lambda at which it left
};

inline void collect_points(const Hierarchy& h, std::size_t node, std::vector<std::size_t>& out) {
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (v < h.points) {
      out.push_back(v);
    } else {
      for (auto c : h.nodes[v].children) stack.push_back(c);
    }
  }
}

inline CondensedTree condense(const Hierarchy& h, std::size_t min_cluster_size) {
  CondensedTree t;
  t.point_cluster.assign(h.points, 0);
  t.point_lambda.assign(h.points, 0.0);
  t.clusters.push_back({-1, 0.0, 0.0, h.nodes[h.root()].size, {}});

  std::vector<std::size_t> pts;
  auto fall_out = [&](std::size_t node, int cluster, double lambda) {
    pts.clear();
    collect_points(h, node, pts);
    auto& c = t.clusters[static_cast<std::size_t>(cluster)];
    for (auto p : pts) {
      t.point_cluster[p] = cluster;
      t.point_lambda[p] = lambda;
      c.stability += excess(lambda, c.birth);
    }
  };

  std::vector<std::pair<std::size_t, int>> work{{h.root(), 0}};
  while (!work.empty()) {
    auto [node, cluster] = work.back();
    work.pop_back();
    if (node < h.points) {
      // Only reachable when a single point is its own cluster.
      const double birth = t.clusters[static_cast<std::size_t>(cluster)].birth;
      fall_out(node, cluster, birth);
      continue;
    }
    const auto& hn = h.nodes[node];
    const double lambda = lambda_of(hn.distance);
    std::vector<std::size_t> large;
    for (auto c : hn.children) {
      if (h.nodes[c].size >= min_cluster_size) large.push_back(c);
    }
    for (auto c : hn.children) {
      if (h.nodes[c].size < min_cluster_size) fall_out(c, cluster, lambda);
    }
    if (large.size() == 1) {
      work.emplace_back(large.front(), cluster);
    } else if (large.size() >= 2) {
      for (auto c : large) {
        const int id = static_cast<int>(t.clusters.size());
        auto& parent = t.clusters[static_cast<std::size_t>(cluster)];
        parent.stability += excess(lambda, parent.birth) * static_cast<double>(h.nodes[c].size);
        parent.children.push_back(id);
        t.clusters.push_back({cluster, lambda, 0.0, h.nodes[c].size, {}});
        work.emplace_back(c, id);
      }
    }
  }
  return t;
}

// Returns the selected flag per condensed cluster; the root is never selected.
inline std::vector<char> select_clusters(const CondensedTree& t, ClusterSelection mode) {
  const std::size_t k = t.clusters.size();
  std::vector<char> selected(k, 0);
  if (mode == ClusterSelection::leaf) {
    for (std::size_t c = 1; c < k; ++c) selected[c] = t.clusters[c].children.empty() ? 1 : 0;
    return selected;
  }
  std::vector<double> best(k, 0.0);
  for (std::size_t c = k; c-- > 1;) {
    const auto& cl = t.clusters[c];
    if (cl.children.empty()) {
      selected[c] = 1;
      best[c] = cl.stability;
      continue;
    }
    double subtree = 0.0;
    for (int ch : cl.children) subtree += best[static_cast<std::size_t>(ch)];
    if (subtree > cl.stability) {
      best[c] = subtree;
    } else {
      best[c] = cl.stability;
      selected[c] = 1;
      std::vector<int> stack(cl.children.begin(), cl.children.end());
      while (!stack.empty()) {
        const auto v = static_cast<std::size_t>(stack.back());
        stack.pop_back();
        selected[v] = 0;
        for (int ch : t.clusters[v].children) stack.push_back(ch);
      }
    }
  }
  return selected;
}

}  // namespace hdbscan_detail

/// Density clustering with HDBSCAN over the Euclidean metric.
///
/// Pipeline: core distances, mutual reachability, exact O(n^2) Prim MST,
/// single-linkage hierarchy (equal-distance merges are simultaneous),
/// condensed tree, then Excess-of-Mass (or leaf) selection. Points outside
/// every selected cluster are noise. Fewer than min_cluster_size points
/// yield all noise.
inline ClusterAssignment hdbscan(const Matrix& points, const HdbscanParams& params = {}) {
  using namespace hdbscan_detail;
  if (params.min_cluster_size < 2) throw Error("hdbscan: min_cluster_size must be >= 2");
  if (points.rows() < 1) throw Error("hdbscan: no points");
  if (!all_finite(points)) throw Error("hdbscan: non-finite point coordinates");
  const auto n = static_cast<std::size_t>(points.rows());

  ClusterAssignment out;
  out.method = "hdbscan";
  out.min_cluster_size = params.min_cluster_size;
  out.min_samples = params.effective_min_samples();
  out.selection = to_string(params.selection);
  out.labels.assign(n, kNoiseLabel);
  if (n < params.min_cluster_size) return out;

  const auto core = core_distances(points, params.effective_min_samples());
  const Hierarchy h = single_linkage(n, prim_mst(points, core));
  const CondensedTree tree = condense(h, params.min_cluster_size);
  const auto selected = select_clusters(tree, params.selection);

  for (std::size_t p = 0; p < n; ++p) {
    int c = tree.point_cluster[p];
    while (c > 0 && !selected[static_cast<std::size_t>(c)]) c = tree.clusters[static_cast<std::size_t>(c)].parent;
    out.labels[p] = c > 0 ? c : kNoiseLabel;
  }
  out.clusters = relabel_by_first_index(out.labels);
  return out;
}

}  // namespace probelab
