#pragma once

#include "probelab/assignment.hpp"
#include "probelab/linalg.hpp"
#include "probelab/rng.hpp"

#include <limits>
#include <random>
#include <vector>

namespace probelab {

struct KmeansParams {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
};

struct KmeansResult {
  ClusterAssignment assignment;
  Matrix centroids;                // rows follow assignment labels
  std::vector<double> sse_history;  // after each assignment step
  std::size_t iterations = 0;
};

namespace kmeans_detail {

inline double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// k-means++ seeding.
inline Matrix seed_centroids(const Matrix& x, std::size_t k, Engine& eng) {
  const auto n = x.rows();
  Matrix c(static_cast<Eigen::Index>(k), x.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  c.row(0) = x.row(first(eng));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (std::size_t m = 1; m < k; ++m) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& v = d2[static_cast<std::size_t>(i)];
      v = std::min(v, sq_dist(x, i, c, static_cast<Eigen::Index>(m - 1)));
      total += v;
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(eng);
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(eng);
    }
    c.row(static_cast<Eigen::Index>(m)) = x.row(pick);
  }
  return c;
}

}  // namespace kmeans_detail

/// Lloyd's algorithm from k-means++ seeds. Stops at an assignment fixpoint
/// or after max_iters. An emptied cluster takes the point farthest from its
/// current centroid.
inline KmeansResult kmeans(const Matrix& points, const KmeansParams& params) {
  using kmeans_detail::sq_dist;
  const auto n = static_cast<std::size_t>(points.rows());
  if (params.k < 1) throw Error("kmeans: k must be >= 1");
  if (params.k > n) throw Error("kmeans: k=" + std::to_string(params.k) + " exceeds n=" + std::to_string(n));
  if (!all_finite(points)) throw Error("kmeans: non-finite point coordinates");

  auto eng = make_engine(derive_seed(params.seed, stream::kmeans));
  KmeansResult r;
  r.centroids = kmeans_detail::seed_centroids(points, params.k, eng);
  std::vector<int> labels(n, -1);
  const auto k = static_cast<Eigen::Index>(params.k);

  for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
    bool changed = false;
    double sse = 0.0;
    std::vector<double> own(n);
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = sq_dist(points, static_cast<Eigen::Index>(i), r.centroids, 0);
      for (Eigen::Index c = 1; c < k; ++c) {
        const double d = sq_dist(points, static_cast<Eigen::Index>(i), r.centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != static_cast<int>(best)) changed = true;
      labels[i] = static_cast<int>(best);
      own[i] = best_d;
      sse += best_d;
    }
    r.sse_history.push_back(sse);
    r.iterations = iter + 1;

    std::vector<std::size_t> counts(params.k, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < params.k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(labels[i])] < 2) continue;
        if (far == n || own[i] > own[far]) far = i;
      }
      --counts[static_cast<std::size_t>(labels[far])];
      labels[far] = static_cast<int>(c);
      counts[c] = 1;
      own[far] = 0.0;
      changed = true;
    }

    Matrix sums = Matrix::Zero(k, points.cols());
    for (std::size_t i = 0; i < n; ++i) sums.row(labels[i]) += points.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index c = 0; c < k; ++c) r.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);

    if (!changed) break;
  }

  // Canonical numbering: clusters ordered by lowest member index.
  std::vector<int> canon = labels;
  relabel_by_first_index(canon);
  Matrix ordered(k, points.cols());
  for (std::size_t i = 0; i < n; ++i) ordered.row(canon[i]) = r.centroids.row(labels[i]);
  r.centroids = std::move(ordered);

  r.assignment.labels = std::move(canon);
  r.assignment.clusters = static_cast<int>(params.k);
  r.assignment.method = "kmeans";
  r.assignment.k = params.k;
  r.assignment.seed = params.seed;
  return r;
}

}  // namespace probelab
