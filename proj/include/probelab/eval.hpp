#pragma once

#include "probelab/dataset.hpp"
#include "probelab/linalg.hpp"
#include "probelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace probelab {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded permutation; the first ceil(ratio * n) rows train, the rest test.
inline SplitIndices split_indices(std::size_t n, double ratio, std::uint64_t seed) {
  if (n < 2) throw Error("split: need at least 2 rows");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split: ratio must lie in (0, 1)");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto eng = make_engine(derive_seed(seed, stream::split));
  std::shuffle(perm.begin(), perm.end(), eng);
  const auto cut = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  if (cut == 0 || cut >= n) throw Error("split: ratio leaves one side empty");
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cut));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(cut), perm.end());
  return out;
}

inline std::pair<ContrastPairSet, ContrastPairSet> split(const ContrastPairSet& set, double ratio,
                                                         std::uint64_t seed) {
  const auto idx = split_indices(set.size(), ratio, seed);
  return {subset(set, idx.train), subset(set, idx.test)};
}

inline double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) throw Error("accuracy: length mismatch");
  if (labels.empty()) throw Error("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

inline double flip_corrected_accuracy(double raw) { return std::max(raw, 1.0 - raw); }

/// Terms of Var(X - Y) for X = u . pos_i, Y = u . neg_i with u = w / |w|:
///   var = confidence + consistency + mean_term
///   confidence = E(X^2) + E(Y^2), consistency = -2 E(XY),
///   mean_term = -(E(X)^2 + E(Y)^2 - 2 E(X) E(Y)).
/// `var` is computed directly from the differences, not from the terms.
struct VarianceDecomposition {
  double confidence = 0.0;
  double consistency = 0.0;
  double mean_term = 0.0;
  double var = 0.0;

  double residual() const { return var - (confidence + consistency + mean_term); }
};

inline VarianceDecomposition variance_decomposition(const Matrix& pos, const Matrix& neg, const Vector& w) {
  if (pos.rows() != neg.rows() || pos.cols() != neg.cols()) throw Error("variance_decomposition: shape mismatch");
  if (pos.cols() != w.size()) throw Error("variance_decomposition: direction dimension mismatch");
  const double norm = w.norm();
  if (!(norm > 0.0)) throw Error("variance_decomposition: zero direction");
  const Vector u = w / norm;
  const Eigen::ArrayXd x = (pos * u).array();
  const Eigen::ArrayXd y = (neg * u).array();
  const double ex = x.mean();
  const double ey = y.mean();
  VarianceDecomposition out;
  out.confidence = x.square().mean() + y.square().mean();
  out.consistency = -2.0 * (x * y).mean();
  out.mean_term = -(ex * ex + ey * ey - 2.0 * ex * ey);
  const Eigen::ArrayXd diff = x - y;
  out.var = (diff - diff.mean()).square().mean();
  return out;
}

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Quantiles interpolate linearly between order statistics.
inline SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  return s;
}

}  // namespace probelab
