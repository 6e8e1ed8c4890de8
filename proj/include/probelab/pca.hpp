#pragma once

#include "probelab/linalg.hpp"
#include "probelab/probe.hpp"

#include <vector>

namespace probelab {

struct PowerIterationOptions {
  double tolerance = 1e-10;
  std::size_t max_iters = 10000;
};

namespace pca_detail {

inline Matrix covariance(const Matrix& x) {
  const Matrix centered = x.rowwise() - x.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(x.rows());
}

inline void canonical_sign(Vector& u) {
  Eigen::Index at = 0;
  for (Eigen::Index i = 1; i < u.size(); ++i) {
    if (std::abs(u(i)) > std::abs(u(at))) at = i;
  }
  if (u(at) < 0) u = -u;
}

inline void orthogonalize(Vector& v, const std::vector<Vector>& basis) {
  for (const auto& b : basis) v -= b.dot(v) * b;
}

struct Eigenpair {
  Vector vector;
  double value = 0.0;
  std::size_t iterations = 0;
};

// Power iteration on a symmetric PSD matrix, kept orthogonal to `basis`.
// Starts from the normalized all-ones vector; when that start has a
// near-zero Rayleigh quotient, restarts from the basis vector on the
// largest diagonal entry.
inline Eigenpair power_iteration(const Matrix& c, const std::vector<Vector>& basis, double scale,
                                 const PowerIterationOptions& opt) {
  const auto d = c.rows();
  const double tiny = 1e-14 * scale;
  Vector v = Vector::Ones(d);
  orthogonalize(v, basis);
  bool restarted = false;
  auto restart = [&]() {
    Eigen::Index at = 0;
    Vector diag = c.diagonal();
    for (Eigen::Index i = 1; i < d; ++i) {
      if (diag(i) > diag(at)) at = i;
    }
    v = Vector::Unit(d, at);
    orthogonalize(v, basis);
    restarted = true;
  };
  if (v.norm() < 1e-12 || (v.dot(c * v) / v.squaredNorm()) <= tiny) restart();
  if (v.norm() < 1e-12) return {Vector::Zero(d), 0.0, 0};
  v.normalize();

  Eigenpair out;
  for (std::size_t it = 1; it <= opt.max_iters; ++it) {
    Vector y = c * v;
    orthogonalize(y, basis);
    const double norm = y.norm();
    out.iterations = it;
    if (norm <= tiny) {
      if (!restarted) {
        restart();
        v.normalize();
        continue;
      }
      return {v, 0.0, it};
    }
    y /= norm;
    const double change = (y - v).norm();
    v = std::move(y);
    if (change < opt.tolerance) break;
  }
  out.value = v.dot(c * v);
  out.vector = std::move(v);
  return out;
}

}  // namespace pca_detail

/// Direction of largest variance of the rows of `x` (after centering).
inline DirectionProbe top_principal_component(const Matrix& x, const PowerIterationOptions& opt = {}) {
  if (x.rows() < 2) throw Error("top_principal_component: need at least 2 rows");
  if (!all_finite(x)) throw Error("top_principal_component: non-finite input");
  const Matrix c = pca_detail::covariance(x);
  const double scale = x.squaredNorm() / static_cast<double>(x.rows()) + 1e-300;
  if (c.trace() <= 1e-20 * scale) throw Error("top_principal_component: rank-0 input (all rows equal)");
  auto pair = pca_detail::power_iteration(c, {}, c.trace(), opt);
  DirectionProbe probe;
  probe.u = std::move(pair.vector);
  pca_detail::canonical_sign(probe.u);
  probe.eigenvalue = pair.value;
  probe.iterations = pair.iterations;
  return probe;
}

struct PcaResult {
  Matrix components;    // k x d, one direction per row
  Vector variances;     // eigenvalues, descending
  Matrix projections;   // n x k, centered rows projected on components
  bool truncated = false;  // fewer than the requested k components
};

/// Top-k principal components by deflated power iteration.
inline PcaResult pca_top_k(const Matrix& x, std::size_t k = 3, const PowerIterationOptions& opt = {}) {
  if (x.rows() < static_cast<Eigen::Index>(k) || x.rows() < 2) throw Error("pca_top_k: need n >= k and n >= 2");
  if (!all_finite(x)) throw Error("pca_top_k: non-finite input");
  Matrix c = pca_detail::covariance(x);
  const double total = c.trace();
  std::vector<Vector> basis;
  std::vector<double> values;
  PcaResult out;
  for (std::size_t j = 0; j < k && j < static_cast<std::size_t>(x.cols()); ++j) {
    if (total <= 0.0) break;
    auto pair = pca_detail::power_iteration(c, basis, total, opt);
    if (pair.value <= 1e-12 * total) break;
    pca_detail::canonical_sign(pair.vector);
    c -= pair.value * pair.vector * pair.vector.transpose();
    basis.push_back(pair.vector);
    values.push_back(pair.value);
  }
  out.truncated = basis.size() < k;
  out.components.resize(static_cast<Eigen::Index>(basis.size()), x.cols());
  out.variances.resize(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    out.components.row(static_cast<Eigen::Index>(j)) = basis[j].transpose();
    out.variances(static_cast<Eigen::Index>(j)) = values[j];
  }
  const Matrix centered = x.rowwise() - x.colwise().mean();
  out.projections = centered * out.components.transpose();
  return out;
}

/// Top principal component of normalized contrast differences.
inline DirectionProbe crc_tpc(const Matrix& diffs, const PowerIterationOptions& opt = {}) {
  return top_principal_component(diffs, opt);
}

/// Label 1 iff u . diff_i > 0 (ties: 0), inverted when flipped.
inline Predictions crc_predict(const DirectionProbe& probe, const Matrix& diffs) {
  if (diffs.cols() != probe.u.size()) throw Error("crc_predict: dimension mismatch");
  Predictions out;
  out.scores = diffs * probe.u;
  out.labels.resize(static_cast<std::size_t>(diffs.rows()));
  for (Eigen::Index i = 0; i < diffs.rows(); ++i) {
    const int label = out.scores(i) > 0.0 ? 1 : 0;
    out.labels[static_cast<std::size_t>(i)] = probe.flipped ? 1 - label : label;
  }
  return out;
}

}  // namespace probelab
