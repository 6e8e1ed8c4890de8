#pragma once

#include "probelab/linalg.hpp"
#include "probelab/probe.hpp"
#include "probelab/rng.hpp"

#include <random>
#include <vector>

namespace probelab {

struct LogregHyper {
  double l2 = 1e-3;
  std::size_t steps = 1000;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

/// Full-batch gradient descent on mean cross-entropy + l2 * |w|^2 / 2.
/// Weights start at N(0, 1e-6 / d), bias at 0.
inline LinearProbe train_logreg(const Matrix& x, const std::vector<int>& labels, const LogregHyper& hyper = {}) {
  if (labels.empty()) throw Error("train_logreg: labels are required");
  if (labels.size() != static_cast<std::size_t>(x.rows())) throw Error("train_logreg: labels length does not match rows");
  if (x.cols() < 1) throw Error("train_logreg: empty feature dimension");
  const double n = static_cast<double>(x.rows());
  Vector y(x.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const int v = labels[static_cast<std::size_t>(i)];
    if (v != 0 && v != 1) throw Error("train_logreg: label outside {0,1}");
    y(i) = v;
  }

  auto eng = make_engine(derive_seed(hyper.seed, stream::logreg));
  std::normal_distribution<double> gauss(0.0, 1e-3 / std::sqrt(static_cast<double>(x.cols())));
  Vector w(x.cols());
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = gauss(eng);
  double b = 0.0;

  for (std::size_t step = 0; step < hyper.steps; ++step) {
    const Vector residual = (sigmoid((x * w).array() + b) - y.array()).matrix();
    const Vector grad_w = x.transpose() * residual / n + hyper.l2 * w;
    const double grad_b = residual.sum() / n;
    w -= hyper.learning_rate * grad_w;
    b -= hyper.learning_rate * grad_b;
  }

  const Eigen::ArrayXd z = (x * w).array() + b;
  // log(1 + e^z) - y z, written to stay finite for large |z|
  const Eigen::ArrayXd softplus = z.max(0.0) + (-z.abs()).exp().log1p();
  LinearProbe probe;
  probe.kind = ProbeKind::logreg;
  probe.w = std::move(w);
  probe.b = b;
  probe.final_loss = (softplus - y.array() * z).mean() + 0.5 * hyper.l2 * probe.w.squaredNorm();
  if (!std::isfinite(probe.final_loss)) throw Error("train_logreg: diverged");
  return probe;
}

inline Predictions logreg_predict(const LinearProbe& probe, const Matrix& x) {
  if (x.cols() != probe.w.size()) throw Error("logreg_predict: dimension mismatch");
  Predictions out;
  out.scores = sigmoid((x * probe.w).array() + probe.b).matrix();
  out.labels.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int label = out.scores(i) > 0.5 ? 1 : 0;
    out.labels[static_cast<std::size_t>(i)] = probe.flipped ? 1 - label : label;
  }
  return out;
}

}  // namespace probelab
