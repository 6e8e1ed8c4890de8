#pragma once

#include "probelab/linalg.hpp"
#include "probelab/probe.hpp"
#include "probelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace probelab {

/// Precision of the matrix products during training. The weights and the
/// optimizer state are double either way.
enum class CcsPrecision { single, double_ };

inline std::string to_string(CcsPrecision p) { return p == CcsPrecision::single ? "single" : "double"; }

inline CcsPrecision parse_ccs_precision(const std::string& s) {
  if (s == "single") return CcsPrecision::single;
  if (s == "double") return CcsPrecision::double_;
  throw Error("unknown CCS precision '" + s + "' (valid: single, double)");
}

struct CcsHyper {
  std::size_t restarts = 10;
  std::size_t steps = 1000;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  CcsPrecision precision = CcsPrecision::single;
};

/// Mean over pairs of [p+ - (1 - p-)]^2 + min(p+, p-)^2.
inline double ccs_loss(const Vector& p_plus, const Vector& p_minus) {
  if (p_plus.size() != p_minus.size()) throw Error("ccs_loss: length mismatch");
  if (p_plus.size() == 0) throw Error("ccs_loss: empty input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p_plus.size(); ++i) {
    const double a = p_plus(i);
    const double c = p_minus(i);
    if (!(a >= 0.0 && a <= 1.0 && c >= 0.0 && c <= 1.0)) {
      throw Error("ccs_loss: probability outside [0,1]");
    }
    const double consistency = a - (1.0 - c);
    const double confidence = std::min(a, c);
    total += consistency * consistency + confidence * confidence;
  }
  return total / static_cast<double>(p_plus.size());
}

struct CcsObjective {
  double loss = 0.0;
  Vector grad_w;
  double grad_b = 0.0;
};

/// Loss and exact gradient of the CCS objective at (w, b). At p+ == p- the
/// confidence term is differentiated through p+.
inline CcsObjective ccs_objective(const Matrix& pos, const Matrix& neg, const Vector& w, double b) {
  const Eigen::ArrayXd pp = sigmoid((pos * w).array() + b);
  const Eigen::ArrayXd pn = sigmoid((neg * w).array() + b);
  const double n = static_cast<double>(pos.rows());
  const Eigen::ArrayXd cons = pp + pn - 1.0;
  const Eigen::ArrayXd lo = pp.min(pn);
  const Eigen::ArrayXd plus_is_min = (pp <= pn).cast<double>();
  const Eigen::ArrayXd dpp = (2.0 * cons + 2.0 * lo * plus_is_min) / n;
  const Eigen::ArrayXd dpn = (2.0 * cons + 2.0 * lo * (1.0 - plus_is_min)) / n;
  const Eigen::ArrayXd gzp = dpp * pp * (1.0 - pp);
  const Eigen::ArrayXd gzn = dpn * pn * (1.0 - pn);
  CcsObjective out;
  out.loss = (cons.square() + lo.square()).sum() / n;
  out.grad_w = pos.transpose() * gzp.matrix() + neg.transpose() * gzn.matrix();
  out.grad_b = gzp.sum() + gzn.sum();
  return out;
}

namespace ccs_detail {

// Full-batch Adam for all restarts at once; `Scalar` is the type of the
// matrix products and the elementwise pass, the optimizer state is double.
template <typename Scalar>
Eigen::MatrixXd adam_restarts(const Matrix& pos, const Matrix& neg, Eigen::MatrixXd w, const CcsHyper& hyper) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Arr = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const auto rows = pos.rows();
  const auto d = pos.cols();
  const auto r = w.cols();
  // pos rows on top of neg rows; the last column multiplies the bias
  Mat s(2 * rows, d + 1);
  s << pos.cast<Scalar>(), Mat::Ones(rows, 1), neg.cast<Scalar>(), Mat::Ones(rows, 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d + 1, r);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d + 1, r);
  Mat ws(d + 1, r), gs(d + 1, r), z(2 * rows, r);
  Arr a(rows), c(rows);
  const Scalar one(1), zero(0);
  const auto scale_grad = static_cast<Scalar>(2.0 / static_cast<double>(rows));

  double c1 = 1.0;
  double c2 = 1.0;
  for (std::size_t step = 0; step < hyper.steps; ++step) {
    ws = w.cast<Scalar>();
    z.noalias() = s * ws;
    // min(p+, p-) is p+ when p+ <= p-, so the confidence term feeds one side.
    for (Eigen::Index j = 0; j < r; ++j) {
      auto zp = z.col(j).head(rows).array();
      auto zn = z.col(j).tail(rows).array();
      a = one / (one + (-zp).exp());
      c = one / (one + (-zn).exp());
      zp = scale_grad * (a + c - one + (a <= c).select(a, zero)) * a * (one - a);
      zn = scale_grad * (a + c - one + (a <= c).select(zero, c)) * c * (one - c);
    }
    gs.noalias() = s.transpose() * z;
    const Eigen::MatrixXd g = gs.template cast<double>();

    c1 *= hyper.beta1;
    c2 *= hyper.beta2;
    const double step_size = hyper.learning_rate * std::sqrt(1.0 - c2) / (1.0 - c1);
    const double eps_hat = hyper.epsilon * std::sqrt(1.0 - c2);
    m = hyper.beta1 * m + (1.0 - hyper.beta1) * g;
    v = hyper.beta2 * v + (1.0 - hyper.beta2) * g.cwiseProduct(g);
    w.array() -= step_size * m.array() / (v.array().sqrt() + eps_hat);
  }
  return w;
}

}  // namespace ccs_detail

/// Trains a CCS probe on already-normalized activations.
///
/// Every restart draws w ~ N(0, init_scale^2 / d) with b = 0 and runs
/// `steps` full-batch Adam updates; all restarts advance together as the
/// columns of one weight matrix. The restart with the lowest final loss
/// wins (ties: lowest index). A restart whose loss is not finite is
/// discarded. The final losses are evaluated in double precision.
inline LinearProbe train_ccs(const Matrix& pos, const Matrix& neg, const CcsHyper& hyper = {}) {
  if (pos.rows() != neg.rows() || pos.cols() != neg.cols()) throw Error("train_ccs: pos/neg shape mismatch");
  if (pos.rows() < 1 || pos.cols() < 1) throw Error("train_ccs: empty input");
  if (hyper.restarts < 1) throw Error("train_ccs: restarts must be >= 1");
  const auto d = pos.cols();
  const auto r = static_cast<Eigen::Index>(hyper.restarts);
  const double n = static_cast<double>(pos.rows());

  // The last row of w is the bias.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d + 1, r);
  const double scale = hyper.init_scale / std::sqrt(static_cast<double>(d));
  for (Eigen::Index j = 0; j < r; ++j) {
    auto eng = make_engine(derive_seed(hyper.seed, stream::ccs_restart, static_cast<std::uint64_t>(j)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index k = 0; k < d; ++k) w(k, j) = scale * gauss(eng);
  }
  w = hyper.precision == CcsPrecision::single ? ccs_detail::adam_restarts<float>(pos, neg, std::move(w), hyper)
                                              : ccs_detail::adam_restarts<double>(pos, neg, std::move(w), hyper);

  const Eigen::MatrixXd top = w.topRows(d);
  const Eigen::RowVectorXd b = w.row(d);
  const Eigen::ArrayXXd pp = 1.0 / (1.0 + (-((pos * top).rowwise() + b).array()).exp());
  const Eigen::ArrayXXd pn = 1.0 / (1.0 + (-((neg * top).rowwise() + b).array()).exp());
  const Eigen::RowVectorXd losses =
      ((pp + pn - 1.0).square() + pp.min(pn).square()).colwise().sum().matrix() / n;
  Eigen::Index best = -1;
  for (Eigen::Index j = 0; j < r; ++j) {
    if (!std::isfinite(losses(j)) || !w.col(j).allFinite()) continue;
    if (best < 0 || losses(j) < losses(best)) best = j;
  }
  if (best < 0) throw Error("train_ccs: every restart diverged (non-finite loss)");

  LinearProbe probe;
  probe.kind = ProbeKind::ccs;
  probe.w = w.col(best).head(d);
  probe.b = b(best);
  probe.final_loss = losses(best);
  return probe;
}

/// score_i = (p(x_i+) + 1 - p(x_i-)) / 2; label 1 iff score > 0.5, then
/// inverted when the probe is flipped.
inline Predictions ccs_predict(const LinearProbe& probe, const Matrix& pos, const Matrix& neg) {
  if (pos.cols() != probe.w.size() || neg.cols() != probe.w.size() || pos.rows() != neg.rows()) {
    throw Error("ccs_predict: shape mismatch");
  }
  const Eigen::ArrayXd pp = sigmoid((pos * probe.w).array() + probe.b);
  const Eigen::ArrayXd pn = sigmoid((neg * probe.w).array() + probe.b);
  Predictions out;
  out.scores = ((pp + 1.0 - pn) * 0.5).matrix();
  out.labels.resize(static_cast<std::size_t>(pos.rows()));
  for (Eigen::Index i = 0; i < pos.rows(); ++i) {
    const int label = out.scores(i) > 0.5 ? 1 : 0;
    out.labels[static_cast<std::size_t>(i)] = probe.flipped ? 1 - label : label;
  }
  return out;
}

}  // namespace probelab
