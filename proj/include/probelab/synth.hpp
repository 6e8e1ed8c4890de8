#pragma once

#include "probelab/dataset.hpp"
#include "probelab/linalg.hpp"
#include "probelab/rng.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace probelab {

// Ground-truth feature directions for the synthetic contrast-pair model.
//
// Row layout for m distractors (k = 4 + 5m rows):
//   plus, minus, know_true, know_false,
//   distractor(j)            for j in [0, m)
//   xor_pm(side, j)          for j in [0, m), side in {plus=0, minus=1}
//   xor_know(truth, j)       for j in [0, m), truth in {true=0, false=1}
enum class RoleKind { plus, minus, know_true, know_false, distractor, xor_pm, xor_know };

struct FeatureRole {
  RoleKind kind;
  int arg = 0;         // side for xor_pm, truth for xor_know
  int distractor = 0;  // j for distractor / xor_* roles
};

inline std::string to_string(const FeatureRole& r) {
  switch (r.kind) {
    case RoleKind::plus: return "plus";
    case RoleKind::minus: return "minus";
    case RoleKind::know_true: return "know_true";
    case RoleKind::know_false: return "know_false";
    case RoleKind::distractor: return "distractor(" + std::to_string(r.distractor) + ")";
    case RoleKind::xor_pm:
      return std::string("xor_pm(") + (r.arg == 0 ? "plus" : "minus") + "," +
             std::to_string(r.distractor) + ")";
    case RoleKind::xor_know:
      return std::string("xor_know(") + (r.arg == 0 ? "true" : "false") + "," +
             std::to_string(r.distractor) + ")";
  }
  return "?";
}

struct SynthCoefficients {
  double pm = 1.0;
  double know = 1.0;
  double distract = 0.0;
  double xor_pm = 0.0;
  double xor_know = 0.0;
};

struct SynthConfig {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t m = 2;
  SynthCoefficients coef;
  double noise_sigma = 0.0;
  bool balanced = true;
  std::uint64_t seed = 0;
};

inline std::size_t feature_count(std::size_t m) { return 4 + 5 * m; }

class FeatureBank {
 public:
  FeatureBank(Matrix directions, std::size_t m) : directions_(std::move(directions)), m_(m) {
    roles_ = {{RoleKind::plus}, {RoleKind::minus}, {RoleKind::know_true}, {RoleKind::know_false}};
    for (int j = 0; j < static_cast<int>(m); ++j) roles_.push_back({RoleKind::distractor, 0, j});
    for (int j = 0; j < static_cast<int>(m); ++j) {
      for (int side = 0; side < 2; ++side) roles_.push_back({RoleKind::xor_pm, side, j});
    }
    for (int j = 0; j < static_cast<int>(m); ++j) {
      for (int truth = 0; truth < 2; ++truth) roles_.push_back({RoleKind::xor_know, truth, j});
    }
  }

  const Matrix& directions() const { return directions_; }
  const std::vector<FeatureRole>& roles() const { return roles_; }
  std::size_t size() const { return roles_.size(); }
  std::size_t distractors() const { return m_; }

  Eigen::Index index(RoleKind kind, int arg = 0, int j = 0) const {
    const auto m = static_cast<Eigen::Index>(m_);
    switch (kind) {
      case RoleKind::plus: return 0;
      case RoleKind::minus: return 1;
      case RoleKind::know_true: return 2;
      case RoleKind::know_false: return 3;
      case RoleKind::distractor: return 4 + j;
      case RoleKind::xor_pm: return 4 + m + 2 * j + arg;
      case RoleKind::xor_know: return 4 + 3 * m + 2 * j + arg;
    }
    return -1;
  }

  RowVector row(RoleKind kind, int arg = 0, int j = 0) const {
    return directions_.row(index(kind, arg, j));
  }

  // F_+ - F_-
  RowVector syntactic() const { return row(RoleKind::plus) - row(RoleKind::minus); }
  // F_true - F_false
  RowVector knowledge() const { return row(RoleKind::know_true) - row(RoleKind::know_false); }
  // F_f(+,j) - F_f(-,j)
  RowVector delta_pm(int j) const { return row(RoleKind::xor_pm, 0, j) - row(RoleKind::xor_pm, 1, j); }
  // F_f(true,j) - F_f(false,j)
  RowVector delta_know(int j) const {
    return row(RoleKind::xor_know, 0, j) - row(RoleKind::xor_know, 1, j);
  }

 private:
  Matrix directions_;
  std::size_t m_;
  std::vector<FeatureRole> roles_;
};

/// Orthonormal feature directions from seeded Gaussian vectors
/// (modified Gram-Schmidt, two passes).
inline FeatureBank make_feature_bank(std::size_t d, std::size_t m, std::uint64_t seed) {
  const std::size_t k = feature_count(m);
  if (d < k) {
    throw Error("feature bank: d=" + std::to_string(d) + " too small for m=" + std::to_string(m) +
                " (need d >= " + std::to_string(k) + ")");
  }
  auto eng = make_engine(derive_seed(seed, stream::feature_bank));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index c = 0; c < q.cols(); ++c) q(i, c) = gauss(eng);
  }
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index p = 0; p < i; ++p) q.row(i) -= q.row(i).dot(q.row(p)) * q.row(p);
      q.row(i) /= q.row(i).norm();
    }
  }
  return FeatureBank(std::move(q), m);
}

inline void validate(const SynthConfig& cfg) {
  if (cfg.n < 2) throw Error("synth config: n must be >= 2");
  if (cfg.m < 1) throw Error("synth config: m must be >= 1");
  if (cfg.d < feature_count(cfg.m)) {
    throw Error("synth config: d=" + std::to_string(cfg.d) + " too small for m=" +
                std::to_string(cfg.m) + " (need d >= " + std::to_string(feature_count(cfg.m)) + ")");
  }
  if (!(cfg.noise_sigma >= 0.0)) throw Error("synth config: noise_sigma must be >= 0");
  if (cfg.balanced && cfg.n % cfg.m != 0) {
    throw Error("synth config: balanced mode requires m to divide n");
  }
}

struct SyntheticData {
  ContrastPairSet set;
  FeatureBank bank;
  std::vector<int> distractor;  // j_i per row
};

/// Samples the synthetic contrast-pair model.
///
///   pos_i = c_pm F_+ + c_know F_t(+,l) + c_distract F_j + c_xor_pm F_f(+,j)
///           + c_xor_know F_f(t(+,l),j) + noise
///   neg_i = same with F_-, t(-,l) and F_f(-,j)
///
/// t(+,l) is know_true iff l = 1 and t(-,l) is the opposite truth value.
/// Balanced mode assigns j = i mod m and alternates labels within each
/// distractor group; the group means are exact when 2m divides n.
/// Otherwise labels and distractors are independent fair draws.
inline SyntheticData generate_synthetic(const SynthConfig& cfg) {
  validate(cfg);
  FeatureBank bank = make_feature_bank(cfg.d, cfg.m, cfg.seed);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto d = static_cast<Eigen::Index>(cfg.d);
  const auto& c = cfg.coef;

  ContrastPairSet set;
  set.pos = Matrix::Zero(n, d);
  set.neg = Matrix::Zero(n, d);
  std::vector<int> labels(cfg.n);
  std::vector<int> distractor(cfg.n);
  std::vector<RowMeta> meta(cfg.n);

  for (Eigen::Index i = 0; i < n; ++i) {
    auto eng = make_engine(derive_seed(cfg.seed, stream::synth_row, static_cast<std::uint64_t>(i)));
    int label = 0;
    int j = 0;
    if (cfg.balanced) {
      j = static_cast<int>(static_cast<std::size_t>(i) % cfg.m);
      label = static_cast<int>((static_cast<std::size_t>(i) / cfg.m) % 2);
    } else {
      label = std::bernoulli_distribution(0.5)(eng) ? 1 : 0;
      j = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, cfg.m - 1)(eng));
    }
    // truth index: 0 = true, 1 = false
    const int truth_pos = label == 1 ? 0 : 1;
    const int truth_neg = 1 - truth_pos;
    auto know = [&](int truth) { return bank.row(truth == 0 ? RoleKind::know_true : RoleKind::know_false); };

    RowVector p = c.pm * bank.row(RoleKind::plus) + c.know * know(truth_pos) +
                  c.distract * bank.row(RoleKind::distractor, 0, j) +
                  c.xor_pm * bank.row(RoleKind::xor_pm, 0, j) +
                  c.xor_know * bank.row(RoleKind::xor_know, truth_pos, j);
    RowVector q = c.pm * bank.row(RoleKind::minus) + c.know * know(truth_neg) +
                  c.distract * bank.row(RoleKind::distractor, 0, j) +
                  c.xor_pm * bank.row(RoleKind::xor_pm, 1, j) +
                  c.xor_know * bank.row(RoleKind::xor_know, truth_neg, j);
    if (cfg.noise_sigma > 0.0) {
      std::normal_distribution<double> gauss(0.0, cfg.noise_sigma);
      for (Eigen::Index k = 0; k < d; ++k) p(k) += gauss(eng);
      for (Eigen::Index k = 0; k < d; ++k) q(k) += gauss(eng);
    }
    set.pos.row(i) = p;
    set.neg.row(i) = q;
    labels[static_cast<std::size_t>(i)] = label;
    distractor[static_cast<std::size_t>(i)] = j;
    meta[static_cast<std::size_t>(i)] = {{"label", std::to_string(label)},
                                         {"distractor", std::to_string(j)}};
  }
  set.labels = std::move(labels);
  set.meta = std::move(meta);
  return {std::move(set), std::move(bank), std::move(distractor)};
}

}  // namespace probelab
