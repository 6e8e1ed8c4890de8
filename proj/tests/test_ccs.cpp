#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace probelab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Loss computed directly from the two terms, one pair at a time.
double loss_reference(const Matrix& pos, const Matrix& neg, const Vector& w, double b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pos.rows(); ++i) {
    const double a = 1.0 / (1.0 + std::exp(-(pos.row(i).dot(w) + b)));
    const double c = 1.0 / (1.0 + std::exp(-(neg.row(i).dot(w) + b)));
    total += (a - (1.0 - c)) * (a - (1.0 - c)) + std::min(a, c) * std::min(a, c);
  }
  return total / static_cast<double>(pos.rows());
}

}  // namespace

TEST(CcsLoss, HandValues) {
  EXPECT_NEAR(ccs_loss(vec({0.5}), vec({0.5})), 0.25, 1e-12);
  EXPECT_NEAR(ccs_loss(vec({1.0}), vec({0.0})), 0.0, 1e-12);
  EXPECT_NEAR(ccs_loss(vec({0.8}), vec({0.3})), 0.10, 1e-12);
  EXPECT_NEAR(ccs_loss(vec({0.5, 1.0, 0.8}), vec({0.5, 0.0, 0.3})), 0.35 / 3.0, 1e-12);
}

TEST(CcsLoss, Errors) {
  EXPECT_THROW(ccs_loss(vec({1.2}), vec({0.0})), Error);
  EXPECT_THROW(ccs_loss(vec({0.2}), vec({-0.1})), Error);
  EXPECT_THROW(ccs_loss(vec({0.2, 0.3}), vec({0.1})), Error);
  EXPECT_THROW(ccs_loss(Vector(0), Vector(0)), Error);
}

TEST(CcsLoss, PairSwapSymmetry) {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Vector a(7), c(7);
    for (Eigen::Index i = 0; i < 7; ++i) {
      a(i) = u(eng);
      c(i) = u(eng);
    }
    EXPECT_NEAR(ccs_loss(a, c), ccs_loss(c, a), 1e-15);
    // negated probe on swapped pairs: equal wherever the pair is consistent
    const Vector cons = Vector::Ones(7) - a;
    const Vector one = Vector::Ones(7);
    EXPECT_NEAR(ccs_loss(a, cons), ccs_loss(one - cons, one - a), 1e-15);
  }
}

TEST(CcsLoss, NegationIsNotASymmetryOffConsistency) {
  // 0.8 / 0.3: 0.01 + 0.09 against 0.01 + 0.04
  EXPECT_NEAR(ccs_loss(vec({0.8}), vec({0.3})), 0.10, 1e-12);
  EXPECT_NEAR(ccs_loss(vec({0.7}), vec({0.2})), 0.05, 1e-12);
}

TEST(CcsObjective, GradientMatchesCentralDifferences) {
  std::mt19937_64 eng(42);
  std::uniform_int_distribution<int> nd(1, 8), dd(1, 5);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const int n = nd(eng);
    const int d = dd(eng);
    const Matrix pos = testutil::gaussian(n, d, eng);
    const Matrix neg = testutil::gaussian(n, d, eng);
    const Vector w = testutil::gaussian(d, 1, eng);
    const double b = testutil::gaussian(1, 1, eng)(0, 0);
    const auto obj = ccs_objective(pos, neg, w, b);
    EXPECT_NEAR(obj.loss, loss_reference(pos, neg, w, b), 1e-14);
    Vector numeric(d + 1);
    for (int k = 0; k <= d; ++k) {
      Vector wp = w, wm = w;
      double bp = b, bm = b;
      if (k < d) {
        wp(k) += h;
        wm(k) -= h;
      } else {
        bp += h;
        bm -= h;
      }
      numeric(k) = (loss_reference(pos, neg, wp, bp) - loss_reference(pos, neg, wm, bm)) / (2 * h);
    }
    Vector analytic(d + 1);
    analytic << obj.grad_w, obj.grad_b;
    const double rel = (analytic - numeric).norm() / std::max(numeric.norm(), 1e-8);
    EXPECT_LT(rel, 1e-4) << "instance " << t;
  }
}

TEST(TrainCcs, FollowsAdamOnTheAnalyticGradient) {
  std::mt19937_64 eng(7);
  const Matrix pos = testutil::gaussian(40, 6, eng);
  const Matrix neg = testutil::gaussian(40, 6, eng);
  CcsHyper h;
  h.restarts = 1;
  h.steps = 25;
  h.seed = 99;
  h.precision = CcsPrecision::double_;
  // Same init as the trainer, then plain per-step Adam.
  auto init = make_engine(derive_seed(h.seed, stream::ccs_restart, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector w(6);
  for (Eigen::Index k = 0; k < 6; ++k) w(k) = h.init_scale / std::sqrt(6.0) * gauss(init);
  double b = 0.0;
  Vector m = Vector::Zero(7), v = Vector::Zero(7);
  for (std::size_t s = 1; s <= h.steps; ++s) {
    const auto obj = ccs_objective(pos, neg, w, b);
    Vector g(7);
    g << obj.grad_w, obj.grad_b;
    m = h.beta1 * m + (1 - h.beta1) * g;
    v = h.beta2 * v + (1 - h.beta2) * g.cwiseProduct(g);
    const Vector mhat = m / (1 - std::pow(h.beta1, static_cast<double>(s)));
    const Vector vhat = v / (1 - std::pow(h.beta2, static_cast<double>(s)));
    const Vector step = h.learning_rate * mhat.array() / (vhat.array().sqrt() + h.epsilon);
    w -= step.head(6);
    b -= step(6);
  }
  const auto probe = train_ccs(pos, neg, h);
  EXPECT_LE((probe.w - w).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(probe.b, b, 1e-6);
  EXPECT_NEAR(probe.final_loss, ccs_objective(pos, neg, probe.w, probe.b).loss, 1e-12);
}

TEST(TrainCcs, SinglePrecisionProductsTrackDouble) {
  const auto s = testutil::random_set(300, 16, 21);
  CcsHyper h;
  h.seed = 8;
  h.precision = CcsPrecision::double_;
  const auto exact = train_ccs(s.pos, s.neg, h);
  h.precision = CcsPrecision::single;
  const auto fast = train_ccs(s.pos, s.neg, h);
  EXPECT_LE((fast.w - exact.w).norm(), 1e-3 * exact.w.norm());
  EXPECT_NEAR(fast.final_loss, exact.final_loss, 1e-6);
  EXPECT_NEAR(fast.final_loss, ccs_objective(s.pos, s.neg, fast.w, fast.b).loss, 1e-12);
  EXPECT_EQ(parse_ccs_precision("double"), CcsPrecision::double_);
  EXPECT_THROW(parse_ccs_precision("half"), Error);
}

TEST(TrainCcs, DegenerateInputReachesAnalyticMinimum) {
  // pos = neg: per-pair loss (2p-1)^2 + p^2 for p <= 1/2, minimized at p = 0.4 with value 0.2
  std::mt19937_64 eng(11);
  const Matrix x = testutil::gaussian(1000, 8, eng);
  std::vector<int> labels(1000);
  for (auto& l : labels) l = static_cast<int>(eng() % 2);
  const auto probe = train_ccs(x, x, {});
  EXPECT_NEAR(probe.final_loss, 0.2, 0.02);
  const double acc = accuracy(ccs_predict(probe, x, x).labels, labels);
  EXPECT_NEAR(acc, 0.5, 0.05);
}

TEST(TrainCcs, KnowledgeOnlyIsSolved) {
  SynthConfig cfg;
  cfg.n = 400;
  cfg.d = 32;
  cfg.m = 2;
  cfg.coef = {0.0, 1.0, 0.0, 0.0, 0.0};
  cfg.noise_sigma = 0.05;
  cfg.seed = 4;
  const auto data = generate_synthetic(cfg);
  const auto norm = burns_normalize(data.set).first;
  CcsHyper h;
  h.seed = 1;
  const auto probe = train_ccs(norm.pos, norm.neg, h);
  const double acc = accuracy(ccs_predict(probe, norm.pos, norm.neg).labels, *data.set.labels);
  EXPECT_GE(flip_corrected_accuracy(acc), 0.99);
  EXPECT_LT(probe.final_loss, 0.25);
}

TEST(TrainCcs, InvariantsAndDeterminism) {
  const auto s = testutil::random_set(100, 5, 8);
  CcsHyper h;
  h.steps = 200;
  h.seed = 6;
  const auto a = train_ccs(s.pos, s.neg, h);
  const auto b = train_ccs(s.pos, s.neg, h);
  EXPECT_TRUE(a.w.allFinite());
  EXPECT_EQ(a.w, b.w);
  EXPECT_EQ(a.b, b.b);
  EXPECT_GE(a.final_loss, 0.0);
  EXPECT_LE(a.final_loss, 0.25 + 1e-9);
  EXPECT_EQ(a.kind, ProbeKind::ccs);
}

TEST(TrainCcs, KeepsTheLowestLossRestart) {
  const auto s = testutil::random_set(60, 4, 2);
  CcsHyper h;
  h.steps = 50;
  h.restarts = 6;
  h.seed = 3;
  const auto all = train_ccs(s.pos, s.neg, h);
  h.restarts = 1;
  const auto first = train_ccs(s.pos, s.neg, h);
  EXPECT_LE(all.final_loss, first.final_loss + 1e-15);
}

TEST(TrainCcs, Errors) {
  const Matrix a = Matrix::Zero(3, 2);
  const Matrix b = Matrix::Zero(3, 3);
  EXPECT_THROW(train_ccs(a, b), Error);
  CcsHyper h;
  h.restarts = 0;
  EXPECT_THROW(train_ccs(a, a, h), Error);
}

TEST(CcsPredict, ScoresAndTieBreak) {
  const double z9 = std::log(0.9 / 0.1);
  const double z2 = std::log(0.2 / 0.8);
  LinearProbe p;
  p.w = Vector::Ones(1);
  const Matrix pos{{z9}, {0.0}};
  const Matrix neg{{z2}, {0.0}};
  const auto out = ccs_predict(p, pos, neg);
  EXPECT_NEAR(out.scores(0), 0.85, 1e-12);
  EXPECT_EQ(out.labels[0], 1);
  EXPECT_DOUBLE_EQ(out.scores(1), 0.5);
  EXPECT_EQ(out.labels[1], 0);
  p.flipped = true;
  const auto flipped = ccs_predict(p, pos, neg);
  EXPECT_EQ(flipped.labels, (std::vector<int>{0, 1}));
  EXPECT_THROW(ccs_predict(p, Matrix::Zero(2, 3), Matrix::Zero(2, 3)), Error);
}
