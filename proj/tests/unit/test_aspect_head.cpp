#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tmm/aspect_head.hpp"
#include "tmm/ops.hpp"
#include "tmm/tape.hpp"
#include "tmm_testing.hpp"

using namespace tmm;
using tmm::test::kind_of;

namespace {

SentimentDistribution fixed(Tape& tape, std::size_t m, std::vector<double> probs) {
  SentimentDistribution d;
  d.count = m;
  d.probs = tape.constant(Tensor({m, 3}, std::move(probs)));
  return d;
}

}  // namespace

TEST(GatherAnchors, ExactRowSelection) {
  Tape tape;
  const Var h = tape.constant(Tensor::matrix(4, 2, {0, 1, 10, 11, 20, 21, 30, 31}));
  const std::size_t anchors[] = {3, 1};
  const AspectRepresentation reps = gather_anchors(h, anchors);
  ASSERT_TRUE(reps.rows);
  EXPECT_EQ(reps.count, 2u);
  const Tensor& r = reps.rows->value();
  EXPECT_EQ(r.shape(), (Shape{2, 2}));
  EXPECT_EQ(r.at(0, 0), 30.0);
  EXPECT_EQ(r.at(0, 1), 31.0);
  EXPECT_EQ(r.at(1, 0), 10.0);
}

TEST(GatherAnchors, EmptyAndOutOfRange) {
  Tape tape;
  const Var h = tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  const AspectRepresentation none = gather_anchors(h, {});
  EXPECT_FALSE(none.rows);
  EXPECT_EQ(none.count, 0u);
  const std::size_t bad[] = {2};
  EXPECT_EQ(kind_of([&] { gather_anchors(h, bad); }), ErrorKind::AnchorOutOfRange);
}

TEST(GatherAnchors, GradientScattersToAnchorRows) {
  Tape tape;
  Var h = tape.variable(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}));
  const std::size_t anchors[] = {2, 0, 2};
  const AspectRepresentation reps = gather_anchors(h, anchors);
  tape.backward(ops::sum(*reps.rows));
  const auto g = h.grad();
  EXPECT_EQ(std::vector<double>(g.begin(), g.end()), (std::vector<double>{1, 1, 0, 0, 2, 2}));
}

TEST(Classify, MatchesOracle) {
  Tape tape;
  const Var h = tape.constant(Tensor::matrix(2, 4, {0.3, -1.2, 0.5, 2.0, -0.7, 0.1, 0.9, -0.4}));
  const Var w = tape.constant(
      Tensor::matrix(4, 3, {0.2, -0.1, 0.05, 0.4, 0.3, -0.2, -0.6, 0.1, 0.7, 0.15, -0.25, 0.35}));
  const Var b = tape.constant(Tensor::vector({0.1, -0.2, 0.05}));
  const std::size_t anchors[] = {0, 1};
  const SentimentDistribution d = classify(gather_anchors(h, anchors), w, b);
  const double expected[] = {0.14650839568744356, 0.07131329211793934, 0.7821783121946171,
                             0.16797814618880574, 0.33490063930199926, 0.497121214509195};
  ASSERT_TRUE(d.probs);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(d.probs->value().values()[i], expected[i], 1e-12) << i;
  EXPECT_EQ(d.predictions(), (std::vector<Polarity>{Polarity::Negative, Polarity::Negative}));
  const auto p1 = d.probabilities(1);
  EXPECT_NEAR(p1[0] + p1[1] + p1[2], 1.0, 1e-15);
  EXPECT_EQ(kind_of([&] { d.probabilities(2); }), ErrorKind::IndexOutOfRange);
}

TEST(Classify, NoAspectsGivesEmptyDistribution) {
  Tape tape;
  const Var w = tape.constant(Tensor({4, 3}));
  const Var b = tape.constant(Tensor({3}));
  const SentimentDistribution d = classify(AspectRepresentation{}, w, b);
  EXPECT_EQ(d.count, 0u);
  EXPECT_FALSE(d.probs);
  EXPECT_TRUE(d.predictions().empty());
}

TEST(Classify, ShapeErrors) {
  Tape tape;
  const Var h = tape.constant(Tensor({2, 4}));
  const std::size_t anchors[] = {0};
  const AspectRepresentation reps = gather_anchors(h, anchors);
  EXPECT_EQ(kind_of([&] { classify(reps, tape.constant(Tensor({4, 2})), tape.constant(Tensor({3}))); }),
            ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([&] { classify(reps, tape.constant(Tensor({5, 3})), tape.constant(Tensor({3}))); }),
            ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([&] { classify(reps, tape.constant(Tensor({4, 3})), tape.constant(Tensor({2}))); }),
            ErrorKind::ShapeMismatch);
}

TEST(Predictions, TiesResolveToLowerIndex) {
  Tape tape;
  SentimentDistribution d = fixed(tape, 3, {0.4, 0.4, 0.2, 0.2, 0.4, 0.4, 1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_EQ(d.predictions(), (std::vector<Polarity>{Polarity::Positive, Polarity::Neutral, Polarity::Positive}));
}

TEST(JointLoss, MatchesOracle) {
  Tape tape;
  const std::vector<SentimentDistribution> dists = {
      fixed(tape, 2, {0.7, 0.2, 0.1, 0.25, 0.5, 0.25}),
      fixed(tape, 3, {0.1, 0.1, 0.8, 0.3, 0.3, 0.4, 0.05, 0.9, 0.05}),
  };
  const std::vector<std::vector<Polarity>> gold = {
      {Polarity::Positive, Polarity::Negative},
      {Polarity::Negative, Polarity::Neutral, Polarity::Neutral},
  };
  const JointLoss sum = joint_loss(dists, gold, LossReduction::Sum);
  EXPECT_NEAR(sum.raw, 3.275446176356595, 1e-12);
  EXPECT_NEAR(sum.loss.value()[0], 3.275446176356595, 1e-12);
  EXPECT_EQ(sum.aspects, 5u);
  ASSERT_EQ(sum.per_aspect_nll.size(), 5u);
  EXPECT_NEAR(sum.per_aspect_nll[0], -std::log(0.7), 1e-15);
  EXPECT_NEAR(sum.per_aspect_nll[1], -std::log(0.25), 1e-15);
  EXPECT_EQ(sum.clipped, 0u);

  const JointLoss mean = joint_loss(dists, gold, LossReduction::MeanOverAspects);
  EXPECT_NEAR(mean.loss.value()[0], 0.655089235271319, 1e-12);
  EXPECT_NEAR(mean.raw, 3.275446176356595, 1e-12);
}

TEST(JointLoss, UniformPredictionIsLnThreePerAspect) {
  Tape tape;
  const Var logits = tape.constant(Tensor({4, 3}, 0.25));
  SentimentDistribution d;
  d.count = 4;
  d.logits = logits;
  d.probs = ops::softmax_rows(logits);
  const std::vector<SentimentDistribution> dists = {d};
  const std::vector<std::vector<Polarity>> gold = {
      {Polarity::Positive, Polarity::Neutral, Polarity::Negative, Polarity::Neutral}};
  const JointLoss mean = joint_loss(dists, gold);
  EXPECT_NEAR(mean.loss.value()[0], std::log(3.0), 1e-12);
  const JointLoss sum = joint_loss(dists, gold, LossReduction::Sum);
  EXPECT_NEAR(sum.raw, 4.0 * std::log(3.0), 1e-12);
}

TEST(JointLoss, LogitGradientIsProbabilitiesMinusOneHot) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Tape tape;
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 4);
    Tensor raw({m, 3});
    for (double& v : raw.values()) v = n(rng);
    Var logits = tape.variable(raw);
    SentimentDistribution d;
    d.count = m;
    d.logits = logits;
    d.probs = ops::softmax_rows(logits);
    std::vector<Polarity> labels;
    for (std::size_t i = 0; i < m; ++i) labels.push_back(static_cast<Polarity>(rng() % 3));
    const std::vector<SentimentDistribution> dists = {d};
    const std::vector<std::vector<Polarity>> gold = {labels};
    const JointLoss loss = joint_loss(dists, gold, LossReduction::Sum);
    tape.backward(loss.loss);
    const auto g = logits.grad();
    const Tensor& p = d.probs->value();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double onehot = index_of(labels[i]) == c ? 1.0 : 0.0;
        EXPECT_NEAR(g[i * 3 + c], p.at(i, c) - onehot, 1e-8);
      }
    }
  }
}

TEST(JointLoss, MeanReductionScalesGradient) {
  Tape tape;
  Var logits = tape.variable(Tensor::matrix(2, 3, {1.0, -0.5, 0.2, 0.3, 0.3, -1.0}));
  SentimentDistribution d;
  d.count = 2;
  d.logits = logits;
  d.probs = ops::softmax_rows(logits);
  const std::vector<SentimentDistribution> dists = {d};
  const std::vector<std::vector<Polarity>> gold = {{Polarity::Neutral, Polarity::Negative}};
  tape.backward(joint_loss(dists, gold).loss);
  const Tensor& p = d.probs->value();
  EXPECT_NEAR(logits.grad()[1], (p.at(0, 1) - 1.0) / 2.0, 1e-12);
  EXPECT_NEAR(logits.grad()[3], p.at(1, 0) / 2.0, 1e-12);
}

TEST(JointLoss, ZeroAspectSentencesContributeNothing) {
  Tape tape;
  const std::vector<SentimentDistribution> dists = {SentimentDistribution{}, fixed(tape, 1, {0.5, 0.25, 0.25})};
  const std::vector<std::vector<Polarity>> gold = {{}, {Polarity::Positive}};
  const JointLoss l = joint_loss(dists, gold);
  EXPECT_NEAR(l.loss.value()[0], std::log(2.0), 1e-15);
  EXPECT_EQ(l.aspects, 1u);
}

TEST(JointLoss, ClipsZeroProbability) {
  Tape tape;
  const std::vector<SentimentDistribution> dists = {fixed(tape, 1, {1.0, 0.0, 0.0})};
  const std::vector<std::vector<Polarity>> gold = {{Polarity::Negative}};
  const JointLoss l = joint_loss(dists, gold, LossReduction::Sum);
  EXPECT_EQ(l.clipped, 1u);
  EXPECT_NEAR(l.raw, -std::log(kProbabilityFloor), 1e-9);
  EXPECT_TRUE(std::isfinite(l.raw));
}

TEST(JointLoss, Errors) {
  Tape tape;
  const std::vector<SentimentDistribution> one = {fixed(tape, 1, {0.2, 0.3, 0.5})};
  const std::vector<std::vector<Polarity>> two_lists = {{Polarity::Positive}, {Polarity::Neutral}};
  EXPECT_EQ(kind_of([&] { joint_loss(one, two_lists); }), ErrorKind::LengthMismatch);
  const std::vector<std::vector<Polarity>> wrong_count = {{Polarity::Positive, Polarity::Neutral}};
  EXPECT_EQ(kind_of([&] { joint_loss(one, wrong_count); }), ErrorKind::LengthMismatch);
  const std::vector<SentimentDistribution> empty = {SentimentDistribution{}};
  const std::vector<std::vector<Polarity>> none = {{}};
  EXPECT_EQ(kind_of([&] { joint_loss(empty, none); }), ErrorKind::EmptyBatch);
  EXPECT_EQ(kind_of([&] { joint_loss({}, {}); }), ErrorKind::EmptyBatch);
}
