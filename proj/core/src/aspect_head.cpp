#include "tmm/aspect_head.hpp"

#include "tmm/error.hpp"
#include "tmm/ops.hpp"

namespace tmm {

std::vector<Polarity> SentimentDistribution::predictions() const {
  std::vector<Polarity> out;
  if (!probs) return out;
  const Tensor& p = probs->value();
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kPolarityCount; ++c) {
      if (p.at(i, c) > p.at(i, best)) best = c;
    }
    out.push_back(static_cast<Polarity>(best));
  }
  return out;
}

std::vector<double> SentimentDistribution::probabilities(std::size_t aspect) const {
  if (!probs || aspect >= count) {
    throw Error(ErrorKind::IndexOutOfRange, "no distribution for aspect " + std::to_string(aspect));
  }
  auto row = probs->value().row(aspect);
  return {row.begin(), row.end()};
}

AspectRepresentation gather_anchors(Var hidden, std::span<const std::size_t> anchors) {
  AspectRepresentation reps;
  reps.count = anchors.size();
  const std::size_t length = hidden.value().rows();
  for (std::size_t a : anchors) {
    if (a >= length) {
      throw Error(ErrorKind::AnchorOutOfRange,
                  "anchor " + std::to_string(a) + " outside sequence of " + std::to_string(length));
    }
  }
  if (!anchors.empty()) reps.rows = ops::gather_rows(hidden, anchors);
  return reps;
}

SentimentDistribution classify(const AspectRepresentation& reps, Var weight, Var bias) {
  const Tensor& w = weight.value();
  const Tensor& b = bias.value();
  if (w.rank() != 2 || w.cols() != kPolarityCount || b.size() != kPolarityCount) {
    throw Error(ErrorKind::ShapeMismatch, "classifier expects weight [d x 3] and bias [3], got " +
                                              shape_string(w.shape()) + " and " + shape_string(b.shape()));
  }
  SentimentDistribution dist;
  dist.count = reps.count;
  if (!reps.rows) return dist;
  if (reps.rows->value().cols() != w.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "representations " + shape_string(reps.rows->shape()) +
                                              " do not match classifier weight " + shape_string(w.shape()));
  }
  dist.logits = ops::add_bias(ops::matmul(*reps.rows, weight), bias);
  dist.probs = ops::softmax_rows(*dist.logits);
  return dist;
}

JointLoss joint_loss(std::span<const SentimentDistribution> distributions,
                     std::span<const std::vector<Polarity>> gold, LossReduction reduction) {
  if (distributions.size() != gold.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(distributions.size()) + " sentences but " +
                                               std::to_string(gold.size()) + " label lists");
  }
  JointLoss result;
  std::vector<Var> terms;
  for (std::size_t s = 0; s < distributions.size(); ++s) {
    const SentimentDistribution& dist = distributions[s];
    if (dist.count != gold[s].size()) {
      throw Error(ErrorKind::LengthMismatch, "sentence " + std::to_string(s) + " has " +
                                                 std::to_string(dist.count) + " aspects but " +
                                                 std::to_string(gold[s].size()) + " labels");
    }
    if (dist.count == 0) continue;
    std::vector<std::size_t> targets;
    for (Polarity p : gold[s]) targets.push_back(index_of(p));
    ops::NllResult nll = ops::nll_rows(*dist.probs, targets, kProbabilityFloor);
    result.raw += nll.total.value()[0];
    result.clipped += nll.clipped;
    result.aspects += dist.count;
    result.per_aspect_nll.insert(result.per_aspect_nll.end(), nll.per_row.begin(), nll.per_row.end());
    terms.push_back(nll.total);
  }
  if (result.aspects == 0) throw Error(ErrorKind::EmptyBatch, "batch contains no aspects");
  Var total = terms.size() == 1 ? terms.front() : ops::sum(ops::concat_rows(terms));
  result.loss = reduction == LossReduction::Sum
                    ? total
                    : ops::scale(total, 1.0 / static_cast<double>(result.aspects));
  return result;
}

}  // namespace tmm
