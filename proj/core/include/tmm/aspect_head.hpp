#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tmm/example.hpp"
#include "tmm/tape.hpp"

namespace tmm {

/// Hidden states of the anchor tokens, one row per aspect. `rows` is empty
/// when the sequence has no aspects.
struct AspectRepresentation {
  std::optional<Var> rows;  // [m x d]
  std::size_t count = 0;
};

/// Per-aspect logits and softmax distributions over the three polarities.
struct SentimentDistribution {
  std::optional<Var> logits;  // [m x 3]
  std::optional<Var> probs;   // [m x 3]
  std::size_t count = 0;

  /// Argmax per aspect; ties resolve to the lower class index.
  std::vector<Polarity> predictions() const;
  std::vector<double> probabilities(std::size_t aspect) const;
};

/// Exact row selection of hidden[anchors[i]]. Throws AnchorOutOfRange.
AspectRepresentation gather_anchors(Var hidden, std::span<const std::size_t> anchors);

/// softmax(H W_o + b_o) per aspect, with W_o [d x 3] and b_o [3].
/// Throws ShapeMismatch.
SentimentDistribution classify(const AspectRepresentation& reps, Var weight, Var bias);

enum class LossReduction { Sum, MeanOverAspects };

struct JointLoss {
  /// Value to optimize: raw sum, or raw sum / total aspects for
  /// MeanOverAspects. Invalid when the batch has no aspects.
  Var loss;
  /// Cross-entropy summed over every aspect of every sentence.
  double raw = 0.0;
  std::size_t aspects = 0;
  /// NLL per aspect, sentence-major.
  std::vector<double> per_aspect_nll;
  /// Aspects whose gold probability was clipped to 1e-12 before the log.
  std::size_t clipped = 0;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Cross-entropy over all aspects of all sentences in a batch. Every
/// distribution must live on the same tape. Throws EmptyBatch if there are
/// no aspects, LengthMismatch if label counts disagree.
JointLoss joint_loss(std::span<const SentimentDistribution> distributions,
                     std::span<const std::vector<Polarity>> gold,
                     LossReduction reduction = LossReduction::MeanOverAspects);

}  // namespace tmm
