#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tmm/tensor.hpp"

namespace tmm {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Learning rate used when fine-tuning a large pretrained encoder.
  static constexpr double kFineTuneLearningRate = 1e-5;

  bool operator==(const AdamHyper&) const = default;
};

/// First/second moment estimates per parameter array plus the step count.
struct AdamState {
  AdamHyper hyper;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  /// Zeroed moments shaped like `params`.
  static AdamState for_params(std::span<Tensor* const> params, const AdamHyper& hyper);

  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update using each parameter's grad buffer:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
/// Throws ShapeMismatch if the state does not match `params` or a gradient is
/// missing, NonFiniteGradient on NaN/Inf. Nothing is modified on error.
void adam_step(std::span<Tensor* const> params, AdamState& state);

/// Scales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<Tensor* const> params, double max_norm);

}  // namespace tmm
