#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmm/tape.hpp"
#include "tmm/tensor.hpp"
#include "tmm/vocab.hpp"

namespace tmm {

struct ModelConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t hidden = 64;
  std::size_t ffn = 256;
  std::size_t max_len = 128;
  std::size_t vocab_size = special::kReservedCount;
  double dropout = 0.1;
  std::size_t classes = 3;

  /// Throws ConfigError unless hidden % heads == 0, dimensions >= 1 (layers
  /// may be 0), 0 <= dropout < 1 and classes == 3.
  void validate() const;
  std::size_t head_dim() const noexcept { return hidden / heads; }

  /// 24 layers, 16 heads, hidden 1024: the size of the pretrained encoder the
  /// scheme was designed to fine-tune. Documented reference only.
  static ModelConfig full_scale_reference(std::size_t vocab_size);

  bool operator==(const ModelConfig&) const = default;
};

struct LayerParams {
  Tensor attn_norm_gain, attn_norm_bias;
  Tensor q_weight, q_bias, k_weight, k_bias, v_weight, v_bias;
  Tensor out_weight, out_bias;
  Tensor ffn_norm_gain, ffn_norm_bias;
  Tensor ffn_in_weight, ffn_in_bias, ffn_out_weight, ffn_out_bias;
};

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

struct ConstNamedTensor {
  std::string name;
  const Tensor* tensor;
};

struct ModelParams {
  Tensor token_embedding;     // [vocab x d]
  Tensor position_embedding;  // [max_len x d]
  std::vector<LayerParams> layers;
  Tensor final_norm_gain, final_norm_bias;  // [d]
  Tensor classifier_weight;                 // [d x 3]
  Tensor classifier_bias;                   // [3]

  /// normal(0, 0.02) projections and embeddings, zero biases, unit norm gains.
  static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

  /// Every array with a stable, unique name, in a fixed order.
  std::vector<NamedTensor> named();
  std::vector<ConstNamedTensor> named() const;
  std::vector<Tensor*> all();
  std::size_t parameter_count() const;
  void zero_grad();
  /// Throws ShapeMismatch if any array disagrees with `config`.
  void check_shapes(const ModelConfig& config) const;
};

struct BoundLayer {
  Var attn_norm_gain, attn_norm_bias;
  Var q_weight, q_bias, k_weight, k_bias, v_weight, v_bias;
  Var out_weight, out_bias;
  Var ffn_norm_gain, ffn_norm_bias;
  Var ffn_in_weight, ffn_in_bias, ffn_out_weight, ffn_out_bias;
};

/// Parameters placed on a tape, either tracking gradients (training) or as
/// constants (inference). Neither variant copies the arrays.
struct BoundParams {
  Var token_embedding, position_embedding;
  std::vector<BoundLayer> layers;
  Var final_norm_gain, final_norm_bias;
  Var classifier_weight, classifier_bias;
};

BoundParams bind_params(Tape& tape, ModelParams& params);
BoundParams bind_params_constant(Tape& tape, const ModelParams& params);

enum class Mode : std::uint8_t { Train, Eval };

/// attention[layer][head] is a [T x T] row-stochastic matrix.
struct AttentionRecord {
  std::vector<std::vector<Tensor>> maps;

  std::size_t layers() const noexcept { return maps.size(); }
};

struct EncoderOutput {
  Var hidden;  // [T x d], final-layer representation per token
  AttentionRecord attention;
};

/// Pre-norm transformer encoder: token + learned position embeddings, then
/// `layers` blocks of (LN -> multi-head self-attention -> residual, LN -> GELU
/// FFN -> residual), then a final layer norm. Dropout applies to the
/// embedding sum and to both sublayer outputs in train mode only.
/// Throws SequenceTooLong or IdOutOfRange.
EncoderOutput encode(const BoundParams& params, std::span<const TokenId> ids, const ModelConfig& config,
                     Mode mode, std::uint64_t seed);

/// Mean over heads of one layer, or over every head of every layer when
/// `layer` is empty. Throws LayerOutOfRange.
Tensor average_attention(const AttentionRecord& record, std::optional<std::size_t> layer);

}  // namespace tmm
