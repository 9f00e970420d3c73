#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tmm/checkpoint.hpp"
#include "tmm/corpus.hpp"
#include "tmm/sequence.hpp"
#include "tmm/tensor.hpp"
#include "tmm/trainer.hpp"

namespace tmm {

/// Head-averaged self-attention of one encoded sentence.
struct AttentionView {
  EncodedSequence sequence;
  /// Display token per position; unknown words show their source spelling.
  std::vector<std::string> tokens;
  /// Aspect term or category name per anchor.
  std::vector<std::string> anchor_labels;
  /// [T x T], row i is the attention distribution of position i.
  Tensor matrix;
  Prediction prediction;

  /// Highest-weight position of `row` whose token is not a reserved marker;
  /// ties resolve to the lower position. Empty if every position is reserved.
  std::optional<std::size_t> top_content_position(std::size_t row) const;
};

/// Runs sentence `index` of `corpus` through the model in eval mode and
/// averages attention over the heads of `layer` (or of every layer when
/// empty). Throws LayerOutOfRange, TaskMismatch, IndexOutOfRange.
AttentionView attention_view(const Checkpoint& model, const Corpus& corpus, std::size_t index,
                             std::optional<std::size_t> layer);

/// Whitespace-separated rows, one per line, values printed with %.17g.
void write_attention_matrix(std::ostream& out, const Tensor& matrix);
/// Inverse of write_attention_matrix. Throws ParseError.
Tensor read_attention_matrix(std::istream& in);

/// Standalone HTML page: one row per anchor, labeled with its aspect, each
/// token shaded in proportion to its weight relative to the row maximum.
std::string render_heatmap_html(const AttentionView& view, const std::string& title);

}  // namespace tmm
