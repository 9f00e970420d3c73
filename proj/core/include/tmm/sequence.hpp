#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tmm/example.hpp"
#include "tmm/vocab.hpp"

namespace tmm {

enum class SequenceScheme : std::uint8_t { TmmAtsa, TmmAcsa, BaselineSingle };

std::string_view to_string(SequenceScheme s) noexcept;

inline constexpr std::size_t kDefaultMaxSequenceLength = 128;

/// Token ids fed to the encoder plus the pooling positions of each aspect.
struct EncodedSequence {
  std::vector<TokenId> ids;
  /// Position of the pooling token of each encoded aspect, strictly increasing.
  std::vector<std::size_t> anchors;
  /// Gold label per anchor (meaningless for unlabeled input).
  std::vector<Polarity> gold;
  /// Source word index of every position, -1 for inserted tokens.
  std::vector<std::ptrdiff_t> origin;
  SequenceScheme scheme = SequenceScheme::TmmAtsa;
  /// Baseline instances only: which aspect of the source example this is.
  std::size_t aspect_index = 0;

  bool operator==(const EncodedSequence&) const = default;
};

/// Wraps every aspect span in [AS] ... [AE]; anchors point at the [AS] tokens.
/// Sequences longer than max_len are cut from the right unless the cut would
/// fall inside or before an aspect region, which throws SequenceTooLong.
EncodedSequence encode_tmm_atsa(const AtsaExample& example, const Vocab& vocab,
                                std::size_t max_len = kDefaultMaxSequenceLength);

/// Sentence followed by "[AS] category" per aspect, in example order.
/// Throws SequenceTooLong if the aspect block does not fit.
EncodedSequence encode_tmm_acsa(const AcsaExample& example, const Vocab& vocab,
                                std::size_t max_len = kDefaultMaxSequenceLength);

/// [CLS] aspect [SEP] sentence [SEP] for a single aspect, pooled at [CLS].
/// Throws AspectIndexOutOfRange.
EncodedSequence encode_baseline_single(const AtsaExample& example, std::size_t aspect_index,
                                       const Vocab& vocab,
                                       std::size_t max_len = kDefaultMaxSequenceLength);
EncodedSequence encode_baseline_single(const AcsaExample& example, std::size_t aspect_index,
                                       const Vocab& vocab,
                                       std::size_t max_len = kDefaultMaxSequenceLength);

/// Tokens of an encoded sequence with [AS]/[AE] removed; for TMM-ACSA the
/// category word after each [AS] is removed as well.
std::vector<std::string> strip_anchor_tokens(const EncodedSequence& sequence, const Vocab& vocab);

/// Category words the ACSA vocabulary always admits.
std::vector<std::string> category_tokens();

}  // namespace tmm
