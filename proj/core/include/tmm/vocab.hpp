#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tmm {

using TokenId = std::uint32_t;

namespace special {
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kAspectStart = 2;  // [AS]
inline constexpr TokenId kAspectEnd = 3;    // [AE]
inline constexpr TokenId kCls = 4;
inline constexpr TokenId kSep = 5;
inline constexpr std::size_t kReservedCount = 6;
}  // namespace special

inline constexpr bool is_special(TokenId id) noexcept { return id < special::kReservedCount; }

/// Token <-> id bijection. Ids 0..5 are always [PAD] [UNK] [AS] [AE] [CLS]
/// [SEP]; every other token maps to [UNK] unless it was admitted at build time.
class Vocab {
 public:
  /// Reserved tokens only.
  Vocab();

  /// Admits every token seen at least `min_frequency` times, ordered by
  /// descending count then lexicographically. `always_include` tokens that did
  /// not qualify are appended afterwards in the given order.
  /// Throws EmptyCorpus when `corpus` has no sequences.
  static Vocab build(std::span<const std::vector<std::string>> corpus, std::size_t min_frequency,
                     std::span<const std::string> always_include = {});

  /// Rebuilds from an id-ordered token list whose first six entries must be
  /// the reserved tokens.
  static Vocab from_tokens(std::vector<std::string> tokens, std::size_t min_frequency);

  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::vector<TokenId> encode(std::span<const std::string> tokens) const;

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t min_frequency() const noexcept { return min_frequency_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Text form: header line "# tmm-vocab v1 min_frequency=N", then one token
  /// per line; line k after the header holds id k.
  void save(std::ostream& out) const;
  static Vocab load(std::istream& in);

  bool operator==(const Vocab& other) const {
    return tokens_ == other.tokens_ && min_frequency_ == other.min_frequency_;
  }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, TokenId, std::less<>> ids_;
  std::size_t min_frequency_ = 1;
};

std::span<const std::string_view> reserved_tokens() noexcept;

}  // namespace tmm
