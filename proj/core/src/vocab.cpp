#include "tmm/vocab.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "tmm/error.hpp"

namespace tmm {

namespace {

constexpr std::array<std::string_view, special::kReservedCount> kReserved = {
    "[PAD]", "[UNK]", "[AS]", "[AE]", "[CLS]", "[SEP]"};

constexpr std::string_view kHeaderPrefix = "# tmm-vocab v1 min_frequency=";

}  // namespace

std::span<const std::string_view> reserved_tokens() noexcept { return kReserved; }

Vocab::Vocab() {
  for (std::string_view t : kReserved) {
    ids_.emplace(std::string(t), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(t);
  }
}

Vocab Vocab::build(std::span<const std::vector<std::string>> corpus, std::size_t min_frequency,
                   std::span<const std::string> always_include) {
  if (min_frequency < 1) throw Error(ErrorKind::InvalidArgument, "min_frequency must be >= 1");
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "cannot build a vocabulary from an empty corpus");

  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& sequence : corpus) {
    for (const auto& token : sequence) ++counts[token];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, count] : counts) {
    if (count >= min_frequency) ranked.emplace_back(token, count);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  Vocab vocab;
  vocab.min_frequency_ = min_frequency;
  auto admit = [&vocab](const std::string& token) {
    if (vocab.ids_.contains(token)) return;
    vocab.ids_.emplace(token, static_cast<TokenId>(vocab.tokens_.size()));
    vocab.tokens_.push_back(token);
  };
  for (const auto& entry : ranked) admit(entry.first);
  for (const auto& token : always_include) admit(token);
  return vocab;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens, std::size_t min_frequency) {
  if (tokens.size() < special::kReservedCount) {
    throw Error(ErrorKind::ParseError, "vocabulary shorter than the reserved block");
  }
  for (std::size_t i = 0; i < special::kReservedCount; ++i) {
    if (tokens[i] != kReserved[i]) {
      throw Error(ErrorKind::ParseError, "reserved id " + std::to_string(i) + " must be " +
                                             std::string(kReserved[i]) + ", got " + tokens[i]);
    }
  }
  Vocab vocab;
  vocab.min_frequency_ = min_frequency;
  for (std::size_t i = special::kReservedCount; i < tokens.size(); ++i) {
    if (tokens[i].empty() || vocab.ids_.contains(tokens[i])) {
      throw Error(ErrorKind::ParseError, "empty or duplicate vocabulary token at id " + std::to_string(i));
    }
    vocab.ids_.emplace(tokens[i], static_cast<TokenId>(i));
    vocab.tokens_.push_back(std::move(tokens[i]));
  }
  return vocab;
}

TokenId Vocab::id(std::string_view token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? special::kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

const std::string& Vocab::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw Error(ErrorKind::IdOutOfRange, "token id " + std::to_string(id) + " >= vocabulary size " +
                                             std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::vector<TokenId> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

void Vocab::save(std::ostream& out) const {
  out << kHeaderPrefix << min_frequency_ << '\n';
  for (const auto& t : tokens_) out << t << '\n';
}

Vocab Vocab::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with(kHeaderPrefix)) {
    throw Error(ErrorKind::ParseError, "missing vocabulary header");
  }
  std::size_t min_frequency = 0;
  try {
    min_frequency = std::stoul(line.substr(kHeaderPrefix.size()));
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "bad min_frequency in vocabulary header");
  }
  std::vector<std::string> tokens;
  while (std::getline(in, line)) tokens.push_back(line);
  return from_tokens(std::move(tokens), min_frequency);
}

}  // namespace tmm
