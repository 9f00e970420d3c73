#include "tmm/sequence.hpp"

#include "tmm/error.hpp"

namespace tmm {

std::string_view to_string(SequenceScheme s) noexcept {
  switch (s) {
    case SequenceScheme::TmmAtsa: return "tmm-atsa";
    case SequenceScheme::TmmAcsa: return "tmm-acsa";
    case SequenceScheme::BaselineSingle: return "baseline-single";
  }
  return "unknown";
}

namespace {

void push(EncodedSequence& seq, TokenId id, std::ptrdiff_t origin) {
  seq.ids.push_back(id);
  seq.origin.push_back(origin);
}

void truncate_to(EncodedSequence& seq, std::size_t max_len) {
  if (seq.ids.size() <= max_len) return;
  seq.ids.resize(max_len);
  seq.origin.resize(max_len);
}

[[noreturn]] void too_long(std::size_t length, std::size_t max_len, const char* why) {
  throw Error(ErrorKind::SequenceTooLong, "encoded length " + std::to_string(length) + " exceeds " +
                                              std::to_string(max_len) + " and " + why);
}

EncodedSequence baseline(std::span<const TokenId> aspect_ids, std::span<const std::ptrdiff_t> aspect_origin,
                         const std::vector<std::string>& sentence, Polarity gold, std::size_t aspect_index,
                         const Vocab& vocab, std::size_t max_len) {
  EncodedSequence seq;
  seq.scheme = SequenceScheme::BaselineSingle;
  seq.aspect_index = aspect_index;
  push(seq, special::kCls, -1);
  for (std::size_t i = 0; i < aspect_ids.size(); ++i) push(seq, aspect_ids[i], aspect_origin[i]);
  push(seq, special::kSep, -1);
  if (seq.ids.size() > max_len) too_long(seq.ids.size(), max_len, "the aspect segment does not fit");
  for (std::size_t w = 0; w < sentence.size(); ++w) push(seq, vocab.id(sentence[w]), static_cast<std::ptrdiff_t>(w));
  push(seq, special::kSep, -1);
  truncate_to(seq, max_len);
  seq.anchors = {0};
  seq.gold = {gold};
  return seq;
}

}  // namespace

EncodedSequence encode_tmm_atsa(const AtsaExample& example, const Vocab& vocab, std::size_t max_len) {
  example.validate();
  EncodedSequence seq;
  seq.scheme = SequenceScheme::TmmAtsa;
  const std::size_t n = example.tokens.size();
  seq.ids.reserve(n + 2 * example.aspects.size());
  std::size_t next = 0;
  std::size_t last_region_end = 0;
  for (std::size_t w = 0; w < n; ++w) {
    if (next < example.aspects.size() && example.aspects[next].start == w) {
      seq.anchors.push_back(seq.ids.size());
      seq.gold.push_back(example.aspects[next].polarity);
      push(seq, special::kAspectStart, -1);
    }
    push(seq, vocab.id(example.tokens[w]), static_cast<std::ptrdiff_t>(w));
    if (next < example.aspects.size() && example.aspects[next].end == w + 1) {
      push(seq, special::kAspectEnd, -1);
      last_region_end = seq.ids.size();
      ++next;
    }
  }
  if (seq.ids.size() > max_len) {
    if (last_region_end > max_len) too_long(seq.ids.size(), max_len, "truncation would cut an aspect region");
    truncate_to(seq, max_len);
  }
  return seq;
}

EncodedSequence encode_tmm_acsa(const AcsaExample& example, const Vocab& vocab, std::size_t max_len) {
  example.validate();
  EncodedSequence seq;
  seq.scheme = SequenceScheme::TmmAcsa;
  const std::size_t n = example.tokens.size();
  const std::size_t total = n + 2 * example.aspects.size();
  if (total > max_len && !example.aspects.empty()) {
    too_long(total, max_len, "truncation would cut the aspect block");
  }
  seq.ids.reserve(total);
  for (std::size_t w = 0; w < n; ++w) push(seq, vocab.id(example.tokens[w]), static_cast<std::ptrdiff_t>(w));
  for (const CategoryAspect& a : example.aspects) {
    const std::string_view name = to_string(a.category);
    if (!vocab.contains(name)) {
      throw Error(ErrorKind::UnknownCategory, "category token '" + std::string(name) + "' missing from vocabulary");
    }
    seq.anchors.push_back(seq.ids.size());
    seq.gold.push_back(a.polarity);
    push(seq, special::kAspectStart, -1);
    push(seq, vocab.id(name), -1);
  }
  truncate_to(seq, max_len);
  return seq;
}

EncodedSequence encode_baseline_single(const AtsaExample& example, std::size_t aspect_index,
                                       const Vocab& vocab, std::size_t max_len) {
  example.validate();
  if (aspect_index >= example.aspects.size()) {
    throw Error(ErrorKind::AspectIndexOutOfRange, "aspect " + std::to_string(aspect_index) + " of " +
                                                      std::to_string(example.aspects.size()));
  }
  const TermAspect& a = example.aspects[aspect_index];
  std::vector<TokenId> ids;
  std::vector<std::ptrdiff_t> origin;
  for (std::size_t w = a.start; w < a.end; ++w) {
    ids.push_back(vocab.id(example.tokens[w]));
    origin.push_back(-1);
  }
  return baseline(ids, origin, example.tokens, a.polarity, aspect_index, vocab, max_len);
}

EncodedSequence encode_baseline_single(const AcsaExample& example, std::size_t aspect_index,
                                       const Vocab& vocab, std::size_t max_len) {
  example.validate();
  if (aspect_index >= example.aspects.size()) {
    throw Error(ErrorKind::AspectIndexOutOfRange, "aspect " + std::to_string(aspect_index) + " of " +
                                                      std::to_string(example.aspects.size()));
  }
  const CategoryAspect& a = example.aspects[aspect_index];
  const std::string_view name = to_string(a.category);
  if (!vocab.contains(name)) {
    throw Error(ErrorKind::UnknownCategory, "category token '" + std::string(name) + "' missing from vocabulary");
  }
  const TokenId ids[] = {vocab.id(name)};
  const std::ptrdiff_t origin[] = {-1};
  return baseline(ids, origin, example.tokens, a.polarity, aspect_index, vocab, max_len);
}

std::vector<std::string> strip_anchor_tokens(const EncodedSequence& sequence, const Vocab& vocab) {
  std::vector<std::string> out;
  const bool category_follows = sequence.scheme == SequenceScheme::TmmAcsa;
  for (std::size_t i = 0; i < sequence.ids.size(); ++i) {
    const TokenId id = sequence.ids[i];
    if (id == special::kAspectStart) {
      if (category_follows) ++i;
      continue;
    }
    if (id == special::kAspectEnd) continue;
    out.push_back(vocab.token(id));
  }
  return out;
}

std::vector<std::string> category_tokens() {
  std::vector<std::string> out;
  for (Category c : kAllCategories) out.emplace_back(to_string(c));
  return out;
}

}  // namespace tmm
