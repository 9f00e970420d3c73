#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tmm/corpus.hpp"

namespace tmm {

struct AspectNoun {
  std::string word;
  Category category = Category::Food;
};

/// Parameters of the seeded multi-aspect generator.
///
/// Each aspect contributes one clause "the NOUN is [INTENSIFIER] CUE" and
/// clauses are joined by contrastive connectors. With probability
/// `cross_aspect_cue_probability` one clause instead reads
/// "the NOUN , not DISTRACTOR , is CUE", where DISTRACTOR is a cue of another
/// aspect's polarity sitting right next to the wrong noun.
struct SyntheticSpec {
  std::uint64_t seed = 7;
  Task task = Task::Atsa;
  std::size_t train_size = 2000;
  std::size_t dev_size = 500;
  std::size_t test_size = 500;
  /// Aspects per sentence are 2 + Binomial(max_aspects - 2, p) with p chosen
  /// to hit this mean.
  double mean_aspects = 2.6;
  std::size_t max_aspects = 6;
  std::vector<AspectNoun> nouns;
  /// Indexed by Polarity.
  std::array<std::vector<std::string>, kPolarityCount> cues;
  std::vector<std::string> connectors;
  std::vector<std::string> intensifiers;
  std::vector<std::string> openers;
  double cross_aspect_cue_probability = 0.5;
  double intensifier_probability = 0.3;
  double opener_probability = 0.3;

  static SyntheticSpec defaults();

  std::size_t sentence_count() const noexcept { return train_size + dev_size + test_size; }
  /// Throws InfeasibleSpec.
  void validate() const;
};

/// Word positions that carry an aspect's own sentiment: its noun, "is", any
/// intensifier and the gold cue. Distractor words are excluded.
struct CueRegions {
  std::vector<std::vector<std::size_t>> per_aspect;
  /// Position of the gold cue adjective of each aspect.
  std::vector<std::size_t> cue_position;
  /// Aspect index whose clause carries a distractor, or -1.
  std::ptrdiff_t distractor_aspect = -1;

  bool operator==(const CueRegions&) const = default;
};

struct SyntheticSplit {
  Corpus corpus;
  /// Parallel to corpus examples.
  std::vector<CueRegions> cues;
};

struct SyntheticData {
  SyntheticSplit train;
  SyntheticSplit dev;
  SyntheticSplit test;
};

/// Splits are disjoint by sentence text. Throws InfeasibleSpec, including when
/// the lexicons cannot produce enough distinct sentences.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace tmm
