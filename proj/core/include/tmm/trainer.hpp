#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tmm/checkpoint.hpp"
#include "tmm/corpus.hpp"
#include "tmm/metrics.hpp"
#include "tmm/run_config.hpp"
#include "tmm/sequence.hpp"

namespace tmm {

/// Vocabulary over the training sentences; ACSA vocabularies always admit
/// the category words.
Vocab build_vocab(const Corpus& train, std::size_t min_frequency);

/// TMM: one sequence per sentence. Baseline: one sequence per aspect,
/// sentence-major.
std::vector<EncodedSequence> encode_corpus(const Corpus& corpus, const Vocab& vocab, TrainScheme scheme,
                                           std::size_t max_len);

/// Number of encoder forward passes needed to label every aspect of `corpus`:
/// sentences with at least one aspect for TMM, aspects for the baseline.
std::size_t forward_pass_count(const Corpus& corpus, TrainScheme scheme) noexcept;

struct Prediction {
  std::vector<Polarity> labels;
  std::vector<std::array<double, kPolarityCount>> probabilities;
};

/// Eval-mode predictions, one entry per sentence in input order. Sentences
/// without aspects yield empty predictions. Throws TaskMismatch.
std::vector<Prediction> predict(const Checkpoint& model, const Corpus& corpus,
                                std::size_t* forward_passes = nullptr);

struct Evaluation {
  MetricsReport report;
  std::size_t forward_passes = 0;
};

/// Throws TaskMismatch, EmptyInput (no aspects anywhere).
Evaluation evaluate(const Checkpoint& model, const Corpus& corpus);

struct EpochLog {
  std::size_t run = 0;
  std::size_t epoch = 0;  // 1-based
  /// Mean cross-entropy per training aspect over the epoch.
  double train_loss = 0.0;
  MetricsReport dev;
  bool improved = false;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

struct Datasets {
  Corpus train;
  Corpus dev;
  std::optional<Corpus> test;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<EpochLog> epochs;
  /// Parameters and optimizer state from the best dev epoch.
  Checkpoint best;
  std::optional<Evaluation> test;
  std::size_t forward_passes_per_epoch = 0;
};

struct TrainResult {
  std::vector<RunResult> runs;
  std::optional<MetricsReport> averaged_test;
};

/// One seeded training run with seed config.seed + run_index: per-epoch
/// shuffling, mini-batches of sentences (TMM) or aspect instances (baseline),
/// one Adam step per batch, best epoch by dev macro-F1, early stopping after
/// `patience` epochs without improvement.
/// Throws DivergenceDetected when the loss becomes non-finite.
RunResult train_run(const RunConfig& config, const Datasets& data, std::size_t run_index,
                    const EpochCallback& on_epoch = {});

/// config.runs runs; test metrics averaged across runs when a test set exists.
TrainResult train(const RunConfig& config, const Datasets& data, const EpochCallback& on_epoch = {});

}  // namespace tmm
