#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "tmm/adam.hpp"
#include "tmm/aspect_head.hpp"
#include "tmm/encoder.hpp"
#include "tmm/example.hpp"
#include "tmm/synthetic.hpp"

namespace tmm {

/// tmm: all aspects of a sentence in one anchored sequence.
/// baseline: one [CLS] aspect [SEP] sentence [SEP] instance per aspect.
enum class TrainScheme : std::uint8_t { Tmm, Baseline };

std::string_view to_string(TrainScheme s) noexcept;
/// Accepts "tmm", "baseline" and "baseline-single". Throws ConfigError.
TrainScheme parse_scheme(std::string_view name);

/// Everything a training, evaluation or comparison run needs.
///
/// File format: one "key = value" per line, '#' starts a comment, unknown
/// keys are errors. See README for the key list.
struct RunConfig {
  Task task = Task::Atsa;
  TrainScheme scheme = TrainScheme::Tmm;
  ModelConfig model;
  AdamHyper adam;
  /// Global gradient-norm cap; 0 disables clipping.
  double clip_norm = 5.0;
  LossReduction reduction = LossReduction::MeanOverAspects;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  /// Epochs without dev improvement before stopping; 0 disables.
  std::size_t patience = 5;
  std::uint64_t seed = 7;
  std::size_t runs = 3;
  std::size_t min_frequency = 1;
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  std::filesystem::path out_dir;
  SyntheticSpec synthetic = SyntheticSpec::defaults();

  /// Throws ConfigError.
  void validate() const;
  /// Applies one key/value pair. Throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Canonical text form; parse(to_text()) reproduces the config.
  std::string to_text() const;

  static RunConfig parse(std::istream& in, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);
};

}  // namespace tmm
