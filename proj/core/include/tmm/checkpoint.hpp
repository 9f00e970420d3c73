#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "tmm/adam.hpp"
#include "tmm/encoder.hpp"
#include "tmm/example.hpp"
#include "tmm/run_config.hpp"
#include "tmm/vocab.hpp"

namespace tmm {

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t run = 0;
  /// 1-based epoch the parameters come from; 0 for an untrained model.
  std::size_t epoch = 0;
  double best_dev_macro_f1 = 0.0;

  bool operator==(const TrainingMetadata&) const = default;
};

/// A self-describing trained model.
///
/// Byte layout (all integers little-endian):
///   8 bytes  magic "TMMCKPT\0"
///   u32      format version (1)
///   u64      header length H, then H bytes of JSON (config, task, scheme,
///            vocab, metadata, optimizer hyperparameters and step)
///   u32      array count N, then N times:
///            u32 name length, name bytes, u32 rank, u64 dims[rank],
///            f64 values (IEEE-754 binary64, row-major)
/// Model arrays come first in ModelParams::named() order, followed by the
/// optional optimizer moments "adam.m.<name>" and "adam.v.<name>".
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  ModelConfig config;
  Task task = Task::Atsa;
  TrainScheme scheme = TrainScheme::Tmm;
  Vocab vocab;
  ModelParams params;
  std::optional<AdamState> adam;
  TrainingMetadata metadata;

  std::string serialize() const;
  /// Throws CheckpointFormat.
  static Checkpoint deserialize(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  bool operator==(const Checkpoint& other) const;
};

}  // namespace tmm
