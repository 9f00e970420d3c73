#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "tmm/grad_check_suite.hpp"
#include "tmm/metrics.hpp"
#include "tmm/run_config.hpp"
#include "tmm/trainer.hpp"

namespace tmm {

/// Flags shared by the subcommands; each command reads the ones it needs.
struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::uint64_t> seed;
  /// "all" or a layer index.
  std::optional<std::string> layer;
  std::optional<std::string> scheme;
  std::optional<std::string> task;
  std::optional<std::size_t> index;
  bool quiet = false;
};

/// Config file (or defaults) with --seed, --scheme and --task applied.
RunConfig resolve_config(const CommandOptions& options);

/// Train/dev/test from `data_dir`/{train,dev,test}.jsonl when given, otherwise
/// from the config paths. Test is optional.
Datasets load_datasets(const RunConfig& config, const std::optional<std::filesystem::path>& data_dir);

/// Datasets drawn from config.synthetic.
Datasets synthetic_datasets(const RunConfig& config);

/// "all" -> empty; otherwise a non-negative integer. Throws InvalidArgument.
std::optional<std::size_t> parse_layer(std::string_view text);

struct Comparison {
  TrainResult tmm;
  TrainResult baseline;
  /// Test sentences with at least one aspect.
  std::size_t test_sentences = 0;
  std::size_t test_aspects = 0;
  std::size_t tmm_forward_passes = 0;
  std::size_t baseline_forward_passes = 0;

  double delta_macro_f1() const;
  bool forward_counts_hold() const noexcept {
    return tmm_forward_passes == test_sentences && baseline_forward_passes == test_aspects;
  }
  std::string to_json() const;
};

/// Trains both schemes with identical budgets and seeds and evaluates them on
/// the test split, which must exist.
Comparison run_comparison(const RunConfig& config, const Datasets& data, const EpochCallback& on_epoch = {});

std::string train_report_json(const RunConfig& config, const TrainResult& result);

// Subcommands. Each writes its artifacts and a human summary to `out`;
// errors propagate as tmm::Error.
void cmd_gen_data(const CommandOptions& options, std::ostream& out);
TrainResult cmd_train(const CommandOptions& options, std::ostream& out, std::ostream& log);
MetricsReport cmd_evaluate(const CommandOptions& options, std::ostream& out);
void cmd_predict(const CommandOptions& options, std::ostream& out);
void cmd_attn(const CommandOptions& options, std::ostream& out);
/// Returns the report; the caller decides the exit status from passed().
GradCheckReport cmd_grad_check(const CommandOptions& options, std::ostream& out);
Comparison cmd_compare(const CommandOptions& options, std::ostream& out, std::ostream& log);

/// Dispatches a subcommand by name and maps errors to exit codes:
/// 0 success, 1 validation error, 2 numerical failure.
int run_command(std::string_view name, const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace tmm
