#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "tmm/example.hpp"

namespace tmm {

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  bool operator==(const ClassCounts&) const = default;
};

/// Per-class confusion counts. Additive, so evaluation shards can be merged.
struct ConfusionCounts {
  std::array<ClassCounts, kPolarityCount> per_class{};
  std::size_t total = 0;

  /// Throws LengthMismatch.
  static ConfusionCounts count(std::span<const Polarity> predictions, std::span<const Polarity> gold);
  std::size_t correct() const noexcept;
  ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept;

  bool operator==(const ConfusionCounts&) const = default;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const ClassScores&) const = default;
};

struct MetricsReport {
  std::array<ClassScores, kPolarityCount> per_class{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::optional<double> combined;
  ConfusionCounts counts;

  const ClassScores& of(Polarity p) const noexcept { return per_class[index_of(p)]; }
  bool operator==(const MetricsReport&) const = default;
};

/// Per-class P/R/F1, macro-F1 (mean of per-class F1) and accuracy. Any ratio
/// with a zero denominator is 0. Throws LengthMismatch, EmptyInput.
MetricsReport score(std::span<const Polarity> predictions, std::span<const Polarity> gold);
/// Throws EmptyInput when counts.total is 0.
MetricsReport report_from_counts(const ConfusionCounts& counts);

double combined_score(const MetricsReport& atsa, const MetricsReport& acsa) noexcept;

/// Field-wise mean of several reports (multi-run averaging); counts are summed.
/// Throws EmptyInput.
MetricsReport average_reports(std::span<const MetricsReport> reports);

/// Machine-readable document with full precision:
/// {"per_class": {"positive": {"p","r","f1"}, ...}, "macro_f1", "accuracy", "combined"}.
std::string to_json(const MetricsReport& report);
/// Parses the document written by to_json (counts are not restored).
MetricsReport report_from_json(const std::string& text);
/// Human-readable table, 4 decimals.
std::string format_report(const MetricsReport& report);

}  // namespace tmm
