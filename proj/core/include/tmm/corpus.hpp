#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tmm/example.hpp"

namespace tmm {

enum class Split : std::uint8_t { Train, Dev, Test, Unspecified };

std::string_view to_string(Split s) noexcept;

inline constexpr std::string_view kRecordFormatHeader = "# tmm-absa v1";

/// A task-homogeneous set of annotated sentences. Exactly one of `atsa` /
/// `acsa` is populated, according to `task`.
struct Corpus {
  Task task = Task::Atsa;
  Split split = Split::Unspecified;
  std::vector<AtsaExample> atsa;
  std::vector<AcsaExample> acsa;
  /// False for prediction input, where polarity fields are absent.
  bool labeled = true;
  std::string source;
  std::string format_version = "tmm-absa v1";
  /// Sentences with fewer than two aspects or a single polarity.
  std::size_t mams_warnings = 0;

  std::size_t size() const noexcept { return task == Task::Atsa ? atsa.size() : acsa.size(); }
  std::size_t aspect_count() const noexcept;
  const std::vector<std::string>& tokens(std::size_t i) const;
  std::vector<Polarity> polarities(std::size_t i) const;
  std::vector<std::vector<std::string>> token_sequences() const;

  /// Equality of the annotated content (task, examples, labeled flag).
  bool same_content(const Corpus& other) const;
};

struct LoadOptions {
  bool require_polarity = true;
  Split split = Split::Unspecified;
};

/// Reads the line-delimited record format: the header line "# tmm-absa v1",
/// then one JSON object per line with fields text, task and aspects
/// ({term, from, to, polarity} for ATSA, {category, polarity} for ACSA).
/// ATSA aspects are reordered by `from`. Blank lines are skipped.
///
/// Throws EmptyCorpus, ParseError (message carries the line number),
/// SpanMismatch, SpanOutOfRange, OverlappingSpans, UnknownCategory.
Corpus load_corpus(const std::filesystem::path& path, Task task, const LoadOptions& options = {});
Corpus read_corpus(std::istream& in, Task task, const std::string& source, const LoadOptions& options = {});

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t aspects = 0;
  double average = 0.0;
  std::size_t positive = 0;
  std::size_t neutral = 0;
  std::size_t negative = 0;

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats compute_stats(const Corpus& corpus);
/// "Sen. Asp. Ave. Pos. Neu. Neg." row with the average to two decimals.
std::string format_stats(const CorpusStats& stats);

}  // namespace tmm
