#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmm {

enum class ErrorKind {
  // numerics
  ShapeMismatch,
  NonFiniteInput,
  NonDeterministicFunction,
  IndexOutOfRange,
  // tokenizer
  EmptyCorpus,
  OverlappingSpans,
  SpanOutOfRange,
  UnknownCategory,
  AspectIndexOutOfRange,
  // encoder / head
  SequenceTooLong,
  IdOutOfRange,
  LayerOutOfRange,
  AnchorOutOfRange,
  EmptyBatch,
  // optimizer
  NonFiniteGradient,
  // data
  ParseError,
  SpanMismatch,
  InfeasibleSpec,
  // metrics
  LengthMismatch,
  EmptyInput,
  // cli
  TaskMismatch,
  DivergenceDetected,
  ConfigError,
  CheckpointFormat,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Process exit code for an error: 2 for numerical failures, 1 for everything
/// else (validation, I/O, configuration).
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the "Kind: " prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace tmm
