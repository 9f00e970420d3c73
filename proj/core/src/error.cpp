#include "tmm/error.hpp"

namespace tmm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NonDeterministicFunction: return "NonDeterministicFunction";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::OverlappingSpans: return "OverlappingSpans";
    case ErrorKind::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::AspectIndexOutOfRange: return "AspectIndexOutOfRange";
    case ErrorKind::SequenceTooLong: return "SequenceTooLong";
    case ErrorKind::IdOutOfRange: return "IdOutOfRange";
    case ErrorKind::LayerOutOfRange: return "LayerOutOfRange";
    case ErrorKind::AnchorOutOfRange: return "AnchorOutOfRange";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SpanMismatch: return "SpanMismatch";
    case ErrorKind::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TaskMismatch: return "TaskMismatch";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::CheckpointFormat: return "CheckpointFormat";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonFiniteInput:
    case ErrorKind::NonDeterministicFunction:
    case ErrorKind::NonFiniteGradient:
    case ErrorKind::DivergenceDetected:
      return 2;
    default:
      return 1;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

}  // namespace tmm
