#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tmm/encoder.hpp"
#include "tmm/grad_check.hpp"

namespace tmm {

inline constexpr double kPrimitiveGradTolerance = 1e-6;
inline constexpr double kEndToEndGradTolerance = 1e-4;

struct GradCheckCase {
  std::string name;
  double threshold = kPrimitiveGradTolerance;
  std::function<GradCheckResult()> run;
};

struct GradCheckOutcome {
  std::string name;
  double threshold = 0.0;
  GradCheckResult result;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckOutcome> outcomes;
  double seconds = 0.0;

  bool passed() const noexcept;
  /// {"passed": bool, "checks": [{"name", "max_relative_error", "threshold",
  /// "coordinates", "passed"}, ...]}
  std::string to_json() const;
};

/// One case per differentiable primitive, each reduced to a scalar through a
/// fixed random weighting.
std::vector<GradCheckCase> primitive_cases(std::uint64_t seed);

/// Joint loss over two toy multi-aspect sentences with respect to every model
/// parameter, dropout active with fixed seeds.
GradCheckCase end_to_end_case(const ModelConfig& config, std::uint64_t seed);

/// Smallest model the end-to-end check runs on: 1 layer, 2 heads, hidden 8.
ModelConfig grad_check_model_config();

std::vector<GradCheckCase> default_grad_check_suite(std::uint64_t seed);

/// A case that throws reports an infinite error and fails.
GradCheckReport run_grad_check_suite(std::span<const GradCheckCase> cases);

}  // namespace tmm
