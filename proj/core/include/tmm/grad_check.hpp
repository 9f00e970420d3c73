#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "tmm/tape.hpp"

namespace tmm {

/// Builds a scalar objective on the given tape. The objective is expected to
/// bind the tensors under test itself (tape.bind) so that both the analytic
/// gradient and the perturbed evaluations see the same storage.
using Objective = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares the reverse-mode gradient of `f` with central differences
/// (f(x+h) - f(x-h)) / 2h on every coordinate of every input. The error of a
/// coordinate is |numeric - analytic| / max(1, |analytic|).
///
/// h must lie in [1e-7, 1e-4]. Throws NonDeterministicFunction if two
/// evaluations at the unperturbed point disagree. Inputs are restored on
/// return; their grad buffers hold the analytic gradient.
GradCheckResult grad_check(const Objective& f, std::span<Tensor* const> inputs, double h = 1e-5);

/// Forward-only evaluation of a scalar objective.
double evaluate_objective(const Objective& f);

}  // namespace tmm
