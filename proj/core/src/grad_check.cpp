#include "tmm/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tmm/error.hpp"

namespace tmm {

double evaluate_objective(const Objective& f) {
  Tape tape;
  Var y = f(tape);
  if (y.value().size() != 1) {
    throw Error(ErrorKind::ShapeMismatch, "objective must be scalar, got " + shape_string(y.shape()));
  }
  return y.value()[0];
}

GradCheckResult grad_check(const Objective& f, std::span<Tensor* const> inputs, double h) {
  if (!(h >= 1e-7 && h <= 1e-4)) {
    throw Error(ErrorKind::InvalidArgument, "finite-difference step must be in [1e-7, 1e-4]");
  }
  for (Tensor* t : inputs) t->zero_grad();

  double base = 0.0;
  {
    Tape tape;
    Var y = f(tape);
    if (y.value().size() != 1) {
      throw Error(ErrorKind::ShapeMismatch, "objective must be scalar, got " + shape_string(y.shape()));
    }
    base = y.value()[0];
    tape.backward(y);
  }
  const double again = evaluate_objective(f);
  if (again != base) {
    throw Error(ErrorKind::NonDeterministicFunction,
                "objective changed between identical evaluations");
  }

  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor& t = *inputs[k];
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double original = t[i];
      t[i] = original + h;
      const double plus = evaluate_objective(f);
      t[i] = original - h;
      const double minus = evaluate_objective(f);
      t[i] = original;
      const double numeric = (plus - minus) / (2.0 * h);
      double err = std::abs(numeric - analytic[i]) / std::max(1.0, std::abs(analytic[i]));
      if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
      ++result.coordinates;
      if (err > result.max_relative_error || result.coordinates == 1) {
        result.max_relative_error = err;
        result.worst_input = k;
        result.worst_index = i;
        result.worst_analytic = analytic[i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace tmm
