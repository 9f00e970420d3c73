#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tmm/tape.hpp"

// Differentiable primitives. Every function records exactly one node on the
// tape of its inputs. Shape mismatches throw Error(ShapeMismatch) naming both
// shapes; no broadcasting is performed except the row-vector bias in add_bias.
namespace tmm::ops {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// x[m x n] + bias[n] added to every row.
Var add_bias(Var x, Var bias);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
/// Exact (erf-based) GELU.
Var gelu(Var x);
/// Row-wise softmax with max-shift. Throws NonFiniteInput on NaN/Inf input.
Var softmax_rows(Var x);
/// Per-row standardization with population variance, then gain/bias.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
/// Rows of table[V x d] selected by ids. Throws IdOutOfRange.
Var embedding_lookup(Var table, std::span<const std::uint32_t> ids);
/// Inverted dropout with a Bernoulli mask drawn from `seed`. Identity (no
/// node recorded) when !train or p == 0.
Var dropout(Var x, double p, std::uint64_t seed, bool train);
Var concat_rows(std::span<const Var> parts);
/// Rows [begin, end).
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var concat_cols(std::span<const Var> parts);
/// Columns [begin, end).
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var transpose(Var x);
/// Rows of x at `rows`, in order; repeated rows are allowed. Throws IndexOutOfRange.
Var gather_rows(Var x, std::span<const std::size_t> rows);
/// Sum of all elements, as a [1] tensor.
Var sum(Var x);

struct NllResult {
  Var total;
  std::vector<double> per_row;
  std::size_t clipped = 0;
};

/// Sum over rows of -log(max(probs[i, targets[i]], floor)). Rows whose gold
/// probability fell below `floor` are counted in `clipped` and contribute no
/// gradient.
NllResult nll_rows(Var probs, std::span<const std::size_t> targets, double floor = 1e-12);

}  // namespace tmm::ops
