#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "tmm/tensor.hpp"

namespace tmm {

enum class OpTag {
  Leaf,
  Matmul,
  Add,
  AddBias,
  Mul,
  Scale,
  Gelu,
  SoftmaxRows,
  LayerNorm,
  EmbeddingLookup,
  Dropout,
  ConcatRows,
  SliceRows,
  ConcatCols,
  SliceCols,
  Transpose,
  GatherRows,
  Sum,
  NllRows,
  Custom,
};

std::string_view to_string(OpTag tag) noexcept;

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid for the
/// lifetime of its tape.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const noexcept { return *tape_; }
  std::size_t index() const noexcept { return index_; }

  /// Valid for the lifetime of the tape.
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  /// Gradient accumulated by Tape::backward (empty if none reached this node).
  std::span<const double> grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Reverse-mode computation record. Every primitive appends one node holding
/// its output value, its inputs, and a closure implementing its backward rule.
/// Records are appended in execution order, so a reverse sweep is a valid
/// topological order.
///
/// Leaves either own their value (constant/variable) or reference an external
/// Tensor (bind), in which case gradients accumulate directly into that
/// tensor's grad buffer. The tape is single-threaded.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  /// References `external` without copying. With track_grad, backward
  /// accumulates into external.grad().
  Var bind(Tensor& external, bool track_grad = true);
  Var bind_constant(const Tensor& external);

  /// Appends a primitive. `backward` may be empty when no input needs a
  /// gradient. Exposed so callers can define their own primitives.
  Var record(OpTag tag, std::span<const Var> inputs, Tensor value, BackwardFn backward);

  /// Seeds d(root)/d(root) = 1 and sweeps the record in reverse. The root
  /// must hold a single element.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(std::size_t node) const;
  bool requires_grad(std::size_t node) const { return nodes_[node].requires_grad; }
  OpTag tag(std::size_t node) const { return nodes_[node].tag; }
  std::span<const std::size_t> inputs(std::size_t node) const { return nodes_[node].inputs; }

  /// Gradient buffer of a node; allocated (zeroed) on first access.
  std::span<double> grad(std::size_t node);
  /// Gradient of a node if one has been accumulated, else empty.
  std::span<const double> grad_if_any(std::size_t node) const;

 private:
  struct Node {
    OpTag tag = OpTag::Leaf;
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor* external_grad = nullptr;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Node node);

  std::deque<Node> nodes_;
};

}  // namespace tmm
