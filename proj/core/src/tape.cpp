#include "tmm/tape.hpp"

#include "tmm/error.hpp"

namespace tmm {

std::string_view to_string(OpTag tag) noexcept {
  switch (tag) {
    case OpTag::Leaf: return "leaf";
    case OpTag::Matmul: return "matmul";
    case OpTag::Add: return "add";
    case OpTag::AddBias: return "add_bias";
    case OpTag::Mul: return "mul";
    case OpTag::Scale: return "scale";
    case OpTag::Gelu: return "gelu";
    case OpTag::SoftmaxRows: return "softmax_rows";
    case OpTag::LayerNorm: return "layer_norm";
    case OpTag::EmbeddingLookup: return "embedding_lookup";
    case OpTag::Dropout: return "dropout";
    case OpTag::ConcatRows: return "concat_rows";
    case OpTag::SliceRows: return "slice_rows";
    case OpTag::ConcatCols: return "concat_cols";
    case OpTag::SliceCols: return "slice_cols";
    case OpTag::Transpose: return "transpose";
    case OpTag::GatherRows: return "gather_rows";
    case OpTag::Sum: return "sum";
    case OpTag::NllRows: return "nll_rows";
    case OpTag::Custom: return "custom";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape_->value(index_); }

std::span<const double> Var::grad() const { return tape_->grad_if_any(index_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::bind(Tensor& external, bool track_grad) {
  Node n;
  n.external = &external;
  if (track_grad) {
    external.grad();  // make sure the buffer exists before backward writes to it
    n.external_grad = &external;
    n.requires_grad = true;
  }
  return push(std::move(n));
}

Var Tape::bind_constant(const Tensor& external) {
  Node n;
  n.external = &external;
  return push(std::move(n));
}

Var Tape::record(OpTag tag, std::span<const Var> inputs, Tensor value, BackwardFn backward) {
  Node n;
  n.tag = tag;
  n.owned = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const Var& v : inputs) {
    if (&v.tape() != this) throw Error(ErrorKind::InvalidArgument, "input recorded on another tape");
    n.inputs.push_back(v.index());
    n.requires_grad = n.requires_grad || nodes_[v.index()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor& Tape::value(std::size_t node) const {
  const Node& n = nodes_[node];
  return n.external ? *n.external : n.owned;
}

std::span<double> Tape::grad(std::size_t node) {
  Node& n = nodes_[node];
  if (n.external_grad) return n.external_grad->grad();
  if (n.grad.empty()) n.grad.assign(value(node).size(), 0.0);
  return n.grad;
}

std::span<const double> Tape::grad_if_any(std::size_t node) const {
  const Node& n = nodes_[node];
  if (n.external_grad) return n.external_grad->grad();
  return n.grad;
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw Error(ErrorKind::InvalidArgument, "root recorded on another tape");
  if (value(root.index()).size() != 1) {
    throw Error(ErrorKind::ShapeMismatch,
                "backward root must be scalar, got " + shape_string(value(root.index()).shape()));
  }
  grad(root.index())[0] += 1.0;
  for (std::size_t i = root.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, i);
  }
}

}  // namespace tmm
