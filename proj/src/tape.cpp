#include "gtp/tape.hpp"

#include "gtp/errors.hpp"

namespace gtp {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Tensor value) { return record("constant", std::move(value), {}, nullptr); }

Var Tape::input(Tensor value) {
  Var v = record("input", std::move(value), {}, nullptr);
  nodes_[v.id()].requires_grad = true;
  return v;
}

Var Tape::param(const Tensor& tensor) {
  if (auto it = param_ids_.find(&tensor); it != param_ids_.end()) {
    return Var(this, it->second);
  }
  Var v = record("param", tensor, {}, nullptr);
  nodes_[v.id()].requires_grad = true;
  param_ids_.emplace(&tensor, v.id());
  return v;
}

Var Tape::record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError(op, "forward output " + value.shape_string() + " contains NaN or Inf");
  }
  Node node;
  node.op = op;
  node.value = std::move(value);
  for (std::size_t in : inputs) {
    node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
  }
  node.inputs = std::move(inputs);
  if (node.requires_grad) {
    node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) const {
  static const Tensor kEmpty;
  const Node& n = nodes_[id];
  return n.has_grad ? n.grad : kEmpty;
}

Tensor& Tape::grad_mut(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) {
    throw InvalidInput("backward: loss belongs to another tape");
  }
  if (loss.value().size() != 1) {
    throw InvalidInput("backward: loss must be 1x1, got " + loss.value().shape_string());
  }
  backward_trace_.clear();
  grad_mut(loss.id())[0] += 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) {
      continue;
    }
    backward_trace_.emplace_back(n.op);
    n.backward(*this, i);
  }
}

Tensor Tape::param_grad(const Tensor& tensor) const {
  auto it = param_ids_.find(&tensor);
  if (it == param_ids_.end() || !nodes_[it->second].has_grad) {
    return Tensor(tensor.rows(), tensor.cols());
  }
  return nodes_[it->second].grad;
}

std::vector<std::string> Tape::op_names() const {
  std::vector<std::string> names;
  names.reserve(nodes_.size());
  for (const auto& n : nodes_) {
    names.emplace_back(n.op);
  }
  return names;
}

}  // namespace gtp
