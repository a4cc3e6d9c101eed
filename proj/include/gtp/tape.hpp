#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gtp/tensor.hpp"

namespace gtp {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const { return value()[0]; }

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records forward operations in execution order and replays them in exact
/// reverse order to accumulate gradients.
///
/// Every forward result is checked for finiteness; a non-finite value raises
/// NumericError naming the operation that produced it.
class Tape {
 public:
  /// Propagates the gradient of node `self` into its inputs.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// A value without gradient tracking.
  Var constant(Tensor value);

  /// A leaf whose gradient is wanted but which is not a model parameter.
  Var input(Tensor value);

  /// The leaf for a parameter tensor. Repeated calls with the same tensor
  /// return the same leaf, so gradient contributions from every use
  /// accumulate in one place.
  Var param(const Tensor& tensor);

  /// Records an operation. `inputs` are the operands whose gradient the
  /// backward function may touch.
  Var record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 for a 1×1 loss and runs the backward sweep.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;

  /// Zero-initialized on first access.
  Tensor& grad_mut(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Gradient accumulated for a parameter; zeros if the parameter never
  /// reached the loss.
  Tensor param_grad(const Tensor& tensor) const;

  /// Operation names in execution order.
  std::vector<std::string> op_names() const;

  /// Operation names of nodes in the order the backward sweep processed them.
  const std::vector<std::string>& backward_trace() const noexcept { return backward_trace_; }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    const char* op = "";
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> param_ids_;
  std::vector<std::string> backward_trace_;
};

}  // namespace gtp
