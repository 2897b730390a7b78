// Copyright (c) 2026 The pdnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PDNET_AUTODIFF_TAPE_H_
#define PDNET_AUTODIFF_TAPE_H_

#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "pdnet/autodiff/parameter.h"
#include "pdnet/autodiff/tensor.h"

namespace pdnet {

template <typename T>
class BasicTape;

// Handle to a node recorded on a tape. Cheap to copy; only valid while the
// tape that produced it is alive and has not been cleared.
template <typename T>
class BasicVar {
 public:
  BasicVar() = default;

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  BasicTape<T>* tape() const { return tape_; }

  const BasicTensor<T>& value() const { return tape_->value(id_); }
  const Shape& shape() const { return value().shape(); }
  size_t size() const { return value().size(); }
  bool requires_grad() const { return tape_->requires_grad(id_); }
  // Gradient after Backward(); empty span if the node needs no gradient.
  std::span<const T> grad() const { return tape_->grad_view(id_); }

 private:
  friend class BasicTape<T>;
  BasicVar(BasicTape<T>* tape, int id) : tape_(tape), id_(id) {}

  BasicTape<T>* tape_ = nullptr;
  int id_ = -1;
};

// Records the operations of one forward pass in execution order. Backward()
// walks the record in reverse and accumulates gradients into every node that
// requires one. Parameter leaves write straight into the gradient buffer of
// the bound Parameter, so repeated backward passes accumulate there until
// the optimizer zeroes them.
template <typename T>
class BasicTape {
 public:
  using Var = BasicVar<T>;
  // Receives the tape and the gradient flowing into the node's output.
  using BackwardFn = std::function<void(BasicTape&, std::span<const T>)>;

  explicit BasicTape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  BasicTape(const BasicTape&) = delete;
  BasicTape& operator=(const BasicTape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  size_t size() const { return nodes_.size(); }

  // Leaf that never receives a gradient.
  Var Constant(BasicTensor<T> value) { return Push(std::move(value), nullptr, false); }
  // Leaf whose gradient is kept on the tape (inspected via Var::grad()).
  Var Input(BasicTensor<T> value) {
    return Push(std::move(value), nullptr, grad_enabled_);
  }
  // Leaf bound to a parameter; the parameter must outlive the tape.
  Var Param(BasicParameter<T>& param) {
    if (grad_enabled_) param.tensor.EnsureGrad();
    return Push(BasicTensor<T>(), &param, grad_enabled_);
  }

  // Appends an operation result. The backward function is kept only if one
  // of the inputs requires a gradient.
  Var Record(BasicTensor<T> value, std::initializer_list<Var> inputs, BackwardFn fn) {
    bool needs = false;
    for (const Var& v : inputs) {
      CheckOwned(v);
      needs = needs || requires_grad(v.id());
    }
    Var out = Push(std::move(value), nullptr, needs);
    if (needs) nodes_.back().backward = std::move(fn);
    return out;
  }

  const BasicTensor<T>& value(int id) const {
    const Node& n = nodes_.at(static_cast<size_t>(id));
    return n.param != nullptr ? n.param->tensor : n.value;
  }
  bool requires_grad(int id) const { return nodes_.at(static_cast<size_t>(id)).requires_grad; }

  std::span<const T> grad_view(int id) const {
    const Node& n = nodes_.at(static_cast<size_t>(id));
    if (n.param != nullptr) return n.param->tensor.grad();
    return n.grad;
  }

  // Mutable gradient of a node, for use inside backward functions only.
  std::span<T> grad(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.param != nullptr) return n.param->tensor.grad();
    if (n.grad.size() != value(id).size()) n.grad.assign(value(id).size(), T(0));
    return n.grad;
  }

  // Reverse pass from a scalar loss. `seed` scales the loss gradient (1/B
  // when averaging over a batch). Intermediate gradients are reset on every
  // call; parameter gradients accumulate.
  void Backward(Var loss, T seed = T(1)) {
    CheckOwned(loss);
    if (value(loss.id()).size() != 1) {
      throw UsageError("backward requires a scalar loss, got shape " +
                       ShapeToString(value(loss.id()).shape()));
    }
    if (!requires_grad(loss.id())) return;
    for (size_t i = 0; i <= static_cast<size_t>(loss.id()); ++i) {
      Node& n = nodes_[i];
      if (n.param == nullptr && n.requires_grad) n.grad.assign(n.value.size(), T(0));
    }
    grad(loss.id())[0] = seed;
    for (int i = loss.id(); i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.backward) n.backward(*this, std::span<const T>(n.grad));
    }
  }

  // Drops all nodes.
  void Clear() { nodes_.clear(); }

 private:
  struct Node {
    BasicTensor<T> value;
    BasicParameter<T>* param = nullptr;
    bool requires_grad = false;
    AlignedVector<T> grad;
    BackwardFn backward;
  };

  Var Push(BasicTensor<T> value, BasicParameter<T>* param, bool requires_grad) {
    nodes_.push_back(Node{std::move(value), param, requires_grad, {}, {}});
    return Var(this, static_cast<int>(nodes_.size()) - 1);
  }

  void CheckOwned(const Var& v) const {
    if (v.tape() != this || v.id() < 0 || static_cast<size_t>(v.id()) >= nodes_.size()) {
      throw UsageError("variable does not belong to this tape");
    }
  }

  bool grad_enabled_;
  std::deque<Node> nodes_;  // stable addresses: values are handed out by reference
};

using Tape = BasicTape<float>;
using Var = BasicVar<float>;

}  // namespace pdnet

#endif  // PDNET_AUTODIFF_TAPE_H_
