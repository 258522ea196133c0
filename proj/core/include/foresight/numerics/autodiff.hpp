// Copyright 2026 The Foresight Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "foresight/numerics/tensor.hpp"

namespace foresight::ad {

// Upper bound applied to exp() inputs.
inline constexpr double kExpClamp = 30.0;

template <typename T>
struct Node {
  Tensor<T> value;
  std::vector<T> grad;  // allocated on first use, same element count as value
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward;

  T* grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad.data();
  }
};

/// Handle to a node in a dynamically recorded computation graph. Copies share
/// the node. Values are immutable once produced; backward() only touches
/// gradient buffers.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var constant(Tensor<T> value);
  static Var parameter(Tensor<T> value);

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  const char* op() const { return node_->op; }

  /// Empty span when no gradient has been accumulated yet.
  std::span<const T> grad() const { return node_->grad; }
  Tensor<T> grad_tensor() const;
  void zero_grad();

  /// Value of a single-element tensor.
  T item() const;

  /// Reverse-mode sweep from this scalar. Leaf gradients accumulate across
  /// calls; interior gradients are recomputed on every call.
  void backward() const;

  /// Overwrites a parameter's value in place (optimizer updates, gradient
  /// checks). Only valid on leaves.
  std::span<T> mutable_value() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Builds a node for an operation implemented outside this header. When
/// recording is off or no parent needs a gradient, `backward` is dropped.
template <typename T>
Var<T> make_op(const char* op, Tensor<T> value, std::vector<Var<T>> parents,
               std::function<void(Node<T>&)> backward);

// Elementwise arithmetic. The second operand may be the same shape, a
// trailing suffix of the first operand's shape, or a single element (and
// symmetrically for add/mul).
template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T factor);

// (m,k)x(k,n); (...,m,k)x(k,n) with leading axes folded into rows;
// (b,m,k)x(b,k,n) batched.
template <typename T> Var<T> matmul(const Var<T>& a, const Var<T>& b);

/// Output axis d is input axis axes[d].
template <typename T> Var<T> permute(const Var<T>& a, const std::vector<std::size_t>& axes);
template <typename T> Var<T> transpose(const Var<T>& a, std::size_t axis0, std::size_t axis1);
template <typename T> Var<T> reshape(const Var<T>& a, Shape shape);
template <typename T> Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis);
template <typename T> Var<T> slice(const Var<T>& a, std::size_t axis, std::size_t begin, std::size_t end);
/// Rows of `a` along axis 0, in the given order (repeats allowed).
template <typename T> Var<T> gather_rows(const Var<T>& a, const std::vector<std::size_t>& rows);

template <typename T> Var<T> sum(const Var<T>& a);
template <typename T> Var<T> mean(const Var<T>& a);

template <typename T> Var<T> exp(const Var<T>& a);
template <typename T> Var<T> tanh(const Var<T>& a);
template <typename T> Var<T> sigmoid(const Var<T>& a);

/// softmax(a + mask) over the last axis. `mask` holds 0 or -inf and its shape
/// is a trailing suffix of a's shape.
template <typename T> Var<T> masked_softmax(const Var<T>& a, const Tensor<T>& mask);

/// Normalizes over the last axis with affine gain/bias of that extent.
template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& bias, T eps = T(1e-5));

// Elementwise (a-b)^2 and |a-b|; equal shapes required.
template <typename T> Var<T> squared_error(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> absolute_error(const Var<T>& a, const Var<T>& b);

}  // namespace foresight::ad
