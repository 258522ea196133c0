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

#include "foresight/numerics/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace foresight::ad {

namespace {

thread_local bool g_grad_enabled = true;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a) + " vs " + shape_to_string(b));
}

[[noreturn]] void shape_fail(const char* op, const Shape& a, const std::string& why) {
  throw ShapeError(std::string(op) + ": " + why + " for shape " + shape_to_string(a));
}

bool is_suffix(const Shape& big, const Shape& small) {
  if (shape_numel(small) == 1) return true;
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

template <typename T>
bool needs(const NodePtr<T>& p) {
  return p && p->requires_grad;
}

// a is the output-shaped operand index map; returns (out_shape, a_mod, b_mod).
struct BroadcastPlan {
  Shape out;
  std::size_t na;
  std::size_t nb;
};

BroadcastPlan plan_broadcast(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return {a, shape_numel(a), shape_numel(b)};
  if (is_suffix(a, b)) return {a, shape_numel(a), shape_numel(b)};
  if (is_suffix(b, a)) return {b, shape_numel(a), shape_numel(b)};
  shape_fail(op, a, b);
}

std::size_t product(const Shape& s, std::size_t from, std::size_t to) {
  std::size_t n = 1;
  for (std::size_t i = from; i < to; ++i) n *= s[i];
  return n;
}

// C[m,n] += A[m,k] * B[k,n]
template <typename T>
void gemm_acc(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// dA[m,k] += dC[m,n] * B[k,n]^T
template <typename T>
void gemm_grad_a(std::size_t m, std::size_t k, std::size_t n, const T* dc, const T* b, T* da) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* dcrow = dc + i * n;
    T* darow = da + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T* brow = b + p * n;
      T acc = T(0);
      for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
      darow[p] += acc;
    }
  }
}

// dB[k,n] += A[m,k]^T * dC[m,n]
template <typename T>
void gemm_grad_b(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* dc, T* db) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* dcrow = dc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      T* dbrow = db + p * n;
      for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
    }
  }
}

template <typename T, typename F, typename G>
Var<T> unary(const char* op, const Var<T>& a, F fwd, G dfdx) {
  const auto& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  auto pa = a.shared();
  return make_op<T>(op, std::move(y), {a}, [pa, dfdx](Node<T>& self) {
    T* ga = pa->grad_buffer();
    const auto& xv = pa->value;
    for (std::size_t i = 0; i < self.value.size(); ++i) ga[i] += self.grad[i] * dfdx(xv[i], self.value[i]);
  });
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Var<T> Var<T>::constant(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = "constant";
  return Var(std::move(n));
}

template <typename T>
Var<T> Var<T>::parameter(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->op = "parameter";
  return Var(std::move(n));
}

template <typename T>
Tensor<T> Var<T>::grad_tensor() const {
  if (node_->grad.empty()) return Tensor<T>(shape(), T(0));
  return Tensor<T>(shape(), node_->grad);
}

template <typename T>
void Var<T>::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <typename T>
T Var<T>::item() const {
  if (size() != 1) throw ShapeError("item: tensor is not a scalar, shape " + shape_to_string(shape()));
  return node_->value[0];
}

template <typename T>
std::span<T> Var<T>::mutable_value() const {
  if (node_->backward) throw std::logic_error("mutable_value: only leaf values may be modified");
  return node_->value.data();
}

template <typename T>
void Var<T>::backward() const {
  if (size() != 1) {
    throw ShapeError("backward: output must be a scalar, got shape " + shape_to_string(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T>* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node<T>* n : order) {
    if (n->backward) n->grad.assign(n->value.size(), T(0));
  }
  node_->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward) n->backward(*n);
  }
}

template <typename T>
Var<T> make_op(const char* op, Tensor<T> value, std::vector<Var<T>> parents,
               std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = op;
  if (g_grad_enabled) {
    const bool any = std::any_of(parents.begin(), parents.end(), [](const Var<T>& p) { return p.requires_grad(); });
    if (any) {
      n->requires_grad = true;
      n->parents.reserve(parents.size());
      for (auto& p : parents) n->parents.push_back(p.shared());
      n->backward = std::move(backward);
    }
  }
  return Var<T>(std::move(n));
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  auto plan = plan_broadcast("add", a.shape(), b.shape());
  Tensor<T> y(plan.out);
  const auto& av = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i % plan.na] + bv[i % plan.nb];
  auto pa = a.shared();
  auto pb = b.shared();
  return make_op<T>("add", std::move(y), {a, b}, [pa, pb, plan](Node<T>& self) {
    if (needs(pa)) {
      T* g = pa->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % plan.na] += self.grad[i];
    }
    if (needs(pb)) {
      T* g = pb->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % plan.nb] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  auto plan = plan_broadcast("sub", a.shape(), b.shape());
  Tensor<T> y(plan.out);
  const auto& av = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i % plan.na] - bv[i % plan.nb];
  auto pa = a.shared();
  auto pb = b.shared();
  return make_op<T>("sub", std::move(y), {a, b}, [pa, pb, plan](Node<T>& self) {
    if (needs(pa)) {
      T* g = pa->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % plan.na] += self.grad[i];
    }
    if (needs(pb)) {
      T* g = pb->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % plan.nb] -= self.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  auto plan = plan_broadcast("mul", a.shape(), b.shape());
  Tensor<T> y(plan.out);
  const auto& av = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i % plan.na] * bv[i % plan.nb];
  auto pa = a.shared();
  auto pb = b.shared();
  return make_op<T>("mul", std::move(y), {a, b}, [pa, pb, plan](Node<T>& self) {
    if (needs(pa)) {
      T* g = pa->grad_buffer();
      const auto& bv2 = pb->value;
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % plan.na] += self.grad[i] * bv2[i % plan.nb];
    }
    if (needs(pb)) {
      T* g = pb->grad_buffer();
      const auto& av2 = pa->value;
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % plan.nb] += self.grad[i] * av2[i % plan.na];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  return mul(a, Var<T>::constant(Tensor<T>::scalar(factor)));
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2) shape_fail("matmul", sa, sb);
  const std::size_t k = sa.back();
  if (sb.size() == 2) {
    if (sb[0] != k) shape_fail("matmul", sa, sb);
    const std::size_t n = sb[1];
    const std::size_t m = a.size() / k;
    Shape out(sa.begin(), sa.end() - 1);
    out.push_back(n);
    Tensor<T> y(out);
    gemm_acc(m, k, n, a.value().data().data(), b.value().data().data(), y.data().data());
    auto pa = a.shared();
    auto pb = b.shared();
    return make_op<T>("matmul", std::move(y), {a, b}, [pa, pb, m, k, n](Node<T>& self) {
      if (needs(pa)) gemm_grad_a(m, k, n, self.grad.data(), pb->value.data().data(), pa->grad_buffer());
      if (needs(pb)) gemm_grad_b(m, k, n, pa->value.data().data(), self.grad.data(), pb->grad_buffer());
    });
  }
  if (sa.size() == 3 && sb.size() == 3 && sa[0] == sb[0] && sb[1] == k) {
    const std::size_t batch = sa[0], m = sa[1], n = sb[2];
    Tensor<T> y(Shape{batch, m, n});
    for (std::size_t i = 0; i < batch; ++i) {
      gemm_acc(m, k, n, a.value().data().data() + i * m * k, b.value().data().data() + i * k * n,
               y.data().data() + i * m * n);
    }
    auto pa = a.shared();
    auto pb = b.shared();
    return make_op<T>("matmul", std::move(y), {a, b}, [pa, pb, batch, m, k, n](Node<T>& self) {
      for (std::size_t i = 0; i < batch; ++i) {
        const T* dc = self.grad.data() + i * m * n;
        if (needs(pa)) gemm_grad_a(m, k, n, dc, pb->value.data().data() + i * k * n, pa->grad_buffer() + i * m * k);
        if (needs(pb)) gemm_grad_b(m, k, n, pa->value.data().data() + i * m * k, dc, pb->grad_buffer() + i * k * n);
      }
    });
  }
  shape_fail("matmul", sa, sb);
}

template <typename T>
Var<T> permute(const Var<T>& a, const std::vector<std::size_t>& axes) {
  const Shape& s = a.shape();
  const std::size_t r = s.size();
  if (axes.size() != r) shape_fail("permute", s, "expected " + std::to_string(r) + " axes");
  std::vector<bool> seen(r, false);
  for (std::size_t ax : axes) {
    if (ax >= r || seen[ax]) shape_fail("permute", s, "axes are not a permutation");
    seen[ax] = true;
  }
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r - 1; i-- > 0;) in_stride[i] = in_stride[i + 1] * s[i + 1];
  Shape out(r);
  std::vector<std::size_t> stride(r);  // input stride of each output axis
  for (std::size_t d = 0; d < r; ++d) {
    out[d] = s[axes[d]];
    stride[d] = in_stride[axes[d]];
  }

  const std::size_t n = a.size();
  auto perm = std::make_shared<std::vector<std::size_t>>(n);
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t o = 0; o < n; ++o) {
    (*perm)[o] = src;
    for (std::size_t d = r; d-- > 0;) {
      if (++idx[d] < out[d]) {
        src += stride[d];
        break;
      }
      src -= stride[d] * (out[d] - 1);
      idx[d] = 0;
    }
  }
  Tensor<T> y(out);
  const auto& x = a.value();
  for (std::size_t o = 0; o < n; ++o) y[o] = x[(*perm)[o]];
  auto pa = a.shared();
  return make_op<T>("permute", std::move(y), {a}, [pa, perm](Node<T>& self) {
    T* g = pa->grad_buffer();
    for (std::size_t o = 0; o < self.grad.size(); ++o) g[(*perm)[o]] += self.grad[o];
  });
}

template <typename T>
Var<T> transpose(const Var<T>& a, std::size_t axis0, std::size_t axis1) {
  const Shape& s = a.shape();
  if (axis0 >= s.size() || axis1 >= s.size()) shape_fail("transpose", s, "axis out of range");
  std::vector<std::size_t> axes(s.size());
  std::iota(axes.begin(), axes.end(), 0);
  std::swap(axes[axis0], axes[axis1]);
  return permute(a, axes);
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  if (shape_numel(shape) != a.size()) shape_fail("reshape", a.shape(), shape);
  Tensor<T> y = a.value().reshaped(std::move(shape));
  auto pa = a.shared();
  return make_op<T>("reshape", std::move(y), {a}, [pa](Node<T>& self) {
    T* g = pa->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const Shape& s0 = parts[0].shape();
  if (axis >= s0.size()) shape_fail("concat", s0, "axis out of range");
  Shape out = s0;
  out[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != s0.size()) shape_fail("concat", s0, s);
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != s0[d]) shape_fail("concat", s0, s);
    }
    out[axis] += s[axis];
  }
  const std::size_t outer = product(s0, 0, axis);
  const std::size_t inner = product(s0, axis + 1, s0.size());
  const std::size_t out_row = out[axis] * inner;
  Tensor<T> y(out);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t row = p.shape()[axis] * inner;
    const auto& v = p.value();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(v.data().data() + o * row, row, y.data().data() + o * out_row + off);
    }
    off += row;
  }
  std::vector<NodePtr<T>> nodes;
  for (const auto& p : parts) nodes.push_back(p.shared());
  return make_op<T>("concat", std::move(y), parts, [nodes, offsets, outer, inner, out_row, axis](Node<T>& self) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (!needs(nodes[k])) continue;
      const std::size_t row = nodes[k]->value.shape()[axis] * inner;
      T* g = nodes[k]->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        const T* src = self.grad.data() + o * out_row + offsets[k];
        for (std::size_t i = 0; i < row; ++i) g[o * row + i] += src[i];
      }
    }
  });
}

template <typename T>
Var<T> slice(const Var<T>& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& s = a.shape();
  if (axis >= s.size()) shape_fail("slice", s, "axis out of range");
  if (begin >= end || end > s[axis]) {
    shape_fail("slice", s, "range [" + std::to_string(begin) + "," + std::to_string(end) + ") on axis " +
                               std::to_string(axis) + " is invalid");
  }
  Shape out = s;
  out[axis] = end - begin;
  const std::size_t outer = product(s, 0, axis);
  const std::size_t inner = product(s, axis + 1, s.size());
  const std::size_t in_row = s[axis] * inner;
  const std::size_t out_row = out[axis] * inner;
  const std::size_t off = begin * inner;
  Tensor<T> y(out);
  const auto& x = a.value();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(x.data().data() + o * in_row + off, out_row, y.data().data() + o * out_row);
  }
  auto pa = a.shared();
  return make_op<T>("slice", std::move(y), {a}, [pa, outer, in_row, out_row, off](Node<T>& self) {
    T* g = pa->grad_buffer();
    for (std::size_t o = 0; o < outer; ++o) {
      const T* src = self.grad.data() + o * out_row;
      T* dst = g + o * in_row + off;
      for (std::size_t i = 0; i < out_row; ++i) dst[i] += src[i];
    }
  });
}

template <typename T>
Var<T> gather_rows(const Var<T>& a, const std::vector<std::size_t>& rows) {
  const Shape& s = a.shape();
  if (rows.empty()) shape_fail("gather_rows", s, "no rows requested");
  const std::size_t inner = a.size() / s[0];
  for (std::size_t r : rows) {
    if (r >= s[0]) shape_fail("gather_rows", s, "row " + std::to_string(r) + " out of range");
  }
  Shape out = s;
  out[0] = rows.size();
  Tensor<T> y(out);
  const auto& x = a.value();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(x.data().data() + rows[i] * inner, inner, y.data().data() + i * inner);
  }
  auto pa = a.shared();
  return make_op<T>("gather_rows", std::move(y), {a}, [pa, rows, inner](Node<T>& self) {
    T* g = pa->grad_buffer();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const T* src = self.grad.data() + i * inner;
      T* dst = g + rows[i] * inner;
      for (std::size_t c = 0; c < inner; ++c) dst[c] += src[c];
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  T acc = T(0);
  for (T v : a.value().data()) acc += v;
  auto pa = a.shared();
  return make_op<T>("sum", Tensor<T>::scalar(acc), {a}, [pa](Node<T>& self) {
    T* g = pa->grad_buffer();
    const T up = self.grad[0];
    for (std::size_t i = 0; i < pa->value.size(); ++i) g[i] += up;
  });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.size()));
}

template <typename T>
Var<T> exp(const Var<T>& a) {
  const T clamp = static_cast<T>(kExpClamp);
  return unary<T>(
      "exp", a, [clamp](T x) { return std::exp(std::min(x, clamp)); },
      [clamp](T x, T y) { return x < clamp ? y : T(0); });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  return unary<T>(
      "tanh", a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return unary<T>(
      "sigmoid", a,
      [](T x) {
        if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> masked_softmax(const Var<T>& a, const Tensor<T>& mask) {
  const Shape& s = a.shape();
  if (!is_suffix(s, mask.shape()) || (shape_numel(mask.shape()) != 1 && mask.shape().back() != s.back())) {
    shape_fail("masked_softmax", s, mask.shape());
  }
  const std::size_t n = s.back();
  const std::size_t rows = a.size() / n;
  const std::size_t nm = mask.size();
  Tensor<T> y(s);
  const auto& x = a.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * n;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, x[base + j] + mask[(base + j) % nm]);
    if (!std::isfinite(mx)) throw std::domain_error("masked_softmax: row " + std::to_string(r) + " is fully masked");
    T total = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      const T e = std::exp(x[base + j] + mask[(base + j) % nm] - mx);
      y[base + j] = e;
      total += e;
    }
    for (std::size_t j = 0; j < n; ++j) y[base + j] /= total;
  }
  auto pa = a.shared();
  return make_op<T>("masked_softmax", std::move(y), {a}, [pa, n, rows](Node<T>& self) {
    T* g = pa->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * n;
      T dot = T(0);
      for (std::size_t j = 0; j < n; ++j) dot += self.grad[base + j] * self.value[base + j];
      for (std::size_t j = 0; j < n; ++j) g[base + j] += self.value[base + j] * (self.grad[base + j] - dot);
    }
  });
}

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& bias, T eps) {
  const Shape& s = x.shape();
  const std::size_t n = s.back();
  if (gain.size() != n || bias.size() != n) shape_fail("layer_norm", s, gain.shape());
  const std::size_t rows = x.size() / n;
  Tensor<T> y(s);
  auto xhat = std::make_shared<std::vector<T>>(x.size());
  auto inv = std::make_shared<std::vector<T>>(rows);
  const auto& xv = x.value();
  const auto& gv = gain.value();
  const auto& bv = bias.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * n;
    T mu = T(0);
    for (std::size_t j = 0; j < n; ++j) mu += xv[base + j];
    mu /= static_cast<T>(n);
    T var = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      const T d = xv[base + j] - mu;
      var += d * d;
    }
    var /= static_cast<T>(n);
    const T iv = T(1) / std::sqrt(var + eps);
    (*inv)[r] = iv;
    for (std::size_t j = 0; j < n; ++j) {
      const T h = (xv[base + j] - mu) * iv;
      (*xhat)[base + j] = h;
      y[base + j] = h * gv[j] + bv[j];
    }
  }
  auto px = x.shared();
  auto pg = gain.shared();
  auto pb = bias.shared();
  return make_op<T>("layer_norm", std::move(y), {x, gain, bias}, [px, pg, pb, xhat, inv, n, rows](Node<T>& self) {
    const auto& gv2 = pg->value;
    T* gg = needs(pg) ? pg->grad_buffer() : nullptr;
    T* gb = needs(pb) ? pb->grad_buffer() : nullptr;
    T* gx = needs(px) ? px->grad_buffer() : nullptr;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * n;
      T sum_d = T(0), sum_dh = T(0);
      for (std::size_t j = 0; j < n; ++j) {
        const T up = self.grad[base + j];
        const T h = (*xhat)[base + j];
        if (gg) gg[j] += up * h;
        if (gb) gb[j] += up;
        const T dh = up * gv2[j];
        sum_d += dh;
        sum_dh += dh * h;
      }
      if (!gx) continue;
      const T iv = (*inv)[r];
      const T nn = static_cast<T>(n);
      for (std::size_t j = 0; j < n; ++j) {
        const T dh = self.grad[base + j] * gv2[j];
        gx[base + j] += iv / nn * (nn * dh - sum_d - (*xhat)[base + j] * sum_dh);
      }
    }
  });
}

template <typename T>
Var<T> squared_error(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) shape_fail("squared_error", a.shape(), b.shape());
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const T d = a.value()[i] - b.value()[i];
    y[i] = d * d;
  }
  auto pa = a.shared();
  auto pb = b.shared();
  return make_op<T>("squared_error", std::move(y), {a, b}, [pa, pb](Node<T>& self) {
    T* ga = needs(pa) ? pa->grad_buffer() : nullptr;
    T* gb = needs(pb) ? pb->grad_buffer() : nullptr;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T d = T(2) * (pa->value[i] - pb->value[i]) * self.grad[i];
      if (ga) ga[i] += d;
      if (gb) gb[i] -= d;
    }
  });
}

template <typename T>
Var<T> absolute_error(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) shape_fail("absolute_error", a.shape(), b.shape());
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::abs(a.value()[i] - b.value()[i]);
  auto pa = a.shared();
  auto pb = b.shared();
  return make_op<T>("absolute_error", std::move(y), {a, b}, [pa, pb](Node<T>& self) {
    T* ga = needs(pa) ? pa->grad_buffer() : nullptr;
    T* gb = needs(pb) ? pb->grad_buffer() : nullptr;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T d = pa->value[i] - pb->value[i];
      const T sgn = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
      if (ga) ga[i] += sgn * self.grad[i];
      if (gb) gb[i] -= sgn * self.grad[i];
    }
  });
}

#define FORESIGHT_INSTANTIATE_AD(T)                                                                   \
  template class Var<T>;                                                                              \
  template Var<T> make_op<T>(const char*, Tensor<T>, std::vector<Var<T>>, std::function<void(Node<T>&)>); \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                                               \
  template Var<T> sub<T>(const Var<T>&, const Var<T>&);                                               \
  template Var<T> mul<T>(const Var<T>&, const Var<T>&);                                               \
  template Var<T> scale<T>(const Var<T>&, T);                                                         \
  template Var<T> matmul<T>(const Var<T>&, const Var<T>&);                                            \
  template Var<T> permute<T>(const Var<T>&, const std::vector<std::size_t>&);                        \
  template Var<T> transpose<T>(const Var<T>&, std::size_t, std::size_t);                              \
  template Var<T> reshape<T>(const Var<T>&, Shape);                                                   \
  template Var<T> concat<T>(const std::vector<Var<T>>&, std::size_t);                                 \
  template Var<T> slice<T>(const Var<T>&, std::size_t, std::size_t, std::size_t);                     \
  template Var<T> gather_rows<T>(const Var<T>&, const std::vector<std::size_t>&);                    \
  template Var<T> sum<T>(const Var<T>&);                                                              \
  template Var<T> mean<T>(const Var<T>&);                                                             \
  template Var<T> exp<T>(const Var<T>&);                                                              \
  template Var<T> tanh<T>(const Var<T>&);                                                             \
  template Var<T> sigmoid<T>(const Var<T>&);                                                          \
  template Var<T> masked_softmax<T>(const Var<T>&, const Tensor<T>&);                                 \
  template Var<T> layer_norm<T>(const Var<T>&, const Var<T>&, const Var<T>&, T);                      \
  template Var<T> squared_error<T>(const Var<T>&, const Var<T>&);                                     \
  template Var<T> absolute_error<T>(const Var<T>&, const Var<T>&);

FORESIGHT_INSTANTIATE_AD(float)
FORESIGHT_INSTANTIATE_AD(double)

#undef FORESIGHT_INSTANTIATE_AD

}  // namespace foresight::ad
