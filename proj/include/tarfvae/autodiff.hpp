// Copyright 2026 The tarfvae Authors. All Rights Reserved.
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

// Reverse-mode differentiation over 2-D arrays. Each op output
// holds its parents and a backward closure; `backward()` walks the graph in
// reverse topological order. All values are matrices (rows x cols).

#include <functional>
#include <memory>
#include <vector>

#include "tarfvae/ndarray.hpp"

namespace tarfvae::ad {

struct Node {
  NdArray value;
  std::vector<double> grad;  // empty until something flows into the node
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  const char* op = "leaf";
  bool requires_grad = false;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

/// Handle to a graph node. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Var constant(NdArray value);
  static Var parameter(NdArray value);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const NdArray& value() const { return node_->value; }
  NdArray& mutable_value() { return node_->value; }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }

  /// Gradient buffer (zeros if nothing has flowed in yet).
  NdArray grad() const;
  void zero_grad() { node_->grad.clear(); }
  double item() const;

  const std::shared_ptr<Node>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Seeds d(out)/d(out) = seed and propagates to every reachable leaf.
void backward(const Var& out, double seed = 1.0);

/// Disables graph recording in the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

/// Sets the working precision of the current thread while alive.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(Precision p);
  ~PrecisionGuard();
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  Precision prev_;
};

bool grad_enabled();
Precision current_precision();

// Elementwise
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double k);
Var exp(const Var& a);
Var tanh(const Var& a);
Var square(const Var& a);
Var gelu(const Var& a);
/// Hard clamp; the gradient is zero outside [lo, hi].
Var clamp(const Var& a, double lo, double hi);
Var sum(const Var& a);

/// out = x W^T + b over the last axis. x: N x Fin, W: Fout x Fin, b: 1 x Fout (may be undefined).
Var linear(const Var& x, const Var& w, const Var& b);

/// Scaled dot-product attention split across `heads`. Q: n x d, K, V: m x d.
/// With `causal`, query i attends to keys j <= i and n must equal m.
Var attention(const Var& q, const Var& k, const Var& v, std::size_t heads, bool causal);

// Layout
Var slice_cols(const Var& a, std::size_t start, std::size_t count);
/// Row r of the output is row r-1 of the input; row 0 is zero.
Var shift_rows_down(const Var& a);
Var reverse_rows(const Var& a);
/// Transposes each consecutive block of `group` rows: (G*group) x F -> (G*F) x group.
Var group_transpose(const Var& a, std::size_t group);

}  // namespace tarfvae::ad
