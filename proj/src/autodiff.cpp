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

#include "tarfvae/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace tarfvae::ad {

namespace {

thread_local bool g_grad_enabled = true;
thread_local Precision g_precision = Precision::F64;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

CMapMat view(const NdArray& a) {
  return CMapMat(a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
}

MapMat grad_view(Node& n) {
  return MapMat(n.grad_buffer().data(), static_cast<Eigen::Index>(n.value.rows()),
                static_cast<Eigen::Index>(n.value.cols()));
}

CMapMat grad_view_const(const Node& n) {
  return CMapMat(n.grad.data(), static_cast<Eigen::Index>(n.value.rows()),
                 static_cast<Eigen::Index>(n.value.cols()));
}

Var finish(NdArray value, const char* op, std::vector<std::shared_ptr<Node>> parents,
           std::function<void(Node&)> fn) {
  if (g_precision == Precision::F32) value.round_to_f32();
  if (!value.all_finite()) throw NumericError(op, "output of shape " + value.shape_str());
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  const bool needs = g_grad_enabled && std::any_of(parents.begin(), parents.end(),
                                                   [](const auto& p) { return p && p->requires_grad; });
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(fn);
  }
  return Var(std::move(node));
}

void require_same(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.value().shape_str() + " vs " +
                     b.value().shape_str());
  }
}

// Applies an elementwise unary op with derivative computed from (x, y).
template <typename F, typename D>
Var unary(const Var& a, const char* op, F f, D dfdx) {
  NdArray out(a.value().shape());
  const auto in = a.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return finish(std::move(out), op, {a.node()}, [dfdx](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * dfdx(p.value[i], self.value[i]);
  });
}

}  // namespace

Var Var::constant(NdArray value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = "constant";
  return Var(std::move(node));
}

Var Var::parameter(NdArray value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = "parameter";
  node->requires_grad = true;
  return Var(std::move(node));
}

NdArray Var::grad() const {
  if (node_->grad.empty()) return NdArray(node_->value.shape());
  return NdArray(node_->value.shape(), node_->grad);
}

double Var::item() const {
  if (node_->value.size() != 1) throw ShapeError("item() on array of shape " + node_->value.shape_str());
  return node_->value[0];
}

void backward(const Var& out, double seed) {
  if (!out.defined()) throw Error("backward on undefined Var");
  if (out.value().size() != 1) throw ShapeError("backward expects a scalar, got " + out.value().shape_str());
  if (!out.requires_grad()) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{out.node().get(), 0}};
  visited.insert(out.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  out.node()->grad_buffer()[0] += seed;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->backward_fn || n->grad.empty()) continue;
    n->backward_fn(*n);
    n->grad.clear();
  }
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

PrecisionGuard::PrecisionGuard(Precision p) : prev_(g_precision) { g_precision = p; }
PrecisionGuard::~PrecisionGuard() { g_precision = prev_; }

bool grad_enabled() { return g_grad_enabled; }
Precision current_precision() { return g_precision; }

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  NdArray out(a.value().shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return finish(std::move(out), "add", {a.node(), b.node()}, [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  NdArray out(a.value().shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return finish(std::move(out), "sub", {a.node(), b.node()}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node& p = *self.parents[k];
      if (!p.requires_grad) continue;
      const double sign = k == 0 ? 1.0 : -1.0;
      auto& g = p.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  NdArray out(a.value().shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return finish(std::move(out), "mul", {a.node(), b.node()}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
    }
  });
}

Var scale(const Var& a, double k) {
  return unary(a, "scale", [k](double x) { return k * x; }, [k](double, double) { return k; });
}

Var exp(const Var& a) {
  return unary(a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var tanh(const Var& a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var square(const Var& a) {
  return unary(a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var gelu(const Var& a) {
  constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return unary(
      a, "gelu", [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
        return cdf + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
      });
}

Var clamp(const Var& a, double lo, double hi) {
  return unary(a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x, double) { return (x < lo || x > hi) ? 0.0 : 1.0; });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return finish(NdArray({1, 1}, s), "sum", {a.node()}, [](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  const std::size_t fin = x.cols();
  if (w.cols() != fin) {
    throw ShapeError("linear: input " + x.value().shape_str() + " incompatible with weight " +
                     w.value().shape_str());
  }
  const std::size_t fout = w.rows();
  if (b.defined() && (b.rows() != 1 || b.cols() != fout)) {
    throw ShapeError("linear: bias " + b.value().shape_str() + " does not match output width " +
                     std::to_string(fout));
  }
  NdArray out = NdArray::matrix(x.rows(), fout);
  MapMat o(out.storage().data(), static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(fout));
  o.noalias() = view(x.value()) * view(w.value()).transpose();
  if (b.defined()) o.rowwise() += view(b.value()).row(0);

  std::vector<std::shared_ptr<Node>> parents{x.node(), w.node()};
  if (b.defined()) parents.push_back(b.node());
  return finish(std::move(out), "linear", std::move(parents), [](Node& self) {
    Node& px = *self.parents[0];
    Node& pw = *self.parents[1];
    const auto go = grad_view_const(self);
    if (px.requires_grad) grad_view(px).noalias() += go * view(pw.value);
    if (pw.requires_grad) grad_view(pw).noalias() += go.transpose() * view(px.value);
    if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
      grad_view(*self.parents[2]).row(0) += go.colwise().sum();
    }
  });
}

Var attention(const Var& q, const Var& k, const Var& v, std::size_t heads, bool causal) {
  const std::size_t n = q.rows();
  const std::size_t m = k.rows();
  const std::size_t d = q.cols();
  if (d == 0 || k.cols() != d || v.cols() != d || v.rows() != m) {
    throw ShapeError("attention: incompatible Q " + q.value().shape_str() + ", K " + k.value().shape_str() +
                     ", V " + v.value().shape_str());
  }
  if (heads == 0 || d % heads != 0) {
    throw ShapeError("attention: width " + std::to_string(d) + " not divisible by " + std::to_string(heads) +
                     " heads");
  }
  if (causal && n != m) throw ShapeError("attention: causal mask needs equal query/key counts");
  const std::size_t dh = d / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // probs[h][i*m + j]
  auto probs = std::make_shared<std::vector<double>>(heads * n * m, 0.0);
  NdArray out = NdArray::matrix(n, d);
  const NdArray& Q = q.value();
  const NdArray& K = k.value();
  const NdArray& V = v.value();
  std::vector<double> row(m);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t c0 = h * dh;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t jmax = causal ? i + 1 : m;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < jmax; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) s += Q(i, c0 + c) * K(j, c0 + c);
        row[j] = s * inv_scale;
        mx = std::max(mx, row[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < jmax; ++j) {
        row[j] = std::exp(row[j] - mx);
        z += row[j];
      }
      double* p = probs->data() + (h * n + i) * m;
      for (std::size_t j = 0; j < jmax; ++j) {
        p[j] = row[j] / z;
        for (std::size_t c = 0; c < dh; ++c) out(i, c0 + c) += p[j] * V(j, c0 + c);
      }
    }
  }

  return finish(std::move(out), "attention", {q.node(), k.node(), v.node()},
                [probs, heads, n, m, dh, inv_scale](Node& self) {
                  Node& pq = *self.parents[0];
                  Node& pk = *self.parents[1];
                  Node& pv = *self.parents[2];
                  const NdArray& Q = pq.value;
                  const NdArray& K = pk.value;
                  const NdArray& V = pv.value;
                  const std::size_t d = heads * dh;
                  auto dO = [&](std::size_t i, std::size_t c) { return self.grad[i * d + c]; };
                  double* gq = pq.requires_grad ? pq.grad_buffer().data() : nullptr;
                  double* gk = pk.requires_grad ? pk.grad_buffer().data() : nullptr;
                  double* gv = pv.requires_grad ? pv.grad_buffer().data() : nullptr;
                  std::vector<double> dp(m);
                  for (std::size_t h = 0; h < heads; ++h) {
                    const std::size_t c0 = h * dh;
                    for (std::size_t i = 0; i < n; ++i) {
                      const double* p = probs->data() + (h * n + i) * m;
                      double dot = 0.0;
                      for (std::size_t j = 0; j < m; ++j) {
                        if (p[j] == 0.0) {
                          dp[j] = 0.0;
                          continue;
                        }
                        double s = 0.0;
                        for (std::size_t c = 0; c < dh; ++c) {
                          s += dO(i, c0 + c) * V(j, c0 + c);
                          if (gv) gv[j * d + c0 + c] += p[j] * dO(i, c0 + c);
                        }
                        dp[j] = s;
                        dot += p[j] * s;
                      }
                      for (std::size_t j = 0; j < m; ++j) {
                        if (p[j] == 0.0) continue;
                        const double ds = p[j] * (dp[j] - dot) * inv_scale;
                        for (std::size_t c = 0; c < dh; ++c) {
                          if (gq) gq[i * d + c0 + c] += ds * K(j, c0 + c);
                          if (gk) gk[j * d + c0 + c] += ds * Q(i, c0 + c);
                        }
                      }
                    }
                  }
                });
}

Var slice_cols(const Var& a, std::size_t start, std::size_t count) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  if (start + count > c) throw ShapeError("slice_cols: range exceeds width " + std::to_string(c));
  NdArray out = NdArray::matrix(r, count);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = a.value()(i, start + j);
  return finish(std::move(out), "slice_cols", {a.node()}, [start, count, c](Node& self) {
    Node& p = *self.parents[0];
    auto& g = p.grad_buffer();
    const std::size_t r = self.value.rows();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < count; ++j) g[i * c + start + j] += self.grad[i * count + j];
  });
}

Var shift_rows_down(const Var& a) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  NdArray out = NdArray::matrix(r, c);
  for (std::size_t i = 1; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) = a.value()(i - 1, j);
  return finish(std::move(out), "shift_rows_down", {a.node()}, [r, c](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 1; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[(i - 1) * c + j] += self.grad[i * c + j];
  });
}

Var reverse_rows(const Var& a) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  NdArray out = NdArray::matrix(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) = a.value()(r - 1 - i, j);
  return finish(std::move(out), "reverse_rows", {a.node()}, [r, c](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[(r - 1 - i) * c + j] += self.grad[i * c + j];
  });
}

Var group_transpose(const Var& a, std::size_t group) {
  const std::size_t r = a.rows();
  const std::size_t f = a.cols();
  if (group == 0 || r % group != 0) {
    throw ShapeError("group_transpose: " + std::to_string(r) + " rows not divisible by group " +
                     std::to_string(group));
  }
  const std::size_t blocks = r / group;
  NdArray out = NdArray::matrix(blocks * f, group);
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t i = 0; i < group; ++i)
      for (std::size_t j = 0; j < f; ++j) out(b * f + j, i) = a.value()(b * group + i, j);
  return finish(std::move(out), "group_transpose", {a.node()}, [blocks, group, f](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t b = 0; b < blocks; ++b)
      for (std::size_t i = 0; i < group; ++i)
        for (std::size_t j = 0; j < f; ++j) g[(b * group + i) * f + j] += self.grad[(b * f + j) * group + i];
  });
}

}  // namespace tarfvae::ad
