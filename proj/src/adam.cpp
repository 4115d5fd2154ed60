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

#include "tarfvae/adam.hpp"

#include <cmath>

namespace tarfvae {

AdamState AdamState::zeros_like(const ParamStore& params) {
  AdamState s;
  for (const auto& [name, var] : params.entries()) {
    s.m.emplace_back(var.value().shape());
    s.v.emplace_back(var.value().shape());
  }
  return s;
}

void adam_step(ParamStore& params, const std::vector<NdArray>& grads, AdamState& state, const AdamConfig& cfg) {
  const auto& entries = params.entries();
  if (grads.size() != entries.size() || state.m.size() != entries.size() || state.v.size() != entries.size()) {
    throw ShapeError("adam_step: gradient/state count does not match parameter count");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [name, var] = entries[i];
    if (!grads[i].same_shape(var.value()) || !state.m[i].same_shape(var.value())) {
      throw ShapeError("adam_step: shape mismatch for parameter '" + name + "'");
    }
    if (!grads[i].all_finite()) throw NumericError("adam_step", "non-finite gradient for parameter '" + name + "'");
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const bool f32 = ad::current_precision() == Precision::F32;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    ad::Var handle = entries[i].second;
    NdArray& p = handle.mutable_value();
    NdArray& m = state.m[i];
    NdArray& v = state.v[i];
    const NdArray& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    if (f32) p.round_to_f32();
  }
}

void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg) {
  std::vector<NdArray> grads;
  grads.reserve(params.size());
  for (const auto& [name, var] : params.entries()) grads.push_back(var.grad());
  adam_step(params, grads, state, cfg);
}

}  // namespace tarfvae
