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

#include <cstdint>
#include <vector>

#include "tarfvae/param_store.hpp"

namespace tarfvae {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<NdArray> m;
  std::vector<NdArray> v;
  std::uint64_t t = 0;

  static AdamState zeros_like(const ParamStore& params);
};

/// One bias-corrected ADAM update. `grads` mirror `params` entry by entry.
void adam_step(ParamStore& params, const std::vector<NdArray>& grads, AdamState& state, const AdamConfig& cfg);

/// Same, reading the gradients accumulated on each parameter.
void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg);

}  // namespace tarfvae
