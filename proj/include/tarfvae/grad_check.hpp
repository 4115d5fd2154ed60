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

#include <cstddef>
#include <functional>
#include <string>

#include "tarfvae/param_store.hpp"

namespace tarfvae {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Compares the analytic gradient of `loss_fn` with central differences
/// (f(p+h) - f(p-h)) / 2h, coordinate by coordinate, in 64-bit mode.
/// `loss_fn` must rebuild the graph from the current parameter values.
/// With `max_coords_per_param` > 0 only that many coordinates per parameter
/// are probed, chosen by `seed`.
GradCheckResult grad_check(const std::function<ad::Var()>& loss_fn, ParamStore& params, double h = 1e-5,
                           std::size_t max_coords_per_param = 0, std::uint64_t seed = 0);

}  // namespace tarfvae
