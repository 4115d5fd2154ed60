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

#include "tarfvae/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tarfvae/rng.hpp"

namespace tarfvae {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<ad::Var()>& loss_fn, ParamStore& params, double h,
                           std::size_t max_coords_per_param, std::uint64_t seed) {
  ad::PrecisionGuard precision(Precision::F64);
  params.zero_grad();
  ad::Var loss = loss_fn();
  if (!std::isfinite(loss.item())) throw NumericError("grad_check", "loss is not finite");
  ad::backward(loss);

  Rng rng = Rng::stream(seed, "grad_check");
  GradCheckResult result;
  for (const auto& [name, var] : params.entries()) {
    const NdArray analytic = var.grad();
    ad::Var handle = var;
    NdArray& value = handle.mutable_value();

    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (max_coords_per_param > 0 && coords.size() > max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng.engine());
      coords.resize(max_coords_per_param);
    }

    for (std::size_t k : coords) {
      const double orig = value[k];
      double plus = 0.0;
      double minus = 0.0;
      {
        ad::NoGradGuard no_grad;
        value[k] = orig + h;
        plus = loss_fn().item();
        value[k] = orig - h;
        minus = loss_fn().item();
        value[k] = orig;
      }
      const double numeric = (plus - minus) / (2.0 * h);
      if (!std::isfinite(numeric)) throw NumericError("grad_check", "finite difference for '" + name + "'");
      const double err = relative_error(analytic[k], numeric);
      ++result.coords_checked;
      if (result.worst_param.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = name;
        result.worst_index = k;
        result.worst_analytic = analytic[k];
        result.worst_numeric = numeric;
      }
    }
  }
  params.zero_grad();
  return result;
}

}  // namespace tarfvae
