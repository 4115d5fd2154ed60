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
#include <span>
#include <vector>

#include "tarfvae/ndarray.hpp"

namespace tarfvae {

/// S sampled trajectories of a C x H target, stored sample-major.
struct ForecastSamples {
  std::size_t samples = 0;
  std::size_t channels = 0;
  std::size_t horizon = 0;
  std::vector<double> values;  // [s][c][h]
  bool metric_scale = false;

  ForecastSamples() = default;
  ForecastSamples(std::size_t s, std::size_t c, std::size_t h)
      : samples(s), channels(c), horizon(h), values(s * c * h, 0.0) {}

  double& at(std::size_t s, std::size_t c, std::size_t h) { return values[(s * channels + c) * horizon + h]; }
  double at(std::size_t s, std::size_t c, std::size_t h) const { return values[(s * channels + c) * horizon + h]; }

  NdArray sample(std::size_t s) const;
  /// Values of one (channel, step) cell across all samples.
  std::vector<double> cell(std::size_t c, std::size_t h) const;
};

}  // namespace tarfvae
