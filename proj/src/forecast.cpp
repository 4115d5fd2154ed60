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

#include "tarfvae/forecast.hpp"

#include <algorithm>

namespace tarfvae {

NdArray ForecastSamples::sample(std::size_t s) const {
  NdArray out = NdArray::matrix(channels, horizon);
  const auto first = values.begin() + static_cast<std::ptrdiff_t>(s * channels * horizon);
  std::copy(first, first + static_cast<std::ptrdiff_t>(channels * horizon), out.storage().begin());
  return out;
}

std::vector<double> ForecastSamples::cell(std::size_t c, std::size_t h) const {
  std::vector<double> out(samples);
  for (std::size_t s = 0; s < samples; ++s) out[s] = at(s, c, h);
  return out;
}

}  // namespace tarfvae
