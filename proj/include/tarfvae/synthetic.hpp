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
#include <string>
#include <vector>

#include "tarfvae/data.hpp"

namespace tarfvae::synthetic {

enum class Kind { Ar1, SineNoise };

const char* to_string(Kind k);
Kind kind_from_string(const std::string& s);

struct SyntheticSpec {
  Kind kind = Kind::Ar1;
  std::vector<double> phi{0.9};  // ar1 coefficient per channel; one value is broadcast
  double sigma = 0.1;            // innovation / observation noise std
  double period = 24.0;          // sine_noise
  double amplitude = 1.0;        // sine_noise
  std::size_t length = 10000;    // T
  std::size_t channels = 1;      // C
  std::uint64_t seed = 0;

  double phi_for(std::size_t channel) const { return phi.size() == 1 ? phi[0] : phi.at(channel); }
  void validate() const;
};

/// ar1: x_t = phi x_{t-1} + sigma e_t, started from the stationary law.
/// sine_noise: x_t = A sin(2 pi t / period) + sigma e_t.
data::RawSeries gen_series(const SyntheticSpec& spec);

struct GaussianForecast {
  std::vector<double> mu;
  std::vector<double> sigma;
};

/// h-step-ahead conditional law of an ar1 series given its last observed value:
/// mu = phi^h x_L, var = sigma^2 (1 - phi^(2h)) / (1 - phi^2).
GaussianForecast analytic_forecast_distribution(const SyntheticSpec& spec, const NdArray& x_window, std::size_t h);

}  // namespace tarfvae::synthetic
