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

#include "tarfvae/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "tarfvae/rng.hpp"

namespace tarfvae::synthetic {

const char* to_string(Kind k) { return k == Kind::Ar1 ? "ar1" : "sine_noise"; }

Kind kind_from_string(const std::string& s) {
  if (s == "ar1") return Kind::Ar1;
  if (s == "sine_noise") return Kind::SineNoise;
  throw Error("unknown synthetic kind '" + s + "' (expected ar1 or sine_noise)");
}

void SyntheticSpec::validate() const {
  if (channels == 0) throw Error("synthetic: channels must be positive");
  if (length < 2) throw Error("synthetic: length must be at least 2");
  if (!(sigma >= 0.0)) throw Error("synthetic: sigma must be non-negative");
  if (kind == Kind::Ar1) {
    if (phi.size() != 1 && phi.size() != channels) {
      throw Error("synthetic: give one phi or one per channel");
    }
    for (double p : phi) {
      if (!(std::abs(p) < 1.0)) throw Error("synthetic: |phi| must be < 1");
    }
  } else if (!(period >= 2.0)) {
    throw Error("synthetic: period must be >= 2");
  }
}

data::RawSeries gen_series(const SyntheticSpec& spec) {
  spec.validate();
  data::RawSeries out;
  out.values = NdArray::matrix(spec.channels, spec.length);
  for (std::size_t c = 0; c < spec.channels; ++c) out.channel_names.push_back("ch" + std::to_string(c));
  for (std::size_t t = 0; t < spec.length; ++t) out.timestamps.push_back(std::to_string(t));

  Rng rng = Rng::stream(spec.seed, std::string("synthetic/") + to_string(spec.kind));
  for (std::size_t c = 0; c < spec.channels; ++c) {
    if (spec.kind == Kind::Ar1) {
      const double phi = spec.phi_for(c);
      double x = spec.sigma / std::sqrt(1.0 - phi * phi) * rng.normal();
      out.values(c, 0) = x;
      for (std::size_t t = 1; t < spec.length; ++t) {
        x = phi * x + spec.sigma * rng.normal();
        out.values(c, t) = x;
      }
    } else {
      for (std::size_t t = 0; t < spec.length; ++t) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / spec.period;
        out.values(c, t) = spec.amplitude * std::sin(phase) + spec.sigma * rng.normal();
      }
    }
  }
  return out;
}

GaussianForecast analytic_forecast_distribution(const SyntheticSpec& spec, const NdArray& x_window, std::size_t h) {
  if (spec.kind != Kind::Ar1) throw Error("analytic forecast is only available for ar1");
  if (h == 0) throw Error("forecast step must be >= 1");
  GaussianForecast f;
  const std::size_t last = x_window.cols() - 1;
  for (std::size_t c = 0; c < x_window.rows(); ++c) {
    const double phi = spec.phi_for(c);
    const double ph = std::pow(phi, static_cast<double>(h));
    f.mu.push_back(ph * x_window(c, last));
    f.sigma.push_back(spec.sigma * std::sqrt((1.0 - ph * ph) / (1.0 - phi * phi)));
  }
  return f;
}

}  // namespace tarfvae::synthetic
