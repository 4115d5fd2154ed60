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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tarfvae/adam.hpp"
#include "tarfvae/data.hpp"
#include "tarfvae/model.hpp"

namespace tarfvae::training {

enum class AblationMode { Full, NoFlow };

const char* to_string(AblationMode m);
AblationMode ablation_from_string(const std::string& s);

/// The six additive terms of the single-sample negative ELBO.
struct LossBreakdown {
  double const_term = 0.0;       // (C*H)/2 ln 2pi
  double logvar_term = 0.0;      // 1/2 sum(ln sigma_prior^2 - ln sigma_z0^2); sigma_y = 1 adds nothing
  double logdet_term = 0.0;      // -s_sum
  double recon_term = 0.0;       // 1/2 ||y - yhat||^2
  double q_quad_term = 0.0;      // -1/2 ||eps||^2
  double prior_quad_term = 0.0;  // 1/2 ||(z - mu_prior) / sigma_prior||^2
  double total = 0.0;

  double term_sum() const {
    return const_term + logvar_term + logdet_term + recon_term + q_quad_term + prior_quad_term;
  }
  LossBreakdown& operator+=(const LossBreakdown& o);
  LossBreakdown scaled(double k) const;
  nlohmann::json to_json() const;
};

struct LossResult {
  ad::Var total;  // 1 x 1, differentiable
  ad::Var yhat;   // C x H, normalized scale
  LossBreakdown terms;
  model::GaussianParams prior;
  model::GaussianParams posterior;
  ad::Var z0;
  ad::Var z;
  ad::Var s_sum;  // undefined in NoFlow mode
};

/// Single-sample loss for one normalized window with posterior noise `eps` (C x D).
LossResult compute_loss(const model::Tarfvae& model, const NdArray& x, const NdArray& y, const NdArray& eps,
                        AblationMode mode = AblationMode::Full);

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 2026;
  std::size_t val_sample_count = 50;
  AblationMode ablation = AblationMode::Full;
  Precision precision = Precision::F32;
  std::size_t max_batches_per_epoch = 0;  // 0: full pass over the training windows
  std::size_t max_val_windows = 0;        // 0: every validation window

  void validate() const;
  nlohmann::json to_json() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown train_loss;  // means over the epoch's samples
  double val_score = 0.0;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  std::vector<NdArray> best_params;
  double best_score = 0.0;
  std::size_t best_epoch = 0;
  std::uint64_t steps = 0;
  std::vector<EpochRecord> log;
  bool diverged = false;
  std::string divergence;
};

/// MSE of the per-cell median of S generated samples against y on the
/// GlobalStats-standardized scale, averaged over windows.
double validate(const model::Tarfvae& model, std::span<const data::WindowSample> windows,
                const data::GlobalStats& stats, std::size_t samples, std::uint64_t seed);

/// ADAM over shuffled mini-batches with early stopping on the validation
/// score. On return the model holds the best parameters seen.
TrainResult train(model::Tarfvae& model, std::span<const data::WindowSample> train_windows,
                  std::span<const data::WindowSample> val_windows, const data::GlobalStats& stats,
                  const TrainConfig& config, const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace tarfvae::training
