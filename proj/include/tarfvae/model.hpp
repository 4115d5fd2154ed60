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

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "tarfvae/forecast.hpp"
#include "tarfvae/layers.hpp"

namespace tarfvae::model {

struct ModelConfig {
  std::size_t channels = 7;
  std::size_t lookback = 96;
  std::size_t horizon = 96;
  std::size_t latent = 128;         // D; also the width of all four embeddings
  std::size_t flow_blocks = 4;      // K
  std::size_t mlp_depth = 2;        // MLP blocks per stack
  std::size_t hidden = 0;           // feature-mix width; 0 means 2*D
  std::size_t channel_hidden = 0;   // channel-mix width; 0 means 2*C
  std::size_t heads = 4;
  double s_max = 5.0;

  std::size_t hidden_width() const { return hidden ? hidden : 2 * latent; }
  std::size_t channel_hidden_width() const { return channel_hidden ? channel_hidden : 2 * channels; }
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// Mean and log-variance of a diagonal Gaussian over a C x D latent.
struct GaussianParams {
  ad::Var mu;
  ad::Var logvar;  // clamped to [-10, 10]
};

struct FlowOutput {
  ad::Var z;                        // z_K, original channel order
  ad::Var s_sum;                    // 1 x 1, sum of every emitted s entry
  std::vector<NdArray> per_block_s; // K arrays of C x D, original channel order
};

/// z0 = mu + exp(logvar / 2) * eps. `eps` is a constant.
ad::Var reparameterize(const GaussianParams& gp, const NdArray& eps);

struct ComputeCounts {
  std::uint64_t prior = 0;
  std::uint64_t encoder = 0;
  std::uint64_t flow = 0;
  std::uint64_t decoder = 0;
};

/// Prior, encoder, conditional TARFLOW and decoder over channel tokens.
class Tarfvae {
 public:
  Tarfvae(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

  /// x: C x L, instance-normalized.
  GaussianParams prior_forward(const NdArray& x) const;
  /// x: C x L, y: C x H, both normalized with x's statistics.
  GaussianParams encoder_forward(const NdArray& x, const NdArray& y) const;
  /// Emb3([x, y]): the flow's conditioning tokens, C x D.
  ad::Var flow_condition(const NdArray& x, const NdArray& y) const;
  FlowOutput tarflow_forward(const ad::Var& z0, const ad::Var& cond) const;
  /// Sequential inverse of tarflow_forward. Verification only; never used by generate.
  NdArray tarflow_inverse(const NdArray& z, const NdArray& cond) const;
  /// z: (S*C) x D stacked samples, x: C x L normalized. Returns (S*C) x H on the normalized scale.
  ad::Var decoder_forward(const ad::Var& z, const NdArray& x) const;

  /// One-step generation: prior draw then a single batched decoder pass.
  /// Output is on the original data scale.
  ForecastSamples generate(const NdArray& x_raw, std::size_t samples, std::uint64_t seed) const;

  ComputeCounts counts() const;
  void reset_counts();

  /// Test hook: when set, the flow's s_sum ledger is scaled by 0.5.
  void set_logdet_fault(bool on) noexcept { logdet_fault_ = on; }

 private:
  struct FlowBlock {
    nn::CausalTransformerBlock transformer;
    nn::Linear head;  // D -> 2D (s, t), zero-initialised
  };
  struct Counters {
    std::atomic<std::uint64_t> prior{0}, encoder{0}, flow{0}, decoder{0};
  };

  ad::Var block_shift_scale(const FlowBlock& block, const ad::Var& u) const;
  void require_shape(const NdArray& a, std::size_t rows, std::size_t cols, const char* what) const;

  ModelConfig config_;
  ParamStore params_;
  nn::SeriesEmbedding emb_prior_, emb_encoder_, emb_flow_, emb_decoder_;
  nn::MlpStack prior_mlp_, encoder_mlp_, decoder_mlp_;
  nn::Linear prior_mu_, prior_logvar_, encoder_mu_, encoder_logvar_;
  std::vector<FlowBlock> flow_;
  nn::MultiHeadAttention decoder_attn_;
  nn::Linear decoder_out_;
  std::unique_ptr<Counters> counters_ = std::make_unique<Counters>();
  bool logdet_fault_ = false;
};

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

}  // namespace tarfvae::model
