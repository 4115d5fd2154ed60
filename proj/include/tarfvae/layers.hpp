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

#include <string>
#include <vector>

#include "tarfvae/autodiff.hpp"
#include "tarfvae/param_store.hpp"
#include "tarfvae/rng.hpp"

namespace tarfvae::nn {

enum class Init {
  Uniform,  // weights ~ U(-sqrt(1/fan_in), sqrt(1/fan_in)), bias 0
  Zero,     // weights and bias 0
};

/// y = x W^T + b. Registers `<name>.weight` (out x in) and `<name>.bias` (1 x out).
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
         Init init = Init::Uniform);

  ad::Var operator()(const ad::Var& x) const { return ad::linear(x, weight_, bias_); }

  const ad::Var& weight() const { return weight_; }
  const ad::Var& bias() const { return bias_; }
  std::size_t in_features() const noexcept { return in_; }
  std::size_t out_features() const noexcept { return out_; }

 private:
  ad::Var weight_;
  ad::Var bias_;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
};

/// Maps each channel's length-T series to an E-dim token with one shared linear layer.
class SeriesEmbedding {
 public:
  SeriesEmbedding() = default;
  SeriesEmbedding(ParamStore& store, const std::string& name, std::size_t length, std::size_t width, Rng& rng)
      : proj_(store, name, length, width, rng) {}

  /// series: C x T -> C x E.
  ad::Var operator()(const ad::Var& series) const;
  std::size_t length() const noexcept { return proj_.in_features(); }

 private:
  Linear proj_;
};

/// Two residual sublayers over a C x F block: a feature mix along F followed
/// by a channel mix along C. Stacked samples (S*C rows) are mixed per sample.
class MlpBlock {
 public:
  MlpBlock() = default;
  MlpBlock(ParamStore& store, const std::string& name, std::size_t channels, std::size_t width,
           std::size_t hidden, std::size_t channel_hidden, Rng& rng);

  ad::Var operator()(const ad::Var& h) const;

 private:
  Linear feat_in_, feat_out_, chan_in_, chan_out_;
  std::size_t channels_ = 0;
  std::size_t width_ = 0;
};

class MlpStack {
 public:
  MlpStack() = default;
  MlpStack(ParamStore& store, const std::string& name, std::size_t depth, std::size_t channels, std::size_t width,
           std::size_t hidden, std::size_t channel_hidden, Rng& rng);

  ad::Var operator()(ad::Var h) const;

 private:
  std::vector<MlpBlock> blocks_;
};

/// Multi-head attention with input and output projections.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& name, std::size_t width, std::size_t heads, Rng& rng);

  ad::Var operator()(const ad::Var& query, const ad::Var& context, bool causal) const;

 private:
  Linear q_, k_, v_, o_;
  std::size_t heads_ = 1;
};

/// Residual causal self-attention then a residual feature MLP. Output row j
/// depends on input rows <= j only.
class CausalTransformerBlock {
 public:
  CausalTransformerBlock() = default;
  CausalTransformerBlock(ParamStore& store, const std::string& name, std::size_t width, std::size_t hidden,
                         std::size_t heads, Rng& rng);

  ad::Var operator()(const ad::Var& tokens) const;

 private:
  MultiHeadAttention attn_;
  Linear ff_in_, ff_out_;
};

}  // namespace tarfvae::nn
