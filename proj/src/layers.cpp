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

#include "tarfvae/layers.hpp"

#include <cmath>

namespace tarfvae::nn {

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng, Init init)
    : in_(in), out_(out) {
  NdArray w = NdArray::matrix(out, in);
  if (init == Init::Uniform) {
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
  }
  weight_ = store.add(name + ".weight", std::move(w));
  bias_ = store.add(name + ".bias", NdArray::matrix(1, out));
}

ad::Var SeriesEmbedding::operator()(const ad::Var& series) const {
  if (series.cols() != proj_.in_features()) {
    throw ShapeError("series embedding expects length " + std::to_string(proj_.in_features()) + ", got " +
                     std::to_string(series.cols()));
  }
  return proj_(series);
}

MlpBlock::MlpBlock(ParamStore& store, const std::string& name, std::size_t channels, std::size_t width,
                   std::size_t hidden, std::size_t channel_hidden, Rng& rng)
    : feat_in_(store, name + ".feat_in", width, hidden, rng),
      feat_out_(store, name + ".feat_out", hidden, width, rng),
      chan_in_(store, name + ".chan_in", channels, channel_hidden, rng),
      chan_out_(store, name + ".chan_out", channel_hidden, channels, rng),
      channels_(channels),
      width_(width) {}

ad::Var MlpBlock::operator()(const ad::Var& h) const {
  if (h.cols() != width_ || h.rows() % channels_ != 0) {
    throw ShapeError("mlp block expects (S*" + std::to_string(channels_) + ") x " + std::to_string(width_) +
                     ", got " + h.value().shape_str());
  }
  ad::Var x = ad::add(h, feat_out_(ad::gelu(feat_in_(h))));
  // (S*C) x F -> (S*F) x C, mix along C, and back.
  ad::Var t = ad::group_transpose(x, channels_);
  ad::Var mixed = chan_out_(ad::gelu(chan_in_(t)));
  return ad::add(x, ad::group_transpose(mixed, width_));
}

MlpStack::MlpStack(ParamStore& store, const std::string& name, std::size_t depth, std::size_t channels,
                   std::size_t width, std::size_t hidden, std::size_t channel_hidden, Rng& rng) {
  for (std::size_t i = 0; i < depth; ++i) {
    blocks_.emplace_back(store, name + "." + std::to_string(i), channels, width, hidden, channel_hidden, rng);
  }
}

ad::Var MlpStack::operator()(ad::Var h) const {
  for (const auto& block : blocks_) h = block(h);
  return h;
}

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& name, std::size_t width,
                                       std::size_t heads, Rng& rng)
    : q_(store, name + ".q", width, width, rng),
      k_(store, name + ".k", width, width, rng),
      v_(store, name + ".v", width, width, rng),
      o_(store, name + ".o", width, width, rng),
      heads_(heads) {
  if (heads == 0 || width % heads != 0) {
    throw ShapeError("attention width " + std::to_string(width) + " not divisible by " + std::to_string(heads) +
                     " heads");
  }
}

ad::Var MultiHeadAttention::operator()(const ad::Var& query, const ad::Var& context, bool causal) const {
  return o_(ad::attention(q_(query), k_(context), v_(context), heads_, causal));
}

CausalTransformerBlock::CausalTransformerBlock(ParamStore& store, const std::string& name, std::size_t width,
                                               std::size_t hidden, std::size_t heads, Rng& rng)
    : attn_(store, name + ".attn", width, heads, rng),
      ff_in_(store, name + ".ff_in", width, hidden, rng),
      ff_out_(store, name + ".ff_out", hidden, width, rng) {}

ad::Var CausalTransformerBlock::operator()(const ad::Var& tokens) const {
  ad::Var a = ad::add(tokens, attn_(tokens, tokens, /*causal=*/true));
  return ad::add(a, ff_out_(ad::gelu(ff_in_(a))));
}

}  // namespace tarfvae::nn
