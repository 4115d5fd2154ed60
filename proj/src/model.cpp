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

#include "tarfvae/model.hpp"

#include <algorithm>
#include <cmath>

#include "tarfvae/data.hpp"
#include "tarfvae/rng.hpp"

namespace tarfvae::model {

namespace {

NdArray concat_time(const NdArray& x, const NdArray& y) {
  const std::size_t C = x.rows();
  if (y.rows() != C) throw ShapeError("cannot concatenate x " + x.shape_str() + " with y " + y.shape_str());
  NdArray out = NdArray::matrix(C, x.cols() + y.cols());
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < x.cols(); ++t) out(c, t) = x(c, t);
    for (std::size_t t = 0; t < y.cols(); ++t) out(c, x.cols() + t) = y(c, t);
  }
  return out;
}

NdArray reverse_rows(const NdArray& a) {
  NdArray out = NdArray::matrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(a.rows() - 1 - i, j);
  return out;
}

}  // namespace

void ModelConfig::validate() const {
  if (channels == 0 || lookback == 0 || horizon == 0 || latent == 0) {
    throw Error("model config: channels, lookback, horizon and latent must be positive");
  }
  if (heads == 0 || latent % heads != 0) {
    throw Error("model config: latent width " + std::to_string(latent) + " is not divisible by heads " +
                std::to_string(heads));
  }
  if (!(s_max > 0.0)) throw Error("model config: s_max must be positive");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"channels", channels},   {"lookback", lookback},   {"horizon", horizon},
          {"latent", latent},       {"flow_blocks", flow_blocks}, {"mlp_depth", mlp_depth},
          {"hidden", hidden_width()}, {"channel_hidden", channel_hidden_width()},
          {"heads", heads},         {"s_max", s_max}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.channels = j.at("channels").get<std::size_t>();
  c.lookback = j.at("lookback").get<std::size_t>();
  c.horizon = j.at("horizon").get<std::size_t>();
  c.latent = j.at("latent").get<std::size_t>();
  c.flow_blocks = j.at("flow_blocks").get<std::size_t>();
  c.mlp_depth = j.at("mlp_depth").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.channel_hidden = j.at("channel_hidden").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.s_max = j.at("s_max").get<double>();
  return c;
}

ad::Var reparameterize(const GaussianParams& gp, const NdArray& eps) {
  if (!eps.same_shape(gp.mu.value())) {
    throw ShapeError("reparameterize: noise " + eps.shape_str() + " vs mean " + gp.mu.value().shape_str());
  }
  ad::Var sigma = ad::exp(ad::scale(gp.logvar, 0.5));
  return ad::add(gp.mu, ad::mul(sigma, ad::Var::constant(eps)));
}

Tarfvae::Tarfvae(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng = Rng::stream(seed, "init");
  const std::size_t C = config_.channels;
  const std::size_t L = config_.lookback;
  const std::size_t H = config_.horizon;
  const std::size_t D = config_.latent;
  const std::size_t hid = config_.hidden_width();
  const std::size_t chid = config_.channel_hidden_width();

  emb_prior_ = nn::SeriesEmbedding(params_, "prior.emb", L, D, rng);
  prior_mlp_ = nn::MlpStack(params_, "prior.mlp", config_.mlp_depth, C, D, hid, chid, rng);
  prior_mu_ = nn::Linear(params_, "prior.mu", D, D, rng);
  prior_logvar_ = nn::Linear(params_, "prior.logvar", D, D, rng);

  emb_encoder_ = nn::SeriesEmbedding(params_, "encoder.emb", L + H, D, rng);
  encoder_mlp_ = nn::MlpStack(params_, "encoder.mlp", config_.mlp_depth, C, D, hid, chid, rng);
  encoder_mu_ = nn::Linear(params_, "encoder.mu", D, D, rng);
  encoder_logvar_ = nn::Linear(params_, "encoder.logvar", D, D, rng);

  emb_flow_ = nn::SeriesEmbedding(params_, "flow.emb", L + H, D, rng);
  for (std::size_t k = 0; k < config_.flow_blocks; ++k) {
    const std::string name = "flow.block" + std::to_string(k);
    FlowBlock block;
    block.transformer = nn::CausalTransformerBlock(params_, name + ".transformer", D, hid, config_.heads, rng);
    block.head = nn::Linear(params_, name + ".head", D, 2 * D, rng, nn::Init::Zero);
    flow_.push_back(std::move(block));
  }

  emb_decoder_ = nn::SeriesEmbedding(params_, "decoder.emb", L, D, rng);
  decoder_attn_ = nn::MultiHeadAttention(params_, "decoder.attn", D, config_.heads, rng);
  decoder_mlp_ = nn::MlpStack(params_, "decoder.mlp", config_.mlp_depth, C, D, hid, chid, rng);
  decoder_out_ = nn::Linear(params_, "decoder.out", D, H, rng);
}

void Tarfvae::require_shape(const NdArray& a, std::size_t rows, std::size_t cols, const char* what) const {
  if (a.ndim() != 2 || a.rows() != rows || a.cols() != cols) {
    throw ShapeError(std::string(what) + " has shape " + a.shape_str() + ", expected [" + std::to_string(rows) +
                     "x" + std::to_string(cols) + "]");
  }
}

GaussianParams Tarfvae::prior_forward(const NdArray& x) const {
  require_shape(x, config_.channels, config_.lookback, "prior input");
  counters_->prior.fetch_add(1, std::memory_order_relaxed);
  ad::Var h = prior_mlp_(emb_prior_(ad::Var::constant(x)));
  return {prior_mu_(h), ad::clamp(prior_logvar_(h), kLogvarMin, kLogvarMax)};
}

GaussianParams Tarfvae::encoder_forward(const NdArray& x, const NdArray& y) const {
  require_shape(x, config_.channels, config_.lookback, "encoder x");
  require_shape(y, config_.channels, config_.horizon, "encoder y");
  counters_->encoder.fetch_add(1, std::memory_order_relaxed);
  ad::Var h = encoder_mlp_(emb_encoder_(ad::Var::constant(concat_time(x, y))));
  return {encoder_mu_(h), ad::clamp(encoder_logvar_(h), kLogvarMin, kLogvarMax)};
}

ad::Var Tarfvae::flow_condition(const NdArray& x, const NdArray& y) const {
  require_shape(x, config_.channels, config_.lookback, "flow condition x");
  require_shape(y, config_.channels, config_.horizon, "flow condition y");
  counters_->flow.fetch_add(1, std::memory_order_relaxed);
  return emb_flow_(ad::Var::constant(concat_time(x, y)));
}

// Returns C x 2D rows of (raw s, t) for tokens u; row j is computed from
// u rows < j and row 0 is zero.
ad::Var Tarfvae::block_shift_scale(const FlowBlock& block, const ad::Var& u) const {
  return ad::shift_rows_down(block.head(block.transformer(u)));
}

FlowOutput Tarfvae::tarflow_forward(const ad::Var& z0, const ad::Var& cond) const {
  const std::size_t C = config_.channels;
  const std::size_t D = config_.latent;
  require_shape(z0.value(), C, D, "flow input");
  require_shape(cond.value(), C, D, "flow condition");
  counters_->flow.fetch_add(1, std::memory_order_relaxed);

  FlowOutput out;
  ad::Var z = z0;
  ad::Var c = cond;
  ad::Var s_sum = ad::Var::constant(NdArray::matrix(1, 1));
  bool reversed = false;
  for (std::size_t k = 0; k < flow_.size(); ++k) {
    if (k > 0) {
      z = ad::reverse_rows(z);
      c = ad::reverse_rows(c);
      reversed = !reversed;
    }
    ad::Var st = block_shift_scale(flow_[k], ad::add(z, c));
    ad::Var s = ad::scale(ad::tanh(ad::scale(ad::slice_cols(st, 0, D), 1.0 / config_.s_max)), config_.s_max);
    ad::Var t = ad::slice_cols(st, D, D);
    z = ad::mul(ad::sub(z, t), ad::exp(s));
    s_sum = ad::add(s_sum, ad::sum(s));
    out.per_block_s.push_back(reversed ? reverse_rows(s.value()) : s.value());
  }
  if (reversed) z = ad::reverse_rows(z);
  out.z = z;
  out.s_sum = logdet_fault_ ? ad::scale(s_sum, 0.5) : s_sum;
  return out;
}

NdArray Tarfvae::tarflow_inverse(const NdArray& z, const NdArray& cond) const {
  const std::size_t C = config_.channels;
  const std::size_t D = config_.latent;
  require_shape(z, C, D, "flow output");
  require_shape(cond, C, D, "flow condition");
  ad::NoGradGuard no_grad;

  // Block k operates on reversed channel order when k is odd.
  NdArray cur = z;
  for (std::size_t kk = flow_.size(); kk-- > 0;) {
    const bool reversed = kk % 2 == 1;
    NdArray out_k = reversed ? reverse_rows(cur) : cur;
    const NdArray cond_k = reversed ? reverse_rows(cond) : cond;
    NdArray in_k = NdArray::matrix(C, D);
    for (std::size_t j = 0; j < C; ++j) {
      NdArray u = NdArray::matrix(C, D);
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = in_k[i] + cond_k[i];
      const NdArray st = block_shift_scale(flow_[kk], ad::Var::constant(u)).value();
      for (std::size_t d = 0; d < D; ++d) {
        const double s = config_.s_max * std::tanh(st(j, d) / config_.s_max);
        in_k(j, d) = out_k(j, d) * std::exp(-s) + st(j, D + d);
      }
    }
    if (!in_k.all_finite()) throw NumericError("tarflow_inverse", "block " + std::to_string(kk));
    cur = reversed ? reverse_rows(in_k) : in_k;
  }
  return cur;
}

ad::Var Tarfvae::decoder_forward(const ad::Var& z, const NdArray& x) const {
  const std::size_t C = config_.channels;
  require_shape(x, C, config_.lookback, "decoder x");
  if (z.cols() != config_.latent || z.rows() == 0 || z.rows() % C != 0) {
    throw ShapeError("decoder latent has shape " + z.value().shape_str() + ", expected (S*" + std::to_string(C) +
                     ")x" + std::to_string(config_.latent));
  }
  counters_->decoder.fetch_add(1, std::memory_order_relaxed);
  ad::Var context = emb_decoder_(ad::Var::constant(x));
  ad::Var mixed = ad::add(z, decoder_attn_(z, context, /*causal=*/false));
  return decoder_out_(decoder_mlp_(mixed));
}

ForecastSamples Tarfvae::generate(const NdArray& x_raw, std::size_t samples, std::uint64_t seed) const {
  if (samples == 0) throw Error("generate needs at least one sample");
  const std::size_t C = config_.channels;
  const std::size_t D = config_.latent;
  const std::size_t H = config_.horizon;
  require_shape(x_raw, C, config_.lookback, "generate input");

  ad::NoGradGuard no_grad;
  const data::Normalized norm = data::instance_normalize(x_raw);
  const GaussianParams prior = prior_forward(norm.x);
  const NdArray& mu = prior.mu.value();
  const NdArray& logvar = prior.logvar.value();

  Rng rng = Rng::stream(seed, "noise");
  NdArray z = NdArray::matrix(samples * C, D);
  for (std::size_t s = 0; s < samples; ++s)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t d = 0; d < D; ++d)
        z(s * C + c, d) = mu(c, d) + std::exp(0.5 * logvar(c, d)) * rng.normal();

  const NdArray yhat = decoder_forward(ad::Var::constant(std::move(z)), norm.x).value();
  ForecastSamples out(samples, C, H);
  for (std::size_t s = 0; s < samples; ++s)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t h = 0; h < H; ++h)
        out.at(s, c, h) = yhat(s * C + c, h) * norm.stats.sigma[c] + norm.stats.mu[c];
  if (!std::all_of(out.values.begin(), out.values.end(), [](double v) { return std::isfinite(v); })) {
    throw NumericError("generate", "non-finite forecast (are the parameters trained and finite?)");
  }
  return out;
}

ComputeCounts Tarfvae::counts() const {
  return {counters_->prior.load(), counters_->encoder.load(), counters_->flow.load(), counters_->decoder.load()};
}

void Tarfvae::reset_counts() {
  counters_->prior = 0;
  counters_->encoder = 0;
  counters_->flow = 0;
  counters_->decoder = 0;
}

}  // namespace tarfvae::model
