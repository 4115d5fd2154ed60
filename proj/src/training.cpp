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

#include "tarfvae/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "tarfvae/metrics.hpp"
#include "tarfvae/rng.hpp"

namespace tarfvae::training {

namespace {

template <typename F>
ad::Var loss_term(const char* name, F&& build) {
  ad::Var v;
  try {
    v = build();
  } catch (const NumericError& e) {
    throw NumericError(name, e.what());
  }
  if (!std::isfinite(v.item())) throw NumericError(name, "loss term is not finite");
  return v;
}

NdArray standard_normal(Rng& rng, std::size_t rows, std::size_t cols) {
  NdArray a = NdArray::matrix(rows, cols);
  for (double& v : a.data()) v = rng.normal();
  return a;
}

std::vector<std::size_t> subsample(std::size_t n, std::size_t max) {
  std::vector<std::size_t> idx;
  if (max == 0 || max >= n) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }
  for (std::size_t i = 0; i < max; ++i) idx.push_back(i * n / max);
  return idx;
}

}  // namespace

const char* to_string(AblationMode m) { return m == AblationMode::Full ? "full" : "no_flow"; }

AblationMode ablation_from_string(const std::string& s) {
  if (s == "full") return AblationMode::Full;
  if (s == "no_flow") return AblationMode::NoFlow;
  throw Error("unknown ablation mode '" + s + "' (expected full or no_flow)");
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  const_term += o.const_term;
  logvar_term += o.logvar_term;
  logdet_term += o.logdet_term;
  recon_term += o.recon_term;
  q_quad_term += o.q_quad_term;
  prior_quad_term += o.prior_quad_term;
  total += o.total;
  return *this;
}

LossBreakdown LossBreakdown::scaled(double k) const {
  return {const_term * k, logvar_term * k, logdet_term * k, recon_term * k, q_quad_term * k, prior_quad_term * k,
          total * k};
}

nlohmann::json LossBreakdown::to_json() const {
  return {{"const_term", const_term}, {"logvar_term", logvar_term},         {"logdet_term", logdet_term},
          {"recon_term", recon_term}, {"q_quad_term", q_quad_term},         {"prior_quad_term", prior_quad_term},
          {"total", total}};
}

LossResult compute_loss(const model::Tarfvae& model, const NdArray& x, const NdArray& y, const NdArray& eps,
                        AblationMode mode) {
  const auto& cfg = model.config();
  LossResult r;
  r.prior = model.prior_forward(x);
  r.posterior = model.encoder_forward(x, y);
  r.z0 = model::reparameterize(r.posterior, eps);
  if (mode == AblationMode::Full) {
    model::FlowOutput flow = model.tarflow_forward(r.z0, model.flow_condition(x, y));
    r.z = flow.z;
    r.s_sum = flow.s_sum;
  } else {
    r.z = r.z0;
  }
  r.yhat = model.decoder_forward(r.z, x);

  const double dim = static_cast<double>(cfg.channels * cfg.horizon);
  ad::Var const_term = ad::Var::constant(NdArray({1, 1}, 0.5 * dim * std::log(2.0 * std::numbers::pi)));
  ad::Var logvar_term = loss_term("logvar_term", [&] {
    return ad::scale(ad::sum(ad::sub(r.prior.logvar, r.posterior.logvar)), 0.5);
  });
  ad::Var logdet_term = mode == AblationMode::Full ? loss_term("logdet_term", [&] { return ad::scale(r.s_sum, -1.0); })
                                                   : ad::Var::constant(NdArray::matrix(1, 1));
  ad::Var recon_term = loss_term("recon_term", [&] {
    return ad::scale(ad::sum(ad::square(ad::sub(r.yhat, ad::Var::constant(y)))), 0.5);
  });
  double eps_sq = 0.0;
  for (double e : eps.data()) eps_sq += e * e;
  ad::Var q_quad_term = ad::Var::constant(NdArray({1, 1}, -0.5 * eps_sq));
  ad::Var prior_quad_term = loss_term("prior_quad_term", [&] {
    ad::Var diff_sq = ad::square(ad::sub(r.z, r.prior.mu));
    return ad::scale(ad::sum(ad::mul(diff_sq, ad::exp(ad::scale(r.prior.logvar, -1.0)))), 0.5);
  });

  r.total = loss_term("total", [&] {
    return ad::add(ad::add(ad::add(const_term, logvar_term), ad::add(logdet_term, recon_term)),
                   ad::add(q_quad_term, prior_quad_term));
  });
  r.terms.const_term = const_term.item();
  r.terms.logvar_term = logvar_term.item();
  r.terms.logdet_term = logdet_term.item();
  r.terms.recon_term = recon_term.item();
  r.terms.q_quad_term = q_quad_term.item();
  r.terms.prior_quad_term = prior_quad_term.item();
  r.terms.total = r.total.item();
  return r;
}

void TrainConfig::validate() const {
  if (val_sample_count < 1) throw Error("val_sample_count must be >= 1");
  if (patience < 1) throw Error("patience must be >= 1");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (!(lr >= 0.0)) throw Error("lr must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw Error("ADAM betas must lie in [0, 1)");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"lr", lr},
          {"beta1", beta1},
          {"beta2", beta2},
          {"batch_size", batch_size},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"seed", seed},
          {"val_sample_count", val_sample_count},
          {"ablation", to_string(ablation)},
          {"precision", tarfvae::to_string(precision)},
          {"max_batches_per_epoch", max_batches_per_epoch},
          {"max_val_windows", max_val_windows}};
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch}, {"train_loss", train_loss.to_json()}, {"val_score", val_score},
          {"wall_seconds", wall_seconds}};
}

double validate(const model::Tarfvae& model, std::span<const data::WindowSample> windows,
                const data::GlobalStats& stats, std::size_t samples, std::uint64_t seed) {
  if (windows.empty()) throw Error("validation set is empty");
  if (samples < 1) throw Error("validation needs S >= 1");
  double total = 0.0;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const ForecastSamples fc = model.generate(windows[w].x, samples, derive_seed(seed, w));
    const NdArray med = stats.standardize(metrics::sample_median(fc));
    const NdArray y = stats.standardize(windows[w].y);
    double se = 0.0;
    for (std::size_t i = 0; i < med.size(); ++i) se += (med[i] - y[i]) * (med[i] - y[i]);
    total += se / static_cast<double>(med.size());
  }
  return total / static_cast<double>(windows.size());
}

TrainResult train(model::Tarfvae& model, std::span<const data::WindowSample> train_windows,
                  std::span<const data::WindowSample> val_windows, const data::GlobalStats& stats,
                  const TrainConfig& config, const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train_windows.empty()) throw Error("training set is empty");
  if (val_windows.empty()) throw Error("validation set is empty");

  ad::PrecisionGuard precision(config.precision);
  ParamStore& params = model.params();
  if (config.precision == Precision::F32) params.round_to_f32();

  std::vector<data::Normalized> normalized;
  normalized.reserve(train_windows.size());
  for (const auto& w : train_windows) normalized.push_back(data::instance_normalize(w.x, &w.y));

  std::vector<data::WindowSample> val_subset;
  for (std::size_t i : subsample(val_windows.size(), config.max_val_windows)) val_subset.push_back(val_windows[i]);

  const auto& mcfg = model.config();
  Rng noise = Rng::stream(config.seed, "noise");
  Rng shuffle = Rng::stream(config.seed, "data-shuffle");
  const std::uint64_t val_seed = derive_seed(config.seed, 0x7661);
  AdamState adam = AdamState::zeros_like(params);
  const AdamConfig adam_cfg{config.lr, config.beta1, config.beta2, 1e-8};

  TrainResult result;
  result.best_params = params.snapshot();
  result.best_score = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(normalized.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t epochs_without_improvement = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    std::size_t batches = (order.size() + config.batch_size - 1) / config.batch_size;
    if (config.max_batches_per_epoch > 0) batches = std::min(batches, config.max_batches_per_epoch);

    LossBreakdown epoch_sum;
    std::size_t epoch_samples = 0;
    try {
      for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t first = b * config.batch_size;
        const std::size_t last = std::min(order.size(), first + config.batch_size);
        const double inv_batch = 1.0 / static_cast<double>(last - first);
        params.zero_grad();
        for (std::size_t i = first; i < last; ++i) {
          const auto& n = normalized[order[i]];
          const NdArray eps = standard_normal(noise, mcfg.channels, mcfg.latent);
          LossResult loss = compute_loss(model, n.x, *n.y, eps, config.ablation);
          ad::backward(loss.total, inv_batch);
          epoch_sum += loss.terms;
          ++epoch_samples;
        }
        adam_step(params, adam, adam_cfg);
        ++result.steps;
      }
    } catch (const NumericError& e) {
      result.diverged = true;
      result.divergence = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_sum.scaled(1.0 / static_cast<double>(std::max<std::size_t>(epoch_samples, 1)));
    try {
      rec.val_score = validate(model, val_subset, stats, config.val_sample_count, val_seed);
    } catch (const NumericError& e) {
      result.diverged = true;
      result.divergence = "validation after epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_score < result.best_score) {
      result.best_score = rec.val_score;
      result.best_epoch = epoch;
      result.best_params = params.snapshot();
      epochs_without_improvement = 0;
    } else if (++epochs_without_improvement >= config.patience) {
      break;
    }
  }

  params.restore(result.best_params);
  params.zero_grad();
  return result;
}

}  // namespace tarfvae::training
