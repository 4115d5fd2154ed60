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

#include "tarfvae/selftest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "tarfvae/grad_check.hpp"
#include "tarfvae/metrics.hpp"
#include "tarfvae/rng.hpp"
#include "tarfvae/training.hpp"

namespace tarfvae::selftest {

namespace {

NdArray gaussian(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  NdArray a = NdArray::matrix(r, c);
  for (double& v : a.data()) v = scale * rng.normal();
  return a;
}

void redraw(ParamStore& store, const std::string& prefix, Rng& rng, double scale) {
  for (const auto& [name, var] : store.entries()) {
    if (name.rfind(prefix, 0) != 0) continue;
    ad::Var v = var;
    for (double& x : v.mutable_value().data()) x = scale * rng.normal();
  }
}

model::ModelConfig micro(std::size_t C, std::size_t L, std::size_t H, std::size_t D, std::size_t K) {
  model::ModelConfig c;
  c.channels = C;
  c.lookback = L;
  c.horizon = H;
  c.latent = D;
  c.flow_blocks = K;
  c.heads = 2;
  return c;
}

double numeric_logdet(const model::Tarfvae& m, const NdArray& z0, const ad::Var& cond, double h) {
  const auto n = static_cast<Eigen::Index>(z0.size());
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    NdArray plus = z0, minus = z0;
    plus[static_cast<std::size_t>(j)] += h;
    minus[static_cast<std::size_t>(j)] -= h;
    const NdArray fp = m.tarflow_forward(ad::Var::constant(plus), cond).z.value();
    const NdArray fm = m.tarflow_forward(ad::Var::constant(minus), cond).z.value();
    for (Eigen::Index i = 0; i < n; ++i)
      J(i, j) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
  }
  return std::log(std::abs(J.fullPivLu().determinant()));
}

struct FlowDraw {
  model::Tarfvae model;
  NdArray z0;
  NdArray cond;
};

// Fresh flow parameters, conditioning tokens and input for draw `d` of a K-block flow.
FlowDraw flow_draw(std::size_t K, std::size_t d, std::uint64_t seed, bool fault) {
  const std::uint64_t s = derive_seed(seed, K * 1000 + d);
  FlowDraw fd{model::Tarfvae(micro(3, 8, 4, 4, K), s), {}, {}};
  Rng rng(derive_seed(s, 1));
  redraw(fd.model.params(), "flow.", rng, 0.2);
  fd.model.set_logdet_fault(fault);
  fd.z0 = gaussian(rng, 3, 4);
  fd.cond = gaussian(rng, 3, 4);
  return fd;
}

constexpr std::size_t kFlowBlocks[] = {1, 2, 4};
constexpr std::size_t kDrawsPerK = 20;

SuiteResult logdet_suite(const Options& o) {
  SuiteResult r{"logdet", false, 0.0, 1e-5, 0, 0.0, ""};
  for (std::size_t K : kFlowBlocks) {
    for (std::size_t d = 0; d < kDrawsPerK; ++d) {
      FlowDraw fd = flow_draw(K, d, o.seed, o.corrupt_logdet);
      const ad::Var cond = ad::Var::constant(fd.cond);
      const double ledger = fd.model.tarflow_forward(ad::Var::constant(fd.z0), cond).s_sum.item();
      const double err = std::abs(ledger - numeric_logdet(fd.model, fd.z0, cond, 1e-5));
      if (err > r.worst) {
        r.worst = err;
        r.detail = "K=" + std::to_string(K) + " draw " + std::to_string(d);
      }
      ++r.cases;
    }
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

SuiteResult invertibility_suite(const Options& o) {
  SuiteResult r{"invertibility", false, 0.0, 1e-8, 0, 0.0, ""};
  for (std::size_t K : kFlowBlocks) {
    for (std::size_t d = 0; d < kDrawsPerK; ++d) {
      FlowDraw fd = flow_draw(K, d, o.seed, false);
      const NdArray z = fd.model.tarflow_forward(ad::Var::constant(fd.z0), ad::Var::constant(fd.cond)).z.value();
      const NdArray back = fd.model.tarflow_inverse(z, fd.cond);
      for (std::size_t i = 0; i < back.size(); ++i) {
        const double err = std::abs(back[i] - fd.z0[i]);
        if (err > r.worst) {
          r.worst = err;
          r.detail = "K=" + std::to_string(K) + " draw " + std::to_string(d);
        }
      }
      ++r.cases;
    }
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

double log_normal_pdf(double v, double mu, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (v - mu) * (v - mu) / var;
}

SuiteResult loss_oracle_suite(const Options& o) {
  SuiteResult r{"loss_oracle", false, 0.0, 1e-8, 0, 0.0, ""};
  for (std::size_t i = 0; i < 100; ++i) {
    const std::uint64_t s = derive_seed(o.seed, 50000 + i);
    Rng rng(s);
    const std::size_t C = 1 + i % 3, H = 2 + i % 4, K = 1 + i % 3;
    model::Tarfvae m(micro(C, 6, H, 4, K), s);
    redraw(m.params(), "flow.", rng, 0.2);
    const NdArray x = gaussian(rng, C, 6), y = gaussian(rng, C, H), eps = gaussian(rng, C, 4);
    const training::LossResult loss = training::compute_loss(m, x, y, eps);

    // Log-densities evaluated at the sampled points; the posterior is scored at z0 itself.
    double log_lik = 0.0, log_prior = 0.0, log_post = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) log_lik += log_normal_pdf(y[k], loss.yhat.value()[k], 1.0);
    for (std::size_t k = 0; k < loss.z.value().size(); ++k) {
      log_prior += log_normal_pdf(loss.z.value()[k], loss.prior.mu.value()[k], std::exp(loss.prior.logvar.value()[k]));
      log_post += log_normal_pdf(loss.z0.value()[k], loss.posterior.mu.value()[k],
                                 std::exp(loss.posterior.logvar.value()[k]));
    }
    const double oracle = -log_lik - log_prior + log_post - loss.s_sum.item();
    const double err = std::abs(loss.terms.total - oracle);
    if (err > r.worst) {
      r.worst = err;
      r.detail = "instance " + std::to_string(i) + ", total " + std::to_string(loss.terms.total);
    }
    ++r.cases;
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

SuiteResult gradcheck_suite(const Options& o) {
  SuiteResult r{"gradcheck", false, 0.0, 1e-4, 0, 0.0, ""};
  model::Tarfvae m(micro(2, 8, 4, 4, 2), o.seed);
  Rng rng(derive_seed(o.seed, 7));
  redraw(m.params(), "flow.", rng, 0.1);
  const NdArray x = gaussian(rng, 2, 8), y = gaussian(rng, 2, 4), eps = gaussian(rng, 2, 4);
  const GradCheckResult g =
      grad_check([&] { return training::compute_loss(m, x, y, eps).total; }, m.params(), 1e-5);
  r.worst = g.max_rel_error;
  r.cases = g.coords_checked;
  r.detail = g.worst_param + "[" + std::to_string(g.worst_index) + "]";
  r.passed = r.worst <= r.tolerance;
  return r;
}

// Standard normal quantile by bisection on the CDF.
double normal_inverse_cdf(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SuiteResult crps_suite(const Options&) {
  SuiteResult r{"crps", false, 0.0, 1e-2, 0, 0.0, ""};
  // Samples placed at the mid-probabilities of N(0, 1): no Monte Carlo noise
  // between the three routes, only their discretization.
  constexpr std::size_t S = 10000;
  std::vector<double> samples(S);
  for (std::size_t i = 0; i < S; ++i) samples[i] = normal_inverse_cdf((static_cast<double>(i) + 0.5) / S);
  const std::vector<double> levels = metrics::default_quantile_levels();
  const metrics::QuantileSet qs = metrics::extract_quantiles(samples, levels);
  for (double y : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const double quantile = metrics::crps_quantile(qs, y);
    const double energy = metrics::crps_sample_oracle(samples, y);
    const double closed = metrics::crps_gaussian_closed_form(0.0, 1.0, y);
    for (const double err : {std::abs(quantile - closed) / closed, std::abs(energy - closed) / closed,
                             std::abs(quantile - energy) / energy}) {
      if (err > r.worst) {
        r.worst = err;
        r.detail = "y=" + std::to_string(y);
      }
    }
    ++r.cases;
  }
  // Both tail branches meet at the outermost quantiles.
  for (const double edge : {qs.values.front(), qs.values.back()}) {
    const double step = 1e-13 * std::max(1.0, std::abs(edge));
    const double at = metrics::crps_quantile(qs, edge);
    const double jump = std::max(std::abs(metrics::crps_quantile(qs, edge - step) - at),
                                 std::abs(metrics::crps_quantile(qs, edge + step) - at));
    // Each side may move by at most the slope (<= 2) times the step.
    if (jump - 2.0 * step > 1e-12) {
      r.worst = std::max(r.worst, 1.0);
      r.detail = "tail discontinuity " + std::to_string(jump) + " at " + std::to_string(edge);
    }
    ++r.cases;
  }
  r.passed = r.worst <= r.tolerance;
  return r;
}

SuiteResult normalization_suite(const Options& o) {
  SuiteResult r{"normalization", false, 0.0, 1e-6, 0, 0.0, ""};
  Rng rng(derive_seed(o.seed, 3));
  for (std::size_t i = 0; i < 50; ++i) {
    const double scale = std::pow(10.0, rng.uniform(-3.0, 4.0));
    const double shift = rng.uniform(-1e3, 1e3);
    NdArray x = gaussian(rng, 3, 16, scale), y = gaussian(rng, 3, 8, scale);
    for (double& v : x.data()) v += shift;
    for (double& v : y.data()) v += shift;
    const data::Normalized nx = data::instance_normalize(x, &y);
    const NdArray back = data::denormalize(*nx.y, nx.stats);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double err = std::abs(back[k] - y[k]) / std::max(std::abs(y[k]), 1e-12);
      if (err > r.worst) {
        r.worst = err;
        r.detail = "round trip, instance " + std::to_string(i);
      }
    }
    ++r.cases;
  }
  // A constant channel must flow through every stage without producing NaN or Inf.
  model::Tarfvae m(micro(2, 8, 4, 4, 2), o.seed);
  NdArray x = gaussian(rng, 2, 8), y = gaussian(rng, 2, 4);
  for (std::size_t t = 0; t < 8; ++t) x(0, t) = 3.25;
  const ForecastSamples fc = m.generate(x, 8, o.seed);
  const data::Normalized nx = data::instance_normalize(x, &y);
  const double total = training::compute_loss(m, nx.x, *nx.y, gaussian(rng, 2, 4)).terms.total;
  const bool finite = std::isfinite(total) &&
                      std::all_of(fc.values.begin(), fc.values.end(), [](double v) { return std::isfinite(v); });
  if (!finite) {
    r.worst = std::numeric_limits<double>::infinity();
    r.detail = "constant channel produced a non-finite value";
  }
  ++r.cases;
  r.passed = r.worst <= r.tolerance;
  return r;
}

using SuiteFn = SuiteResult (*)(const Options&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> table = {
      {"logdet", logdet_suite},   {"invertibility", invertibility_suite}, {"loss_oracle", loss_oracle_suite},
      {"gradcheck", gradcheck_suite}, {"crps", crps_suite},           {"normalization", normalization_suite},
  };
  return table;
}

}  // namespace

nlohmann::json SuiteResult::to_json() const {
  return {{"suite", name},   {"passed", passed},   {"worst", worst},  {"tolerance", tolerance},
          {"cases", cases},  {"seconds", seconds}, {"detail", detail}};
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : registry()) n.push_back(name);
    return n;
  }();
  return names;
}

std::vector<SuiteResult> run(const Options& options) {
  for (const auto& s : options.suites) {
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw Error("unknown selftest suite '" + s + "'");
  }
  ad::PrecisionGuard precision(Precision::F64);
  std::vector<SuiteResult> out;
  for (const auto& [name, fn] : registry()) {
    if (!options.suites.empty() && std::find(options.suites.begin(), options.suites.end(), name) == options.suites.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r;
    try {
      r = fn(options);
    } catch (const std::exception& e) {
      r = SuiteResult{name, false, std::numeric_limits<double>::infinity(), 0.0, 0, 0.0, e.what()};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tarfvae::selftest
