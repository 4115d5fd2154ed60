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

#include "tarfvae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "tarfvae/model.hpp"
#include "tarfvae/rng.hpp"

namespace tarfvae::metrics {

namespace {

void require_levels(std::span<const double> levels) {
  if (levels.size() < 2) throw Error("need at least two quantile levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw Error("quantile levels must lie in (0, 1)");
    if (i > 0 && !(levels[i] > levels[i - 1])) throw Error("quantile levels must be strictly ascending");
  }
}

double interpolate_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double median(std::span<const double> values) {
  if (values.empty()) throw Error("median of an empty set");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

NdArray sample_median(const ForecastSamples& samples) {
  if (samples.samples == 0) throw Error("sample_median: no samples");
  NdArray out = NdArray::matrix(samples.channels, samples.horizon);
  for (std::size_t c = 0; c < samples.channels; ++c)
    for (std::size_t h = 0; h < samples.horizon; ++h) out(c, h) = median(samples.cell(c, h));
  return out;
}

PointMetrics point_metrics(std::span<const ForecastSamples> forecasts, std::span<const NdArray> truth) {
  if (forecasts.size() != truth.size()) throw ShapeError("point_metrics: forecast/truth count mismatch");
  PointMetrics m;
  std::size_t cells = 0;
  for (std::size_t w = 0; w < forecasts.size(); ++w) {
    const NdArray med = sample_median(forecasts[w]);
    if (!med.same_shape(truth[w])) {
      throw ShapeError("point_metrics: forecast " + med.shape_str() + " vs truth " + truth[w].shape_str());
    }
    for (std::size_t i = 0; i < med.size(); ++i) {
      const double e = med[i] - truth[w][i];
      m.mse += e * e;
      m.mae += std::abs(e);
    }
    cells += med.size();
  }
  if (cells == 0) throw Error("point_metrics: nothing to score");
  m.mse /= static_cast<double>(cells);
  m.mae /= static_cast<double>(cells);
  return m;
}

std::vector<double> default_quantile_levels() {
  std::vector<double> q;
  for (int i = 1; i <= 99; ++i) q.push_back(i / 100.0);
  return q;
}

QuantileSet extract_quantiles(std::span<const double> samples, std::span<const double> levels) {
  if (samples.size() < 2) throw Error("extract_quantiles needs at least 2 samples");
  require_levels(levels);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  QuantileSet qs{{levels.begin(), levels.end()}, {}};
  qs.values.reserve(levels.size());
  for (double q : levels) qs.values.push_back(interpolate_sorted(sorted, q));
  return qs;
}

double crps_low_tail(double q1, double Q1, double y, bool y_at_or_below) {
  return y_at_or_below ? 2.0 * (Q1 - y) * (q1 - 0.5 * q1 * q1) : 2.0 * (Q1 - y) * (-0.5 * q1 * q1);
}

double crps_high_tail(double qn, double Qn, double y, bool y_at_or_below) {
  return y_at_or_below ? 2.0 * (Qn - y) * (0.5 * (1.0 - qn) * (1.0 - qn))
                       : 2.0 * (Qn - y) * (-0.5 * (1.0 - qn * qn));
}

double crps_quantile(const QuantileSet& qs, double y) {
  require_levels(qs.levels);
  const std::size_t n = qs.levels.size();
  if (qs.values.size() != n) throw ShapeError("crps_quantile: values/levels size mismatch");
  const auto& q = qs.levels;
  const auto& Q = qs.values;

  double total = crps_low_tail(q[0], Q[0], y, y <= Q[0]) + crps_high_tail(q[n - 1], Q[n - 1], y, y <= Q[n - 1]);
  for (std::size_t i = 0; i < n; ++i) {
    // Trapezoid weights over [q_1, q_n]; equal to the grid step in the interior
    // of a uniform grid and half of it at the two ends.
    const double left = i > 0 ? q[i] - q[i - 1] : 0.0;
    const double right = i + 1 < n ? q[i + 1] - q[i] : 0.0;
    const double weight = 0.5 * (left + right);
    const double indicator = y <= Q[i] ? 1.0 : 0.0;
    total += 2.0 * (Q[i] - y) * (indicator - q[i]) * weight;
  }
  return total;
}

double crps_sample_oracle(std::span<const double> samples, double y) {
  if (samples.size() < 2) throw Error("crps_sample_oracle needs at least 2 samples");
  const auto S = static_cast<double>(samples.size());
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double abs_err = 0.0;
  for (double x : sorted) abs_err += std::abs(x - y);
  // sum_{i,j} |x_i - x_j| = 2 * sum_i (2i - S + 1) x_(i) over the sorted order.
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) pair_sum += (2.0 * static_cast<double>(i) - S + 1.0) * sorted[i];
  pair_sum *= 2.0;
  return abs_err / S - 0.5 * pair_sum / (S * S);
}

double crps_gaussian_closed_form(double mu, double sigma, double y) {
  if (!(sigma > 0.0)) throw Error("crps_gaussian_closed_form needs sigma > 0");
  const double z = (y - mu) / sigma;
  const double pdf = std::exp(-0.5 * z * z) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - std::numbers::inv_sqrtpi);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t h = 0; h < per_horizon.size(); ++h) {
    per.push_back({{"step", h + 1}, {"mse", per_horizon[h].mse}, {"mae", per_horizon[h].mae},
                   {"crps", per_horizon[h].crps}});
  }
  return {{"dataset", dataset}, {"horizon", horizon}, {"lookback", lookback}, {"S", samples},
          {"windows", windows}, {"mse", mse},         {"mae", mae},           {"crps", crps},
          {"per_horizon", per}};
}

EvalReport evaluate_dataset(const model::Tarfvae& model, std::span<const data::WindowSample> windows,
                            const data::GlobalStats& stats, const EvalOptions& options) {
  if (windows.empty()) throw Error("evaluate_dataset: no test windows");
  if (options.samples < 2) throw Error("evaluate_dataset needs S >= 2 for quantile CRPS");
  const auto& cfg = model.config();
  EvalReport report;
  report.dataset = options.dataset;
  report.horizon = cfg.horizon;
  report.lookback = cfg.lookback;
  report.samples = options.samples;
  report.windows = windows.size();
  report.per_horizon.assign(cfg.horizon, {});

  const std::vector<double> band_levels{0.05, 0.5, 0.95};
  std::vector<double> cell(options.samples);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& win = windows[w];
    ForecastSamples fc = model.generate(win.x, options.samples, derive_seed(options.seed, w));
    const NdArray y = stats.standardize(win.y);
    for (std::size_t c = 0; c < fc.channels; ++c) {
      CellRow row{w, c, 0.0, 0.0, 0.0};
      for (std::size_t h = 0; h < fc.horizon; ++h) {
        for (std::size_t s = 0; s < fc.samples; ++s) cell[s] = (fc.at(s, c, h) - stats.mu[c]) / stats.sigma[c];
        const double med = median(cell);
        const double err = med - y(c, h);
        const double crps = crps_quantile(extract_quantiles(cell, options.qlevels), y(c, h));
        row.mse += err * err;
        row.mae += std::abs(err);
        row.crps += crps;
        report.per_horizon[h].mse += err * err;
        report.per_horizon[h].mae += std::abs(err);
        report.per_horizon[h].crps += crps;
        if (w < options.band_windows) {
          const QuantileSet band = extract_quantiles(cell, band_levels);
          report.bands.push_back({w, c, h, y(c, h), band.values[0], band.values[1], band.values[2]});
        }
      }
      report.mse += row.mse;
      report.mae += row.mae;
      report.crps += row.crps;
      const auto H = static_cast<double>(fc.horizon);
      row.mse /= H;
      row.mae /= H;
      row.crps /= H;
      report.cells.push_back(row);
    }
  }
  const auto n_cells = static_cast<double>(windows.size() * cfg.channels * cfg.horizon);
  report.mse /= n_cells;
  report.mae /= n_cells;
  report.crps /= n_cells;
  const auto per_step = static_cast<double>(windows.size() * cfg.channels);
  for (auto& h : report.per_horizon) {
    h.mse /= per_step;
    h.mae /= per_step;
    h.crps /= per_step;
  }
  return report;
}

void write_report_json(const std::filesystem::path& path, const EvalReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << report.to_json().dump(2) << '\n';
}

void write_report_csv(const std::filesystem::path& path, const EvalReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "window,channel,mse,mae,crps\n" << std::setprecision(10);
  for (const auto& r : report.cells) {
    out << r.window << ',' << r.channel << ',' << r.mse << ',' << r.mae << ',' << r.crps << '\n';
  }
}

void write_bands_csv(const std::filesystem::path& path, const EvalReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "window,channel,step,truth,q05,q50,q95\n" << std::setprecision(10);
  for (const auto& b : report.bands) {
    out << b.window << ',' << b.channel << ',' << b.step + 1 << ',' << b.truth << ',' << b.q05 << ',' << b.q50
        << ',' << b.q95 << '\n';
  }
}

}  // namespace tarfvae::metrics
