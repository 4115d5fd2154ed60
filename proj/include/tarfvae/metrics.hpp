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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tarfvae/data.hpp"
#include "tarfvae/forecast.hpp"

namespace tarfvae::model {
class Tarfvae;
}

namespace tarfvae::metrics {

/// Median of a sample set; even counts use the midpoint of the two middle values.
double median(std::span<const double> values);

/// Per-(channel, step) median over samples: C x H.
NdArray sample_median(const ForecastSamples& samples);

struct PointMetrics {
  double mse = 0.0;
  double mae = 0.0;
};

/// MSE/MAE of the per-cell sample median, averaged over every cell of every window.
PointMetrics point_metrics(std::span<const ForecastSamples> forecasts, std::span<const NdArray> truth);

/// 0.01, 0.02, ..., 0.99
std::vector<double> default_quantile_levels();

struct QuantileSet {
  std::vector<double> levels;  // strictly ascending in (0, 1)
  std::vector<double> values;  // Q(level), non-decreasing
};

/// Empirical quantiles with linear interpolation at position q*(S-1) of the sorted samples.
QuantileSet extract_quantiles(std::span<const double> samples, std::span<const double> levels);

/// Contribution of [0, q1] under constant extrapolation Q(q) = Q(q1).
double crps_low_tail(double q1, double Q1, double y, bool y_at_or_below);
/// Contribution of [qn, 1] under constant extrapolation Q(q) = Q(qn).
double crps_high_tail(double qn, double Qn, double y, bool y_at_or_below);

/// Quantile-grid CRPS: closed-form tails plus a trapezoid sum over the levels.
double crps_quantile(const QuantileSet& qs, double y);

/// Exact empirical CRPS in energy form, E|X - y| - E|X - X'| / 2.
double crps_sample_oracle(std::span<const double> samples, double y);

/// CRPS of N(mu, sigma^2) at y.
double crps_gaussian_closed_form(double mu, double sigma, double y);

struct HorizonMetrics {
  double mse = 0.0;
  double mae = 0.0;
  double crps = 0.0;
};

struct CellRow {
  std::size_t window = 0;
  std::size_t channel = 0;
  double mse = 0.0;
  double mae = 0.0;
  double crps = 0.0;
};

struct BandRow {
  std::size_t window = 0;
  std::size_t channel = 0;
  std::size_t step = 0;
  double truth = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

struct EvalReport {
  std::string dataset;
  std::size_t horizon = 0;
  std::size_t lookback = 0;
  std::size_t samples = 0;
  std::size_t windows = 0;
  double mse = 0.0;
  double mae = 0.0;
  double crps = 0.0;
  std::vector<HorizonMetrics> per_horizon;
  std::vector<CellRow> cells;
  std::vector<BandRow> bands;

  nlohmann::json to_json() const;
};

struct EvalOptions {
  std::string dataset = "unknown";
  std::size_t samples = 200;
  std::vector<double> qlevels = default_quantile_levels();
  std::uint64_t seed = 0;
  std::size_t band_windows = 20;  // windows whose quantile bands are kept for plotting
};

/// Generates S samples per window, standardizes them with `stats`, and
/// scores median MSE/MAE and quantile CRPS over all cells.
EvalReport evaluate_dataset(const model::Tarfvae& model, std::span<const data::WindowSample> windows,
                            const data::GlobalStats& stats, const EvalOptions& options);

void write_report_json(const std::filesystem::path& path, const EvalReport& report);
/// One row per (window, channel): window,channel,mse,mae,crps
void write_report_csv(const std::filesystem::path& path, const EvalReport& report);
/// One row per (window, channel, step) for the first band_windows windows.
void write_bands_csv(const std::filesystem::path& path, const EvalReport& report);

}  // namespace tarfvae::metrics
