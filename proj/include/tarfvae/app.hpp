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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tarfvae/config.hpp"
#include "tarfvae/metrics.hpp"
#include "tarfvae/model.hpp"
#include "tarfvae/training.hpp"

namespace tarfvae::app {

/// Series, chronological splits, stride-1 windows and train-split statistics.
struct PreparedData {
  std::string dataset;
  data::RawSeries series;
  data::Splits splits;
  std::vector<data::WindowSample> train, val, test;
  data::GlobalStats stats;
};

/// Sets config.model.channels from the loaded series.
PreparedData prepare_data(RunConfig& config);

struct TrainOutcome {
  training::TrainResult result;
  std::filesystem::path checkpoint;
  std::filesystem::path log;
};

/// Writes into config.out_dir:
///   config.resolved.cfg  the settings actually used
///   train_log.jsonl      one JSON record per epoch
///   checkpoint.tar       best parameters plus model/data metadata
///   train_summary.json
TrainOutcome run_train(RunConfig config, std::ostream& progress);

/// Restores a model from a checkpoint written by run_train.
model::Tarfvae load_model(const std::filesystem::path& checkpoint);

/// Throws ConfigError listing every model setting that differs, with both values.
void require_compatible(const model::ModelConfig& checkpoint, const model::ModelConfig& config);

/// One report per S: report_S<S>.json, report_S<S>.csv (per window and channel)
/// and bands_S<S>.csv (5/50/95% bands for the first eval.band_windows windows).
std::vector<metrics::EvalReport> run_evaluate(RunConfig config, const std::filesystem::path& checkpoint,
                                              const std::vector<std::size_t>& sample_counts, std::ostream& progress);

/// Forecasts from the last L rows of `input`. Output columns: sample_id,channel,step,value.
ForecastSamples run_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& input,
                            std::size_t samples, std::uint64_t seed, const std::filesystem::path& out_csv);

struct BenchOptions {
  model::ModelConfig model;                 // horizon is replaced per row
  std::optional<std::filesystem::path> checkpoint;  // used for the rows whose H matches it
  std::vector<std::size_t> horizons{96, 192, 336, 720};
  std::vector<std::size_t> samples{1, 200};
  std::size_t repeats = 15;
  std::uint64_t seed = 2026;
};

struct BenchRow {
  std::size_t horizon = 0;
  std::size_t samples = 0;
  double median_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  std::uint64_t encoder_calls = 0;  // during generation; expected 0
  std::uint64_t flow_calls = 0;     // during generation; expected 0
  std::uint64_t decoder_calls = 0;  // per generate call; expected 1
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::optional<double> sample_ratio;   // S=200 / S=1 at H=96
  std::optional<double> horizon_ratio;  // H=720 / H=96 at S=1

  nlohmann::json to_json() const;
  std::string table() const;
};

BenchReport run_bench(const BenchOptions& options);

/// Writes the [synthetic] series of `config` as CSV.
data::RawSeries run_gen_synthetic(const RunConfig& config, const std::filesystem::path& out_csv);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tarfvae::app
