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
#include <optional>
#include <string>
#include <vector>

#include "tarfvae/data.hpp"
#include "tarfvae/model.hpp"
#include "tarfvae/synthetic.hpp"
#include "tarfvae/training.hpp"

namespace tarfvae {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DataSettings {
  std::filesystem::path path;  // empty when the [synthetic] section supplies the series
  std::string name;            // selects split fractions; defaults to the file stem or "synthetic"
  std::size_t lookback = 96;
  std::size_t horizon = 96;
  std::optional<data::SplitSpec> split;  // unset: chosen by dataset name
};

struct EvalSettings {
  std::size_t samples = 200;
  std::vector<double> quantile_levels;  // empty: 0.01 .. 0.99
  std::size_t band_windows = 20;
};

/// Everything a command needs. Parsed from a flat `key = value` file with
/// [data], [synthetic], [model], [train], [eval] and [run] sections.
struct RunConfig {
  DataSettings data;
  std::optional<synthetic::SyntheticSpec> synthetic;
  model::ModelConfig model;  // channels is filled in from the data
  training::TrainConfig train;
  EvalSettings eval;
  std::filesystem::path out_dir = "runs/default";
  std::uint64_t seed = 2026;

  /// Checks ranges and that referenced paths exist.
  void validate() const;
  /// Fully resolved settings in the same file format; parsing it yields an equal config.
  std::string to_text() const;
  data::SplitSpec split_spec() const;
  std::vector<double> quantile_levels() const;
};

/// Unknown sections or keys, duplicates and malformed values raise ConfigError naming the key.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Loads the CSV or generates the synthetic series, and sets model.channels.
data::RawSeries load_series(RunConfig& config);

}  // namespace tarfvae
