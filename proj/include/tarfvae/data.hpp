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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tarfvae/ndarray.hpp"

namespace tarfvae::data {

class DataError : public Error {
 public:
  using Error::Error;
};

/// C channels observed at T time steps.
struct RawSeries {
  std::vector<std::string> timestamps;
  std::vector<std::string> channel_names;
  NdArray values;  // C x T

  std::size_t channels() const { return values.rows(); }
  std::size_t length() const { return values.cols(); }
  /// Steps [begin, end).
  RawSeries slice(std::size_t begin, std::size_t end) const;
};

/// Header row, then `time,<v_1>,...,<v_C>` per row. Errors number data rows
/// from 1 (the first line after the header).
RawSeries load_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const RawSeries& series);

struct SplitSpec {
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  double test_fraction = 0.2;

  /// 0.6/0.2/0.2 for ETT-family names (ETTh1, ETTm2, ...), else 0.7/0.1/0.2.
  static SplitSpec for_dataset(const std::string& dataset_name);
  void validate() const;
};

struct SplitBounds {
  std::size_t train_begin = 0, train_end = 0;
  std::size_t val_begin = 0, val_end = 0;
  std::size_t test_begin = 0, test_end = 0;
};

struct Splits {
  RawSeries train, val, test;
  SplitBounds bounds;
};

/// Train is the first floor(train_fraction*T) steps; val and test each start
/// `lookback` steps early so their first lookback window exists.
Splits chronological_split(const RawSeries& series, const SplitSpec& spec, std::size_t lookback, std::size_t horizon);

struct WindowSample {
  NdArray x;  // C x L
  NdArray y;  // C x H
};

enum class ShortSeries { Error, Empty };

/// All windows at the given stride; window i covers x = [i*stride, i*stride+L)
/// and y = [i*stride+L, i*stride+L+H).
std::vector<WindowSample> make_windows(const RawSeries& series, std::size_t lookback, std::size_t horizon,
                                       std::size_t stride = 1, ShortSeries on_short = ShortSeries::Error);

struct NormStats {
  std::vector<double> mu;
  std::vector<double> sigma;
};

struct Normalized {
  NdArray x;
  std::optional<NdArray> y;
  NormStats stats;
};

inline constexpr double kNormEps = 1e-5;

/// Per-channel standardization by the lookback's own mean and population std
/// (floored at eps). `y`, when given, is scaled with x's statistics.
Normalized instance_normalize(const NdArray& x, const NdArray* y = nullptr, double eps = kNormEps);

/// yhat_norm * sigma + mu, per channel. Accepts C x H.
NdArray denormalize(const NdArray& yhat_norm, const NormStats& stats);

/// Per-channel mean/std over the train split, used for metric-scale standardization.
struct GlobalStats {
  std::vector<double> mu;
  std::vector<double> sigma;

  static GlobalStats from_series(const RawSeries& train);
  /// (v - mu) / sigma per channel for a C x N array.
  NdArray standardize(const NdArray& values) const;
};

}  // namespace tarfvae::data
