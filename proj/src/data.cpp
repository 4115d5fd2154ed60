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

#include "tarfvae/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace tarfvae::data {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_real(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

RawSeries RawSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > length()) throw DataError("slice out of range");
  RawSeries out;
  out.channel_names = channel_names;
  out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                        timestamps.begin() + static_cast<std::ptrdiff_t>(end));
  out.values = NdArray::matrix(channels(), end - begin);
  for (std::size_t c = 0; c < channels(); ++c)
    for (std::size_t t = begin; t < end; ++t) out.values(c, t - begin) = values(c, t);
  return out;
}

RawSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset '" + path.string() + "' is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw DataError("header needs a time column and at least one channel");
  const std::size_t channels = header.size() - 1;

  RawSeries series;
  for (std::size_t c = 1; c < header.size(); ++c) series.channel_names.push_back(trim(header[c]));
  std::vector<std::vector<double>> columns(channels);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != channels + 1) {
      throw DataError("row " + std::to_string(row + 1) + " has " + std::to_string(cells.size()) +
                      " columns, expected " + std::to_string(channels + 1));
    }
    series.timestamps.push_back(trim(cells[0]));
    for (std::size_t c = 0; c < channels; ++c) {
      double v = 0.0;
      if (!parse_real(cells[c + 1], v)) {
        throw DataError("row " + std::to_string(row + 1) + ", column " + std::to_string(c + 1) + " ('" +
                        series.channel_names[c] + "'): non-numeric value '" + cells[c + 1] + "'");
      }
      columns[c].push_back(v);
    }
    ++row;
  }
  if (row < 2) throw DataError("dataset needs at least 2 rows, found " + std::to_string(row));
  series.values = NdArray::matrix(channels, row);
  for (std::size_t c = 0; c < channels; ++c)
    std::copy(columns[c].begin(), columns[c].end(), series.values.row(c).begin());
  return series;
}

void write_csv(const std::filesystem::path& path, const RawSeries& series) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "date";
  for (std::size_t c = 0; c < series.channels(); ++c) {
    out << ',' << (c < series.channel_names.size() ? series.channel_names[c] : "ch" + std::to_string(c));
  }
  out << '\n' << std::setprecision(17);
  for (std::size_t t = 0; t < series.length(); ++t) {
    out << (t < series.timestamps.size() ? series.timestamps[t] : std::to_string(t));
    for (std::size_t c = 0; c < series.channels(); ++c) out << ',' << series.values(c, t);
    out << '\n';
  }
}

SplitSpec SplitSpec::for_dataset(const std::string& dataset_name) {
  if (dataset_name.rfind("ETT", 0) == 0) return {0.6, 0.2, 0.2};
  return {0.7, 0.1, 0.2};
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, val_fraction, test_fraction}) {
    if (!(f > 0.0 && f < 1.0)) throw DataError("split fractions must lie in (0, 1)");
  }
  const double total = train_fraction + val_fraction + test_fraction;
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "split fractions sum to " << total << ", expected 1";
    throw DataError(os.str());
  }
}

Splits chronological_split(const RawSeries& series, const SplitSpec& spec, std::size_t lookback,
                           std::size_t horizon) {
  spec.validate();
  const std::size_t T = series.length();
  const auto train_end = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(T)));
  const auto val_len = static_cast<std::size_t>(std::floor(spec.val_fraction * static_cast<double>(T)));
  const std::size_t val_end = std::min(T, train_end + val_len);
  const std::size_t need = lookback + horizon;

  Splits s;
  s.bounds.train_begin = 0;
  s.bounds.train_end = train_end;
  s.bounds.val_begin = train_end >= lookback ? train_end - lookback : 0;
  s.bounds.val_end = val_end;
  s.bounds.test_begin = val_end >= lookback ? val_end - lookback : 0;
  s.bounds.test_end = T;

  const auto check = [&](const char* name, std::size_t begin, std::size_t end) {
    if (end - begin < need) {
      throw DataError(std::string(name) + " segment has " + std::to_string(end - begin) +
                      " steps; need at least L+H = " + std::to_string(need));
    }
  };
  check("train", s.bounds.train_begin, s.bounds.train_end);
  check("val", s.bounds.val_begin, s.bounds.val_end);
  check("test", s.bounds.test_begin, s.bounds.test_end);

  s.train = series.slice(s.bounds.train_begin, s.bounds.train_end);
  s.val = series.slice(s.bounds.val_begin, s.bounds.val_end);
  s.test = series.slice(s.bounds.test_begin, s.bounds.test_end);
  return s;
}

std::vector<WindowSample> make_windows(const RawSeries& series, std::size_t lookback, std::size_t horizon,
                                       std::size_t stride, ShortSeries on_short) {
  if (lookback == 0 || horizon == 0 || stride == 0) throw DataError("L, H and stride must be positive");
  const std::size_t T = series.length();
  const std::size_t C = series.channels();
  if (T < lookback + horizon) {
    const std::string msg = "series of length " + std::to_string(T) + " is shorter than L+H = " +
                            std::to_string(lookback + horizon);
    if (on_short == ShortSeries::Error) throw DataError(msg);
    std::cerr << "warning: " << msg << "; no windows produced\n";
    return {};
  }
  std::vector<WindowSample> windows;
  windows.reserve((T - lookback - horizon) / stride + 1);
  for (std::size_t start = 0; start + lookback + horizon <= T; start += stride) {
    WindowSample w{NdArray::matrix(C, lookback), NdArray::matrix(C, horizon)};
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t t = 0; t < lookback; ++t) w.x(c, t) = series.values(c, start + t);
      for (std::size_t t = 0; t < horizon; ++t) w.y(c, t) = series.values(c, start + lookback + t);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

Normalized instance_normalize(const NdArray& x, const NdArray* y, double eps) {
  const std::size_t C = x.rows();
  const std::size_t L = x.cols();
  if (y && y->rows() != C) throw ShapeError("y has " + std::to_string(y->rows()) + " channels, x has " + std::to_string(C));
  Normalized out{NdArray::matrix(C, L), std::nullopt, {std::vector<double>(C), std::vector<double>(C)}};
  for (std::size_t c = 0; c < C; ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < L; ++t) mean += x(c, t);
    mean /= static_cast<double>(L);
    double var = 0.0;
    for (std::size_t t = 0; t < L; ++t) var += (x(c, t) - mean) * (x(c, t) - mean);
    var /= static_cast<double>(L);
    out.stats.mu[c] = mean;
    out.stats.sigma[c] = std::max(std::sqrt(var), eps);
    for (std::size_t t = 0; t < L; ++t) out.x(c, t) = (x(c, t) - mean) / out.stats.sigma[c];
  }
  if (y) {
    NdArray yn = NdArray::matrix(C, y->cols());
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t t = 0; t < y->cols(); ++t) yn(c, t) = ((*y)(c, t) - out.stats.mu[c]) / out.stats.sigma[c];
    out.y = std::move(yn);
  }
  return out;
}

NdArray denormalize(const NdArray& yhat_norm, const NormStats& stats) {
  const std::size_t C = yhat_norm.rows();
  if (stats.mu.size() != C || stats.sigma.size() != C) {
    throw ShapeError("denormalize: " + std::to_string(C) + " channels but stats for " +
                     std::to_string(stats.mu.size()));
  }
  NdArray out = NdArray::matrix(C, yhat_norm.cols());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < yhat_norm.cols(); ++t) out(c, t) = yhat_norm(c, t) * stats.sigma[c] + stats.mu[c];
  return out;
}

GlobalStats GlobalStats::from_series(const RawSeries& train) {
  const Normalized n = instance_normalize(train.values, nullptr, kNormEps);
  return {n.stats.mu, n.stats.sigma};
}

NdArray GlobalStats::standardize(const NdArray& values) const {
  const std::size_t C = values.rows();
  if (mu.size() != C) throw ShapeError("standardize: channel count mismatch");
  NdArray out = NdArray::matrix(C, values.cols());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < values.cols(); ++t) out(c, t) = (values(c, t) - mu[c]) / sigma[c];
  return out;
}

}  // namespace tarfvae::data
