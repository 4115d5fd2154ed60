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

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tarfvae {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf escaped a primitive. `op()` names the producer.
class NumericError : public Error {
 public:
  NumericError(std::string op, const std::string& detail)
      : Error("non-finite value produced by '" + op + "': " + detail), op_(std::move(op)) {}
  const std::string& op() const noexcept { return op_; }

 private:
  std::string op_;
};

enum class Precision { F32, F64 };

const char* to_string(Precision p);
Precision precision_from_string(const std::string& s);

/// Dense row-major array of reals. Values are held as doubles; in F32 mode
/// every producing op rounds its output to the nearest binary32 value.
class NdArray {
 public:
  NdArray() = default;
  explicit NdArray(std::vector<std::size_t> shape, double fill = 0.0);
  NdArray(std::vector<std::size_t> shape, std::vector<double> data);

  /// 2-D convenience constructor from nested rows.
  static NdArray from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static NdArray matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return NdArray({rows, cols}, fill);
  }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t ndim() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t rows() const;
  std::size_t cols() const;

  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() & noexcept { return data_; }
  std::span<const double> data() const& noexcept { return data_; }
  // A span into a temporary would dangle once the full expression ends.
  std::span<const double> data() && = delete;
  std::span<const double> data() const&& = delete;
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  std::span<const double> row(std::size_t r) const { return data().subspan(r * shape_[1], shape_[1]); }
  std::span<double> row(std::size_t r) { return data().subspan(r * shape_[1], shape_[1]); }

  bool same_shape(const NdArray& other) const noexcept { return shape_ == other.shape_; }
  std::string shape_str() const;

  /// Rounds every value to binary32 in place.
  void round_to_f32();
  bool all_finite() const noexcept;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_to_string(const std::vector<std::size_t>& shape);

}  // namespace tarfvae
