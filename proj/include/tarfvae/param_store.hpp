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

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tarfvae/autodiff.hpp"

namespace tarfvae {

/// Named learnable arrays. Iteration follows insertion order.
class ParamStore {
 public:
  using Entry = std::pair<std::string, ad::Var>;

  /// Registers a new parameter; names must be unique.
  ad::Var add(const std::string& name, NdArray init);
  const ad::Var& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  std::vector<NdArray> snapshot() const;
  void restore(const std::vector<NdArray>& values);
  /// Rounds every parameter to binary32.
  void round_to_f32();
  bool all_finite() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace tarfvae
