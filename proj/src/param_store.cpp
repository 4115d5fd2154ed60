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

#include "tarfvae/param_store.hpp"

namespace tarfvae {

ad::Var ParamStore::add(const std::string& name, NdArray init) {
  if (contains(name)) throw Error("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, ad::Var::parameter(std::move(init)));
  return entries_.back().second;
}

const ad::Var& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, var] : entries_) n += var.value().size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, var] : entries_) var.zero_grad();
}

std::vector<NdArray> ParamStore::snapshot() const {
  std::vector<NdArray> out;
  out.reserve(entries_.size());
  for (const auto& [name, var] : entries_) out.push_back(var.value());
  return out;
}

void ParamStore::restore(const std::vector<NdArray>& values) {
  if (values.size() != entries_.size()) throw ShapeError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& var = entries_[i].second;
    if (!values[i].same_shape(var.value())) {
      throw ShapeError("restore: shape mismatch for '" + entries_[i].first + "'");
    }
    var.mutable_value() = values[i];
  }
}

void ParamStore::round_to_f32() {
  for (auto& [name, var] : entries_) var.mutable_value().round_to_f32();
}

bool ParamStore::all_finite() const {
  for (const auto& [name, var] : entries_) {
    if (!var.value().all_finite()) return false;
  }
  return true;
}

}  // namespace tarfvae
