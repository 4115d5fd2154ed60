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
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tarfvae/param_store.hpp"

namespace tarfvae {

struct CheckpointMeta {
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t step = 0;
  double val_score = 0.0;
};

struct Checkpoint {
  std::vector<std::pair<std::string, NdArray>> params;
  CheckpointMeta meta;
};

/// Writes a ustar archive with three members:
///   manifest.txt  one line per parameter: "<name> <d0>x<d1>... f32 <byte offset>"
///   params.bin    little-endian binary32 values, row-major, in manifest order
///   meta.json     {"config": ..., "step": ..., "val_score": ...}
void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const CheckpointMeta& meta);

Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint values into `params`; names, order and shapes must match.
void load_checkpoint_into(ParamStore& params, const Checkpoint& ckpt);

}  // namespace tarfvae
