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
#include <string>
#include <vector>

#include <json.hpp>

namespace tarfvae::selftest {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed error
  double tolerance = 0.0;
  std::size_t cases = 0;
  double seconds = 0.0;
  std::string detail;

  nlohmann::json to_json() const;
};

struct Options {
  std::vector<std::string> suites;  // empty: all of them
  std::uint64_t seed = 20261018;
  /// Negative control: halves the flow's log-det ledger so the logdet suite must fail.
  bool corrupt_logdet = false;
};

/// logdet, invertibility, loss_oracle, gradcheck, crps, normalization
const std::vector<std::string>& suite_names();

/// Runs each requested suite in 64-bit mode. Unknown names raise Error.
std::vector<SuiteResult> run(const Options& options);

}  // namespace tarfvae::selftest
