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

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "tarfvae/checkpoint.hpp"
#include "tarfvae/model.hpp"
#include "test_support.hpp"

using namespace tarfvae;

TEST_SUITE("nn_core") {

TEST_CASE("checkpoint round trip is bit-exact") {
  model::ModelConfig cfg;
  cfg.channels = 2;
  cfg.lookback = 8;
  cfg.horizon = 4;
  cfg.latent = 4;
  cfg.flow_blocks = 2;
  cfg.heads = 2;
  model::Tarfvae m(cfg, 5);
  m.params().round_to_f32();
  const auto path = testing::scratch_dir("ckpt") / "model.tar";
  save_checkpoint(path, m.params(), CheckpointMeta{cfg.to_json(), 17, 0.25});

  const Checkpoint ck = read_checkpoint(path);
  CHECK(ck.meta.step == 17);
  CHECK(ck.meta.val_score == 0.25);
  CHECK(model::ModelConfig::from_json(ck.meta.config).horizon == 4);
  REQUIRE(ck.params.size() == m.params().size());
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    CHECK(ck.params[i].first == m.params().entries()[i].first);
    CHECK(testing::bit_equal(ck.params[i].second, m.params().entries()[i].second.value()));
  }

  model::Tarfvae other(cfg, 99);
  load_checkpoint_into(other.params(), ck);
  for (std::size_t i = 0; i < ck.params.size(); ++i)
    CHECK(testing::bit_equal(other.params().entries()[i].second.value(), m.params().entries()[i].second.value()));

  // Saving the reloaded store reproduces the same bytes.
  const auto path2 = path.parent_path() / "again.tar";
  save_checkpoint(path2, other.params(), CheckpointMeta{cfg.to_json(), 17, 0.25});
  std::stringstream a, b;
  a << std::ifstream(path, std::ios::binary).rdbuf();
  b << std::ifstream(path2, std::ios::binary).rdbuf();
  CHECK(a.str() == b.str());
}

TEST_CASE("checkpoint manifest lists name, shape, dtype and offset") {
  ParamStore s;
  s.add("a", NdArray::from_rows({{1, 2, 3}, {4, 5, 6}}));
  s.add("b", NdArray::from_rows({{0.5}}));
  const auto path = testing::scratch_dir("ckpt_manifest") / "m.tar";
  save_checkpoint(path, s, {});
  std::stringstream raw;
  raw << std::ifstream(path, std::ios::binary).rdbuf();
  const std::string bytes = raw.str();
  CHECK(bytes.find("a 2x3 f32 0\nb 1x1 f32 24\n") != std::string::npos);
  CHECK(bytes.find("manifest.txt") != std::string::npos);
  CHECK(bytes.find("params.bin") != std::string::npos);
  CHECK(bytes.find("meta.json") != std::string::npos);
}

TEST_CASE("checkpoint mismatches are rejected") {
  ParamStore s;
  s.add("a", NdArray::matrix(2, 2, 1.0));
  const auto path = testing::scratch_dir("ckpt_bad") / "m.tar";
  save_checkpoint(path, s, {});
  const Checkpoint ck = read_checkpoint(path);

  ParamStore wrong_shape;
  wrong_shape.add("a", NdArray::matrix(2, 3));
  CHECK_THROWS_AS(load_checkpoint_into(wrong_shape, ck), Error);
  ParamStore wrong_name;
  wrong_name.add("b", NdArray::matrix(2, 2));
  CHECK_THROWS_AS(load_checkpoint_into(wrong_name, ck), Error);
  CHECK_THROWS_AS(read_checkpoint(path.parent_path() / "missing.tar"), Error);
}

}  // TEST_SUITE
