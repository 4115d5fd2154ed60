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

#include "tarfvae/app.hpp"
#include "tarfvae/checkpoint.hpp"
#include "tarfvae/selftest.hpp"
#include "test_support.hpp"

using namespace tarfvae;

namespace {

const char* kSmall = R"(# tiny synthetic run
[synthetic]
kind = ar1
length = 600
channels = 2

[data]
lookback = 24
horizon = 8

[model]
latent = 4
flow_blocks = 2
heads = 2

[train]
max_epochs = 2
max_batches_per_epoch = 4
max_val_windows = 8
val_sample_count = 4

[eval]
samples = 20
band_windows = 2

[run]
seed = 11
)";

RunConfig small_config(const std::filesystem::path& out) {
  RunConfig c = parse_config(kSmall);
  c.out_dir = out;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "t.cfg").validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config: sections and keys are parsed") {
  const RunConfig c = parse_config(kSmall);
  REQUIRE(c.synthetic);
  CHECK(c.synthetic->length == 600);
  CHECK(c.synthetic->seed == 11);  // inherits run.seed
  CHECK(c.data.lookback == 24);
  CHECK(c.model.horizon == 8);
  CHECK(c.model.latent == 4);
  CHECK(c.train.max_batches_per_epoch == 4);
  CHECK(c.train.seed == 11);
  CHECK(c.eval.samples == 20);
  CHECK(c.split_spec().train_fraction == 0.7);
  CHECK(c.quantile_levels().size() == 99);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config: errors name the offending key") {
  CHECK(error_of("[model]\nlatnet = 4\n").find("model.latnet") != std::string::npos);
  CHECK(error_of("[model]\nlatnet = 4\n").find("t.cfg:2") != std::string::npos);
  CHECK(error_of("[modle]\n").find("unknown section 'modle'") != std::string::npos);
  CHECK(error_of("[train]\nlr = fast\n").find("train.lr") != std::string::npos);
  CHECK(error_of("[train]\nbatch_size = -3\n").find("train.batch_size") != std::string::npos);
  CHECK(error_of("[run]\nseed = 1\nseed = 2\n").find("duplicate key 'run.seed'") != std::string::npos);
  CHECK(error_of("lr = 1\n").find("outside of any section") != std::string::npos);
  CHECK(error_of("[train]\nablation = half\n").find("train.ablation") != std::string::npos);
  CHECK(error_of("[run]\nseed = 1\n").find("data.path") != std::string::npos);
  CHECK(error_of("[data]\npath = /nonexistent/x.csv\n").find("does not exist") != std::string::npos);
  CHECK(error_of("[synthetic]\n[model]\nlatent = 6\nheads = 4\n").find("not divisible") != std::string::npos);
  CHECK(error_of("[synthetic]\n[eval]\nquantile_levels = 0.5,0.2\n").find("ascending") != std::string::npos);
}

TEST_CASE("config: the resolved snapshot parses back to the same settings") {
  RunConfig c = parse_config(kSmall);
  c.out_dir = "somewhere/else";
  const std::string text = c.to_text();
  const RunConfig again = parse_config(text);
  CHECK(again.to_text() == text);
  CHECK(again.out_dir == c.out_dir);
  CHECK(again.train.to_json() == c.train.to_json());
}

TEST_CASE("train writes a log, a snapshot and a checkpoint; the snapshot reproduces the run") {
  const auto dir = testing::scratch_dir("cli_train");
  std::ostringstream progress;
  const app::TrainOutcome a = app::run_train(small_config(dir / "a"), progress);
  CHECK(progress.str().find("epoch   1") != std::string::npos);

  std::ifstream log(a.log);
  std::size_t lines = 0;
  for (std::string line; std::getline(log, line); ++lines) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("epoch").get<std::size_t>() == lines + 1);
    CHECK(j.at("train_loss").contains("logdet_term"));
    CHECK(j.contains("val_score"));
  }
  CHECK(lines == 2);
  CHECK(std::filesystem::exists(dir / "a" / "train_summary.json"));

  RunConfig replay = load_config(dir / "a" / "config.resolved.cfg");
  replay.out_dir = dir / "b";
  app::run_train(replay, progress);
  // The archives differ only in the recorded out_dir; weights and scores match bit for bit.
  const Checkpoint ca = read_checkpoint(dir / "a" / "checkpoint.tar");
  const Checkpoint cb = read_checkpoint(dir / "b" / "checkpoint.tar");
  REQUIRE(ca.params.size() == cb.params.size());
  for (std::size_t i = 0; i < ca.params.size(); ++i) {
    CHECK(ca.params[i].first == cb.params[i].first);
    CHECK(testing::bit_equal(ca.params[i].second, cb.params[i].second));
  }
  CHECK(ca.meta.step == cb.meta.step);
  CHECK(ca.meta.val_score == cb.meta.val_score);
  CHECK(slurp(dir / "a" / "train_log.jsonl").size() > 0);
}

TEST_CASE("evaluate writes one report per S and rejects a mismatched checkpoint") {
  const auto dir = testing::scratch_dir("cli_eval");
  std::ostringstream progress;
  const auto ckpt = app::run_train(small_config(dir), progress).checkpoint;
  const auto reports = app::run_evaluate(small_config(dir), ckpt, {20, 50}, progress);
  REQUIRE(reports.size() == 2);
  CHECK(reports[1].samples == 50);
  for (const char* f : {"report_S20.json", "report_S20.csv", "bands_S20.csv", "report_S50.json"})
    CHECK(std::filesystem::exists(dir / f));
  const auto j = nlohmann::json::parse(slurp(dir / "report_S50.json"));
  CHECK(j.at("S") == 50);
  CHECK(j.at("crps").get<double>() > 0.0);

  RunConfig other = small_config(dir);
  other.data.horizon = 12;
  other.model.horizon = 12;
  std::string msg;
  try {
    app::run_evaluate(other, ckpt, {20}, progress);
  } catch (const ConfigError& e) {
    msg = e.what();
  }
  CHECK(msg.find("horizon: checkpoint 8, config 12") != std::string::npos);
}

TEST_CASE("predict emits S*C*H rows from the last lookback window") {
  const auto dir = testing::scratch_dir("cli_predict");
  std::ostringstream progress;
  RunConfig cfg = small_config(dir);
  const auto ckpt = app::run_train(cfg, progress).checkpoint;
  app::run_gen_synthetic(cfg, dir / "series.csv");
  const ForecastSamples fc = app::run_predict(ckpt, dir / "series.csv", 3, 9, dir / "pred.csv");

  std::ifstream in(dir / "pred.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "sample_id,channel,step,value");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3 * 2 * 8);
  CHECK(fc.samples == 3);

  // Same seed, same rows.
  app::run_predict(ckpt, dir / "series.csv", 3, 9, dir / "pred2.csv");
  CHECK(slurp(dir / "pred.csv") == slurp(dir / "pred2.csv"));
}

TEST_CASE("bench reports one decoder pass and no encoder or flow work") {
  app::BenchOptions opt;
  opt.model.channels = 2;
  opt.model.lookback = 16;
  opt.model.latent = 8;
  opt.model.flow_blocks = 2;
  opt.model.heads = 2;
  opt.horizons = {96, 720};
  opt.samples = {1, 200};
  opt.repeats = 3;
  const app::BenchReport r = app::run_bench(opt);
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) {
    CHECK(row.encoder_calls == 0);
    CHECK(row.flow_calls == 0);
    CHECK(row.decoder_calls == 1);
    CHECK(row.median_ms > 0.0);
  }
  CHECK(r.sample_ratio.has_value());
  CHECK(r.horizon_ratio.has_value());
  CHECK(r.table().find("H=720 / H=96") != std::string::npos);
}

TEST_CASE("selftest passes, and the corrupted log-det ledger is caught") {
  const auto all = selftest::run({});
  CHECK(all.size() == selftest::suite_names().size());
  for (const auto& r : all) {
    CAPTURE(r.name);
    CAPTURE(r.worst);
    CHECK(r.passed);
  }
  selftest::Options bad;
  bad.suites = {"logdet"};
  bad.corrupt_logdet = true;
  const auto neg = selftest::run(bad);
  REQUIRE(neg.size() == 1);
  CHECK_FALSE(neg[0].passed);
  CHECK_THROWS_AS(selftest::run({{"nope"}, 1, false}), Error);
}

}  // TEST_SUITE
