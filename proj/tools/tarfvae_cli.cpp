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

// Command-line front end: train, evaluate, predict, bench, selftest, gen-synthetic.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tarfvae/app.hpp"
#include "tarfvae/checkpoint.hpp"
#include "tarfvae/selftest.hpp"

namespace fs = std::filesystem;
using namespace tarfvae;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.train.seed = *c.seed;
  }
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Probabilistic multivariate forecaster: conditional VAE with a transformer flow posterior"};
  cli.require_subcommand(1);

  Common train_opts;
  std::string ablation;
  auto* train = cli.add_subcommand("train", "Train a model and write a checkpoint plus an epoch log");
  train->add_option("--config", train_opts.config, "Run configuration file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_opts.out, "Output directory (overrides run.out_dir)");
  train->add_option("--seed", train_opts.seed, "Root seed (overrides run.seed)");
  train->add_option("--ablation", ablation, "full or no_flow")->check(CLI::IsMember({"full", "no_flow"}));

  Common eval_opts;
  std::string eval_ckpt;
  std::vector<std::size_t> eval_samples;
  auto* evaluate = cli.add_subcommand("evaluate", "Score a checkpoint on the test split");
  evaluate->add_option("--config", eval_opts.config, "Run configuration file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--checkpoint", eval_ckpt, "Checkpoint from train")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval_opts.out, "Output directory (overrides run.out_dir)");
  evaluate->add_option("--seed", eval_opts.seed, "Root seed (overrides run.seed)");
  evaluate->add_option("--samples", eval_samples, "Sample counts, one report each (default: eval.samples)")
      ->delimiter(',');

  std::string pred_ckpt, pred_input, pred_out;
  std::size_t pred_samples = 200;
  std::uint64_t pred_seed = 2026;
  auto* predict = cli.add_subcommand("predict", "Sample forecasts from the last lookback rows of a CSV");
  predict->add_option("--checkpoint", pred_ckpt, "Checkpoint from train")->required()->check(CLI::ExistingFile);
  predict->add_option("--input", pred_input, "CSV with a time column and one column per channel")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--out", pred_out, "Output CSV (sample_id,channel,step,value)")->required();
  predict->add_option("--samples", pred_samples, "Number of sampled trajectories")->capture_default_str();
  predict->add_option("--seed", pred_seed, "Sampling seed")->capture_default_str();

  std::string bench_config, bench_ckpt, bench_out;
  std::vector<std::size_t> bench_h{96, 192, 336, 720}, bench_s{1, 200};
  std::size_t bench_repeats = 15;
  std::uint64_t bench_seed = 2026;
  auto* bench = cli.add_subcommand("bench", "Time one-step generation across horizons and sample counts");
  bench->add_option("--config", bench_config, "Model settings; defaults are used when omitted")
      ->check(CLI::ExistingFile);
  bench->add_option("--checkpoint", bench_ckpt, "Use these weights (and their model settings)")
      ->check(CLI::ExistingFile);
  bench->add_option("--horizons", bench_h, "Horizons to time")->delimiter(',')->capture_default_str();
  bench->add_option("--samples", bench_s, "Sample counts to time")->delimiter(',')->capture_default_str();
  bench->add_option("--repeats", bench_repeats, "Timed calls per cell")->capture_default_str();
  bench->add_option("--seed", bench_seed, "Seed for weights and inputs")->capture_default_str();
  bench->add_option("--out", bench_out, "Directory for bench.json");

  selftest::Options st;
  std::string st_out;
  auto* self = cli.add_subcommand("selftest", "Numerical verification suites");
  self->add_option("--suite", st.suites, "Suites to run (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember(selftest::suite_names()));
  self->add_option("--seed", st.seed, "Seed for the random draws")->capture_default_str();
  self->add_option("--out", st_out, "Write per-suite verdicts as JSON");
  self->add_flag("--corrupt-logdet", st.corrupt_logdet, "Negative control: corrupt the log-det ledger")
      ->group("");

  Common gen_opts;
  auto* gen = cli.add_subcommand("gen-synthetic", "Write the [synthetic] series of a config as CSV");
  gen->add_option("--config", gen_opts.config, "Run configuration with a [synthetic] section")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--out", gen_opts.out, "Output CSV")->required();
  gen->add_option("--seed", gen_opts.seed, "Series seed (overrides synthetic.seed)");

  CLI11_PARSE(cli, argc, argv);

  try {
    if (*train) {
      RunConfig cfg = resolve(train_opts);
      if (!ablation.empty()) cfg.train.ablation = training::ablation_from_string(ablation);
      const app::TrainOutcome r = app::run_train(cfg, std::cout);
      return r.result.diverged && r.result.log.empty() ? kExitFailure : 0;
    }
    if (*evaluate) {
      RunConfig cfg = resolve(eval_opts);
      if (eval_samples.empty()) eval_samples.push_back(cfg.eval.samples);
      for (std::size_t s : eval_samples)
        if (s < 2) throw ConfigError("--samples values must be >= 2");
      app::run_evaluate(cfg, eval_ckpt, eval_samples, std::cout);
      return 0;
    }
    if (*predict) {
      const ForecastSamples fc = app::run_predict(pred_ckpt, pred_input, pred_samples, pred_seed, pred_out);
      std::cout << "wrote " << fc.samples << " x " << fc.channels << " x " << fc.horizon << " samples to " << pred_out
                << '\n';
      return 0;
    }
    if (*bench) {
      app::BenchOptions opt;
      opt.horizons = bench_h;
      opt.samples = bench_s;
      opt.repeats = bench_repeats;
      opt.seed = bench_seed;
      if (!bench_config.empty()) {
        RunConfig cfg = load_config(bench_config);
        cfg.validate();
        load_series(cfg);
        opt.model = cfg.model;
      }
      if (!bench_ckpt.empty()) {
        opt.checkpoint = bench_ckpt;
        opt.model = model::ModelConfig::from_json(read_checkpoint(bench_ckpt).meta.config.at("model"));
      }
      const app::BenchReport report = app::run_bench(opt);
      std::cout << "C=" << opt.model.channels << " L=" << opt.model.lookback << " D=" << opt.model.latent
                << " K=" << opt.model.flow_blocks << '\n'
                << report.table();
      if (!bench_out.empty()) app::write_text(fs::path(bench_out) / "bench.json", report.to_json().dump(2) + "\n");
      return 0;
    }
    if (*self) {
      const auto results = selftest::run(st);
      bool ok = true;
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  worst " << r.worst << " (tol " << r.tolerance
                  << ", " << r.cases << " cases, " << r.seconds << " s)" << (r.detail.empty() ? "" : "  " + r.detail)
                  << '\n';
        ok = ok && r.passed;
        j.push_back(r.to_json());
      }
      if (!st_out.empty()) app::write_text(st_out, j.dump(2) + "\n");
      std::cout << (ok ? "selftest passed" : "selftest FAILED") << '\n';
      return ok ? 0 : kExitFailure;
    }
    if (*gen) {
      RunConfig cfg = load_config(gen_opts.config);
      if (!cfg.synthetic) throw ConfigError("gen-synthetic needs a [synthetic] section in the config");
      if (gen_opts.seed) cfg.synthetic->seed = *gen_opts.seed;
      const data::RawSeries s = app::run_gen_synthetic(cfg, gen_opts.out);
      std::cout << "wrote " << s.length() << " steps x " << s.channels() << " channels to " << gen_opts.out << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
