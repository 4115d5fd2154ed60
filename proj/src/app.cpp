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

#include "tarfvae/app.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tarfvae/checkpoint.hpp"
#include "tarfvae/rng.hpp"

namespace tarfvae::app {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvalStream = 0x6576616c;  // "eval"

std::string dataset_name(const RunConfig& c) {
  if (!c.data.name.empty()) return c.data.name;
  return c.data.path.empty() ? "synthetic" : c.data.path.stem().string();
}

template <typename T>
std::string json_scalar(const T& v) {
  return nlohmann::json(v).dump();
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

PreparedData prepare_data(RunConfig& config) {
  PreparedData p;
  p.dataset = dataset_name(config);
  p.series = load_series(config);
  const std::size_t L = config.data.lookback, H = config.data.horizon;
  p.splits = data::chronological_split(p.series, config.split_spec(), L, H);
  p.train = data::make_windows(p.splits.train, L, H);
  p.val = data::make_windows(p.splits.val, L, H);
  p.test = data::make_windows(p.splits.test, L, H);
  p.stats = data::GlobalStats::from_series(p.splits.train);
  return p;
}

TrainOutcome run_train(RunConfig config, std::ostream& progress) {
  config.validate();
  PreparedData d = prepare_data(config);
  config.model.validate();
  fs::create_directories(config.out_dir);
  write_text(config.out_dir / "config.resolved.cfg", config.to_text());

  progress << "dataset " << d.dataset << ": " << d.series.length() << " steps x " << d.series.channels()
           << " channels; windows train " << d.train.size() << ", val " << d.val.size() << ", test " << d.test.size()
           << '\n';

  model::Tarfvae model(config.model, config.seed);
  TrainOutcome out;
  out.log = config.out_dir / "train_log.jsonl";
  out.checkpoint = config.out_dir / "checkpoint.tar";
  std::ofstream log(out.log);
  if (!log) throw Error("cannot write '" + out.log.string() + "'");

  out.result = training::train(model, d.train, d.val, d.stats, config.train, [&](const training::EpochRecord& e) {
    log << e.to_json().dump() << '\n' << std::flush;
    progress << "epoch " << std::setw(3) << e.epoch << "  loss " << std::setprecision(6) << e.train_loss.total
             << "  val " << e.val_score << "  (" << std::setprecision(3) << e.wall_seconds << " s)\n"
             << std::flush;
  });
  if (out.result.diverged) progress << "training diverged: " << out.result.divergence << '\n';

  CheckpointMeta meta;
  meta.config = {{"model", config.model.to_json()},
                 {"dataset", d.dataset},
                 {"train", config.train.to_json()},
                 {"global_stats", {{"mu", d.stats.mu}, {"sigma", d.stats.sigma}}},
                 {"resolved_config", config.to_text()}};
  meta.step = out.result.steps;
  meta.val_score = out.result.best_score;
  save_checkpoint(out.checkpoint, model.params(), meta);

  const nlohmann::json summary = {{"dataset", d.dataset},
                                  {"epochs", out.result.log.size()},
                                  {"best_epoch", out.result.best_epoch},
                                  {"best_val_score", out.result.best_score},
                                  {"steps", out.result.steps},
                                  {"diverged", out.result.diverged},
                                  {"divergence", out.result.divergence},
                                  {"ablation", training::to_string(config.train.ablation)}};
  write_text(config.out_dir / "train_summary.json", summary.dump(2) + "\n");
  progress << "best val " << out.result.best_score << " at epoch " << out.result.best_epoch << "; checkpoint "
           << out.checkpoint.string() << '\n';
  return out;
}

model::Tarfvae load_model(const fs::path& checkpoint) {
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  if (!ckpt.meta.config.contains("model")) throw Error("checkpoint '" + checkpoint.string() + "' has no model config");
  model::Tarfvae m(model::ModelConfig::from_json(ckpt.meta.config.at("model")), 0);
  load_checkpoint_into(m.params(), ckpt);
  return m;
}

void require_compatible(const model::ModelConfig& checkpoint, const model::ModelConfig& config) {
  const nlohmann::json a = checkpoint.to_json(), b = config.to_json();
  std::string diffs;
  for (const auto& [key, value] : a.items()) {
    if (b.contains(key) && b.at(key) != value) {
      diffs += "\n  " + key + ": checkpoint " + json_scalar(value) + ", config " + json_scalar(b.at(key));
    }
  }
  if (!diffs.empty()) throw ConfigError("checkpoint does not match the config:" + diffs);
}

std::vector<metrics::EvalReport> run_evaluate(RunConfig config, const fs::path& checkpoint,
                                              const std::vector<std::size_t>& sample_counts, std::ostream& progress) {
  config.validate();
  if (!fs::exists(checkpoint)) throw ConfigError("checkpoint '" + checkpoint.string() + "' does not exist");
  PreparedData d = prepare_data(config);
  const model::Tarfvae model = load_model(checkpoint);
  require_compatible(model.config(), config.model);
  fs::create_directories(config.out_dir);
  write_text(config.out_dir / "config.resolved.cfg", config.to_text());

  std::vector<metrics::EvalReport> reports;
  for (std::size_t S : sample_counts) {
    const auto start = std::chrono::steady_clock::now();
    metrics::EvalOptions opt;
    opt.dataset = d.dataset;
    opt.samples = S;
    opt.qlevels = config.quantile_levels();
    opt.seed = derive_seed(config.seed, kEvalStream);
    opt.band_windows = config.eval.band_windows;
    metrics::EvalReport r = metrics::evaluate_dataset(model, d.test, d.stats, opt);
    const std::string tag = "S" + std::to_string(S);
    metrics::write_report_json(config.out_dir / ("report_" + tag + ".json"), r);
    metrics::write_report_csv(config.out_dir / ("report_" + tag + ".csv"), r);
    metrics::write_bands_csv(config.out_dir / ("bands_" + tag + ".csv"), r);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    progress << d.dataset << " H=" << r.horizon << " S=" << S << "  MSE " << std::setprecision(6) << r.mse << "  MAE "
             << r.mae << "  CRPS " << r.crps << "  (" << r.windows << " windows, " << std::setprecision(3) << secs
             << " s)\n";
    reports.push_back(std::move(r));
  }
  return reports;
}

ForecastSamples run_predict(const fs::path& checkpoint, const fs::path& input, std::size_t samples, std::uint64_t seed,
                            const fs::path& out_csv) {
  if (samples < 1) throw ConfigError("--samples must be >= 1");
  const model::Tarfvae model = load_model(checkpoint);
  const auto& cfg = model.config();
  const data::RawSeries series = data::load_csv(input);
  if (series.channels() != cfg.channels) {
    throw ConfigError("input has " + std::to_string(series.channels()) + " channels, checkpoint expects " +
                      std::to_string(cfg.channels));
  }
  if (series.length() < cfg.lookback) {
    throw ConfigError("input has " + std::to_string(series.length()) + " rows, lookback needs " +
                      std::to_string(cfg.lookback));
  }
  NdArray x = NdArray::matrix(cfg.channels, cfg.lookback);
  const std::size_t first = series.length() - cfg.lookback;
  for (std::size_t c = 0; c < cfg.channels; ++c)
    for (std::size_t t = 0; t < cfg.lookback; ++t) x(c, t) = series.values(c, first + t);

  const ForecastSamples fc = model.generate(x, samples, seed);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  std::ofstream out(out_csv);
  if (!out) throw Error("cannot write '" + out_csv.string() + "'");
  out << "sample_id,channel,step,value\n" << std::setprecision(10);
  for (std::size_t s = 0; s < fc.samples; ++s)
    for (std::size_t c = 0; c < fc.channels; ++c)
      for (std::size_t h = 0; h < fc.horizon; ++h) out << s << ',' << c << ',' << h + 1 << ',' << fc.at(s, c, h) << '\n';
  return fc;
}

nlohmann::json BenchReport::to_json() const {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& row : rows) {
    r.push_back({{"horizon", row.horizon},
                 {"samples", row.samples},
                 {"median_ms", row.median_ms},
                 {"min_ms", row.min_ms},
                 {"max_ms", row.max_ms},
                 {"encoder_calls", row.encoder_calls},
                 {"flow_calls", row.flow_calls},
                 {"decoder_calls_per_generate", row.decoder_calls}});
  }
  nlohmann::json j = {{"rows", r}};
  j["sample_ratio_S200_over_S1_at_H96"] = sample_ratio ? nlohmann::json(*sample_ratio) : nlohmann::json();
  j["horizon_ratio_H720_over_H96_at_S1"] = horizon_ratio ? nlohmann::json(*horizon_ratio) : nlohmann::json();
  return j;
}

std::string BenchReport::table() const {
  std::ostringstream os;
  os << std::left << std::setw(6) << "H" << std::setw(6) << "S" << std::right << std::setw(12) << "median ms"
     << std::setw(10) << "min ms" << std::setw(10) << "max ms" << std::setw(9) << "enc/flow" << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& r : rows) {
    os << std::left << std::setw(6) << r.horizon << std::setw(6) << r.samples << std::right << std::setw(12)
       << r.median_ms << std::setw(10) << r.min_ms << std::setw(10) << r.max_ms << std::setw(5) << r.encoder_calls
       << '/' << r.flow_calls << '\n';
  }
  os << std::setprecision(2);
  if (sample_ratio) os << "S=200 / S=1 at H=96:  " << *sample_ratio << "x\n";
  if (horizon_ratio) os << "H=720 / H=96 at S=1:  " << *horizon_ratio << "x\n";
  return os.str();
}

BenchReport run_bench(const BenchOptions& options) {
  if (options.repeats < 1) throw ConfigError("bench needs at least one repeat");
  std::optional<Checkpoint> ckpt;
  if (options.checkpoint) ckpt = read_checkpoint(*options.checkpoint);

  BenchReport report;
  for (std::size_t H : options.horizons) {
    model::ModelConfig mc = options.model;
    mc.horizon = H;
    model::Tarfvae m(mc, options.seed);
    if (ckpt && model::ModelConfig::from_json(ckpt->meta.config.at("model")).to_json() == mc.to_json()) {
      load_checkpoint_into(m.params(), *ckpt);
    }
    Rng rng(derive_seed(options.seed, H));
    NdArray x = NdArray::matrix(mc.channels, mc.lookback);
    for (double& v : x.data()) v = rng.normal();

    for (std::size_t S : options.samples) {
      m.generate(x, S, 0);  // warm-up
      m.reset_counts();
      std::vector<double> ms;
      for (std::size_t r = 0; r < options.repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        m.generate(x, S, derive_seed(options.seed, r));
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
      }
      const model::ComputeCounts counts = m.counts();
      std::sort(ms.begin(), ms.end());
      BenchRow row;
      row.horizon = H;
      row.samples = S;
      row.median_ms = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
      row.min_ms = ms.front();
      row.max_ms = ms.back();
      row.encoder_calls = counts.encoder;
      row.flow_calls = counts.flow;
      row.decoder_calls = counts.decoder / options.repeats;
      report.rows.push_back(row);
    }
  }
  const auto find = [&](std::size_t H, std::size_t S) -> const BenchRow* {
    for (const auto& r : report.rows)
      if (r.horizon == H && r.samples == S) return &r;
    return nullptr;
  };
  if (const BenchRow *a = find(96, 200), *b = find(96, 1); a && b) report.sample_ratio = a->median_ms / b->median_ms;
  if (const BenchRow *a = find(720, 1), *b = find(96, 1); a && b) report.horizon_ratio = a->median_ms / b->median_ms;
  return report;
}

data::RawSeries run_gen_synthetic(const RunConfig& config, const fs::path& out_csv) {
  if (!config.synthetic) throw ConfigError("gen-synthetic needs a [synthetic] section in the config");
  config.synthetic->validate();
  const data::RawSeries s = synthetic::gen_series(*config.synthetic);
  data::write_csv(out_csv, s);
  return s;
}

}  // namespace tarfvae::app
