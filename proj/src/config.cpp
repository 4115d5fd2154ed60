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

#include "tarfvae/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tarfvae/metrics.hpp"

namespace tarfvae {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
std::string fmt_real(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError(key + ": cannot parse '" + value + "' as a number");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + value + "' as a real number");
  }
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_real(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_real(v[i]);
  return s;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <typename Field>
Setter size_setter(Field field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    c.*field = parse_number<std::size_t>(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data.path", [](RunConfig& c, const std::string&, const std::string& v) { c.data.path = v; }},
      {"data.name", [](RunConfig& c, const std::string&, const std::string& v) { c.data.name = v; }},
      {"data.lookback",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.data.lookback = parse_number<std::size_t>(k, v); }},
      {"data.horizon",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.data.horizon = parse_number<std::size_t>(k, v); }},
      {"data.split",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto f = parse_real_list(k, v);
         if (f.size() != 3) throw ConfigError(k + ": expected train,val,test fractions");
         c.data.split = data::SplitSpec{f[0], f[1], f[2]};
       }},

      {"synthetic.kind",
       [](RunConfig& c, const std::string&, const std::string& v) { c.synthetic->kind = synthetic::kind_from_string(v); }},
      {"synthetic.phi",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synthetic->phi = parse_real_list(k, v); }},
      {"synthetic.sigma",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synthetic->sigma = parse_real(k, v); }},
      {"synthetic.period",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synthetic->period = parse_real(k, v); }},
      {"synthetic.amplitude",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synthetic->amplitude = parse_real(k, v); }},
      {"synthetic.length",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synthetic->length = parse_number<std::size_t>(k, v); }},
      {"synthetic.channels",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synthetic->channels = parse_number<std::size_t>(k, v); }},
      {"synthetic.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synthetic->seed = parse_number<std::uint64_t>(k, v); }},

      {"model.latent",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.model.latent = parse_number<std::size_t>(k, v); }},
      {"model.flow_blocks",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.model.flow_blocks = parse_number<std::size_t>(k, v); }},
      {"model.mlp_depth",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.model.mlp_depth = parse_number<std::size_t>(k, v); }},
      {"model.hidden",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.model.hidden = parse_number<std::size_t>(k, v); }},
      {"model.channel_hidden",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.model.channel_hidden = parse_number<std::size_t>(k, v); }},
      {"model.heads",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.model.heads = parse_number<std::size_t>(k, v); }},
      {"model.s_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.model.s_max = parse_real(k, v); }},

      {"train.lr", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lr = parse_real(k, v); }},
      {"train.beta1", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.beta1 = parse_real(k, v); }},
      {"train.beta2", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.beta2 = parse_real(k, v); }},
      {"train.batch_size",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.train.batch_size = parse_number<std::size_t>(k, v); }},
      {"train.max_epochs",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.train.max_epochs = parse_number<std::size_t>(k, v); }},
      {"train.patience",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.train.patience = parse_number<std::size_t>(k, v); }},
      {"train.val_sample_count",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.val_sample_count = parse_number<std::size_t>(k, v);
       }},
      {"train.ablation",
       [](RunConfig& c, const std::string&, const std::string& v) { c.train.ablation = training::ablation_from_string(v); }},
      {"train.precision",
       [](RunConfig& c, const std::string&, const std::string& v) { c.train.precision = precision_from_string(v); }},
      {"train.max_batches_per_epoch",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.max_batches_per_epoch = parse_number<std::size_t>(k, v);
       }},
      {"train.max_val_windows",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.max_val_windows = parse_number<std::size_t>(k, v);
       }},

      {"eval.samples",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.samples = parse_number<std::size_t>(k, v); }},
      {"eval.quantile_levels",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.quantile_levels = parse_real_list(k, v); }},
      {"eval.band_windows",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.band_windows = parse_number<std::size_t>(k, v); }},

      {"run.out_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"run.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::string section;
  std::map<std::string, std::size_t> seen;
  bool synthetic_seed_set = false;
  std::istringstream in(text);
  std::size_t lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"data", "synthetic", "model", "train", "eval", "run"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known))
        throw ConfigError(where + ": unknown section '" + section + "'");
      if (section == "synthetic" && !cfg.synthetic) cfg.synthetic = synthetic::SyntheticSpec{};
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
    if (section.empty()) throw ConfigError(where + ": key outside of any section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (const auto prev = seen.find(key); prev != seen.end())
      throw ConfigError(where + ": duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")");
    seen[key] = lineno;
    try {
      it->second(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError(where + ": " + key + ": " + e.what());
    }
    if (key == "synthetic.seed") synthetic_seed_set = true;
  }
  if (cfg.synthetic && !synthetic_seed_set) cfg.synthetic->seed = cfg.seed;
  cfg.model.lookback = cfg.data.lookback;
  cfg.model.horizon = cfg.data.horizon;
  cfg.train.seed = cfg.seed;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void RunConfig::validate() const {
  if (data.lookback < 1 || data.horizon < 1) throw ConfigError("data.lookback and data.horizon must be >= 1");
  if (synthetic && !data.path.empty())
    throw ConfigError("data.path and a [synthetic] section are mutually exclusive");
  if (!synthetic && data.path.empty()) throw ConfigError("set data.path or add a [synthetic] section");
  if (!data.path.empty() && !std::filesystem::exists(data.path))
    throw ConfigError("data.path: '" + data.path.string() + "' does not exist");
  if (synthetic) synthetic->validate();
  split_spec().validate();
  try {
    model::ModelConfig m = model;
    if (m.channels == 0) m.channels = 1;
    m.validate();
    train.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (eval.samples < 2) throw ConfigError("eval.samples must be >= 2 for quantile CRPS");
  if (!eval.quantile_levels.empty()) {
    const auto& q = eval.quantile_levels;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (!(q[i] > 0 && q[i] < 1) || (i > 0 && !(q[i] > q[i - 1])))
        throw ConfigError("eval.quantile_levels must be strictly ascending in (0, 1)");
    }
    if (q.size() < 2) throw ConfigError("eval.quantile_levels needs at least two levels");
  }
}

data::SplitSpec RunConfig::split_spec() const {
  if (data.split) return *data.split;
  std::string name = data.name;
  if (name.empty()) name = data.path.empty() ? "synthetic" : data.path.stem().string();
  return data::SplitSpec::for_dataset(name);
}

std::vector<double> RunConfig::quantile_levels() const {
  return eval.quantile_levels.empty() ? metrics::default_quantile_levels() : eval.quantile_levels;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  const data::SplitSpec sp = split_spec();
  os << "[data]\n";
  if (!data.path.empty()) os << "path = " << data.path.string() << '\n';
  if (!data.name.empty()) os << "name = " << data.name << '\n';
  os << "lookback = " << data.lookback << '\n'
     << "horizon = " << data.horizon << '\n'
     << "split = " << join_reals({sp.train_fraction, sp.val_fraction, sp.test_fraction}) << '\n';
  if (synthetic) {
    os << "\n[synthetic]\n"
       << "kind = " << synthetic::to_string(synthetic->kind) << '\n'
       << "phi = " << join_reals(synthetic->phi) << '\n'
       << "sigma = " << fmt_real(synthetic->sigma) << '\n'
       << "period = " << fmt_real(synthetic->period) << '\n'
       << "amplitude = " << fmt_real(synthetic->amplitude) << '\n'
       << "length = " << synthetic->length << '\n'
       << "channels = " << synthetic->channels << '\n'
       << "seed = " << synthetic->seed << '\n';
  }
  os << "\n[model]\n"
     << "latent = " << model.latent << '\n'
     << "flow_blocks = " << model.flow_blocks << '\n'
     << "mlp_depth = " << model.mlp_depth << '\n'
     << "hidden = " << model.hidden_width() << '\n'
     << "channel_hidden = " << model.channel_hidden << '\n'
     << "heads = " << model.heads << '\n'
     << "s_max = " << fmt_real(model.s_max) << '\n';
  os << "\n[train]\n"
     << "lr = " << fmt_real(train.lr) << '\n'
     << "beta1 = " << fmt_real(train.beta1) << '\n'
     << "beta2 = " << fmt_real(train.beta2) << '\n'
     << "batch_size = " << train.batch_size << '\n'
     << "max_epochs = " << train.max_epochs << '\n'
     << "patience = " << train.patience << '\n'
     << "val_sample_count = " << train.val_sample_count << '\n'
     << "ablation = " << training::to_string(train.ablation) << '\n'
     << "precision = " << to_string(train.precision) << '\n'
     << "max_batches_per_epoch = " << train.max_batches_per_epoch << '\n'
     << "max_val_windows = " << train.max_val_windows << '\n';
  os << "\n[eval]\n"
     << "samples = " << eval.samples << '\n'
     << "quantile_levels = " << join_reals(quantile_levels()) << '\n'
     << "band_windows = " << eval.band_windows << '\n';
  os << "\n[run]\n"
     << "out_dir = " << out_dir.string() << '\n'
     << "seed = " << seed << '\n';
  return os.str();
}

data::RawSeries load_series(RunConfig& config) {
  data::RawSeries s = config.synthetic ? synthetic::gen_series(*config.synthetic) : data::load_csv(config.data.path);
  config.model.channels = s.channels();
  return s;
}

}  // namespace tarfvae
