//
// Copyright 2026 The fedsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "fedsim/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/textio.hpp"

namespace fedsim {
namespace {

struct RawValue {
  std::string text;
  std::size_t line = 0;
  bool quoted = false;
};

using RawMap = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(k[0])) && k[0] != '_') {
    return false;
  }
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
      return false;
    }
  }
  return true;
}

// Strips a trailing comment, honouring double quotes so '#' may appear
// inside string values.
std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

RawMap tokenize(const std::string& text, const std::string& path) {
  RawMap raw;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + body + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (!valid_key(key)) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": invalid key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": key '" +
                        key + "' has no value");
    }
    bool quoted = false;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      quoted = true;
      value = value.substr(1, value.size() - 2);
      if (value.find('"') != std::string::npos) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": key '" +
                          key + "' has a malformed quoted string");
      }
    } else if (value.find('"') != std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": key '" +
                        key + "' has a malformed quoted string");
    }
    const auto [it, inserted] = raw.emplace(key, RawValue{value, lineno, quoted});
    if (!inserted) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "' (first at line " +
                        std::to_string(it->second.line) + ")");
    }
  }
  return raw;
}

// Typed extraction.  Each take_* removes the key so leftovers can be
// reported as unknown.

class Extractor {
 public:
  Extractor(RawMap raw, std::string path)
      : raw_(std::move(raw)), path_(std::move(path)) {}

  bool has(const std::string& key) const { return raw_.count(key) != 0; }

  std::optional<std::string> take_string(const std::string& key) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    const std::string v = it->second.text;
    raw_.erase(it);
    return v;
  }

  std::optional<double> take_double(const std::string& key) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    const double v = parse_number(it->second, key);
    raw_.erase(it);
    return v;
  }

  std::optional<long long> take_int(const std::string& key) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    const long long v = parse_integer(it->second, key);
    raw_.erase(it);
    return v;
  }

  std::optional<std::size_t> take_size(const std::string& key) {
    auto v = take_int(key);
    if (!v) return std::nullopt;
    if (*v < 0) {
      throw ConfigError(context_for(key) + ": '" + key +
                        "' must be non-negative");
    }
    return static_cast<std::size_t>(*v);
  }

  // Seeds span the whole 64-bit range (derived values routinely exceed
  // the signed maximum), so they get their own unsigned parse.
  std::optional<std::uint64_t> take_seed(const std::string& key) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    const RawValue v = it->second;
    raw_.erase(it);
    const std::string where =
        path_ + ":" + std::to_string(v.line) + ": key '" + key + "'";
    if (v.quoted || v.text.empty() || v.text[0] == '-' || v.text[0] == '+') {
      throw ConfigError(where + ": must be a non-negative integer, got '" +
                        v.text + "'");
    }
    errno = 0;
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(v.text.c_str(), &end, 10);
    if (end != v.text.c_str() + v.text.size() || errno == ERANGE) {
      throw ConfigError(where + ": must be a non-negative integer, got '" +
                        v.text + "'");
    }
    return static_cast<std::uint64_t>(parsed);
  }

  std::optional<bool> take_bool(const std::string& key) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    const std::string v = it->second.text;
    const std::size_t line = it->second.line;
    raw_.erase(it);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(path_ + ":" + std::to_string(line) + ": key '" + key +
                      "' must be true or false, got '" + v + "'");
  }

  // Bracketed list of integers, or a bare scalar broadcast to `n` entries.
  std::optional<std::vector<std::size_t>> take_size_list(
      const std::string& key, std::size_t n) {
    auto items = take_items(key, n);
    if (!items) return std::nullopt;
    std::vector<std::size_t> out;
    out.reserve(items->second.size());
    for (const std::string& item : items->second) {
      const long long v =
          parse_integer(RawValue{item, items->first, false}, key);
      if (v < 0) {
        throw ConfigError(path_ + ":" + std::to_string(items->first) +
                          ": key '" + key + "' entries must be non-negative");
      }
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }

  std::optional<std::vector<double>> take_double_list(const std::string& key,
                                                      std::size_t n) {
    auto items = take_items(key, n);
    if (!items) return std::nullopt;
    std::vector<double> out;
    out.reserve(items->second.size());
    for (const std::string& item : items->second) {
      out.push_back(parse_number(RawValue{item, items->first, false}, key));
    }
    return out;
  }

  // Remaining keys are unknown; report the first (lowest-line) one.
  void finish() const {
    if (raw_.empty()) return;
    const RawValue* first = nullptr;
    const std::string* name = nullptr;
    for (const auto& [key, value] : raw_) {
      if (first == nullptr || value.line < first->line) {
        first = &value;
        name = &key;
      }
    }
    throw ConfigError(path_ + ":" + std::to_string(first->line) +
                      ": unknown key '" + *name + "'");
  }

 private:
  std::string context_for(const std::string& key) const {
    return path_ + ": key '" + key + "'";
  }

  double parse_number(const RawValue& v, const std::string& key) const {
    if (v.quoted) {
      throw ConfigError(path_ + ":" + std::to_string(v.line) + ": key '" +
                        key + "' must be a number, got a quoted string");
    }
    try {
      return textio::parse_double(
          v.text, path_ + ":" + std::to_string(v.line) + ": key '" + key + "'");
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  }

  long long parse_integer(const RawValue& v, const std::string& key) const {
    if (v.quoted) {
      throw ConfigError(path_ + ":" + std::to_string(v.line) + ": key '" +
                        key + "' must be an integer, got a quoted string");
    }
    try {
      return textio::parse_int(
          v.text, path_ + ":" + std::to_string(v.line) + ": key '" + key + "'");
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  }

  // Shared list/broadcast handling: returns (line, items).
  std::optional<std::pair<std::size_t, std::vector<std::string>>> take_items(
      const std::string& key, std::size_t n) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    const RawValue v = it->second;
    raw_.erase(it);
    std::vector<std::string> items;
    if (!v.text.empty() && v.text.front() == '[') {
      if (v.text.back() != ']') {
        throw ConfigError(path_ + ":" + std::to_string(v.line) + ": key '" +
                          key + "' has an unterminated list");
      }
      const std::string inner = trim(v.text.substr(1, v.text.size() - 2));
      if (!inner.empty()) {
        for (const std::string& part : textio::split(inner, ',')) {
          items.push_back(trim(part));
        }
      }
      if (items.size() != n) {
        throw ConfigError(path_ + ":" + std::to_string(v.line) + ": key '" +
                          key + "' needs " + std::to_string(n) +
                          " entries, got " + std::to_string(items.size()));
      }
    } else {
      // Scalar broadcast: one value for every site.
      items.assign(n, v.text);
    }
    return std::make_pair(v.line, std::move(items));
  }

  RawMap raw_;
  std::string path_;
};

template <typename Parse>
auto parse_enum(const std::optional<std::string>& text, Parse parse,
                const std::string& path, const std::string& key)
    -> std::optional<decltype(parse(std::string{}))> {
  if (!text) return std::nullopt;
  try {
    return parse(*text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": key '" + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text,
                              const std::string& path) {
  Extractor ex(tokenize(text, path), path);
  ExperimentConfig config;

  // Experiment shape.
  if (auto v = ex.take_size("fl_rounds")) config.fl_rounds = *v;
  if (auto v = ex.take_size("eval_every")) config.eval_every = *v;
  if (auto v = ex.take_size("repetitions")) config.repetitions = *v;
  if (auto v = ex.take_size("workers")) config.workers = *v;
  if (auto v = ex.take_seed("base_seed")) config.base_seed = *v;

  // Partitioning.
  if (auto v = ex.take_size("clients")) config.partition.n_clients = *v;
  if (auto v = ex.take_double("train_ratio")) config.partition.train_ratio = *v;

  // Strategy.
  if (auto v = parse_enum(ex.take_string("strategy"), parse_strategy, path,
                          "strategy")) {
    config.strategy.kind = *v;
  }
  if (auto v = ex.take_double("mu")) {
    config.strategy.mu = *v;
    config.mu_set = true;
  }
  if (auto v = ex.take_double("client_fraction")) {
    config.strategy.client_fraction = *v;
  }
  if (auto v = ex.take_size("min_fit_clients")) {
    config.strategy.min_fit_clients = *v;
  }

  // Local training.
  if (auto v = parse_enum(ex.take_string("model"), parse_model_kind, path,
                          "model")) {
    config.train.model = *v;
  }
  if (auto v = ex.take_size("hidden_width")) config.train.hidden_width = *v;
  if (auto v = ex.take_double("learning_rate")) config.train.learning_rate = *v;
  if (auto v = parse_enum(ex.take_string("optimizer"), parse_optimizer, path,
                          "optimizer")) {
    config.train.optimizer = *v;
  }
  if (auto v = ex.take_double("weight_decay")) config.train.weight_decay = *v;
  if (auto v = parse_enum(ex.take_string("lr_schedule"), parse_lr_schedule,
                          path, "lr_schedule")) {
    config.train.lr_schedule = *v;
  }
  if (auto v = ex.take_size("batch_size")) config.train.batch_size = *v;
  if (auto v = ex.take_size("local_epochs")) config.train.local_epochs = *v;
  if (auto v = parse_enum(ex.take_string("weighting"), parse_loss_weighting,
                          path, "weighting")) {
    config.train.weighting = *v;
  }

  // Data source.
  config.data_csv = ex.take_string("data_csv");
  config.test_csv = ex.take_string("test_csv");
  if (auto v = ex.take_size("test_size")) config.test_size = *v;
  if (auto v = ex.take_size("n_sites")) config.synth.n_sites = *v;
  if (config.synth.n_sites == 0 &&
      (ex.has("site_records") || ex.has("class_priors"))) {
    throw ConfigError(path +
                      ": site_records and class_priors require n_sites");
  }
  if (auto v = ex.take_size_list("site_records", config.synth.n_sites)) {
    config.synth.per_site_counts = *v;
  }
  if (auto v = ex.take_size("dimension")) config.synth.dimension = *v;
  if (auto v = ex.take_double_list("class_priors", config.synth.n_sites)) {
    config.synth.class1_prob = *v;
  }
  if (auto v = ex.take_double("site_shift")) config.synth.site_shift = *v;
  if (auto v = ex.take_double("class_separation")) {
    config.synth.class_separation = *v;
  }
  if (auto v = ex.take_double("noise_std")) config.synth.noise_std = *v;
  if (auto v = ex.take_seed("data_seed")) {
    config.synth.seed = *v;
    config.data_seed_set = true;
  }

  // Differential privacy.
  if (auto v = ex.take_double("epsilon")) config.privacy.epsilon0 = *v;
  if (auto v = ex.take_double("delta")) config.privacy.delta = *v;
  if (auto v = ex.take_double("clipping_norm")) config.privacy.clipping_norm = *v;
  if (auto v = ex.take_double("decay_factor")) config.privacy.decay_factor = *v;
  if (auto v = ex.take_double("min_epsilon")) config.privacy.epsilon_min = *v;
  if (auto v = ex.take_double("max_epsilon")) config.privacy.epsilon_max = *v;
  if (auto v = ex.take_bool("clip_update")) config.privacy.clip_update = *v;

  // Secure aggregation.
  if (auto v = ex.take_double("clipping_range")) {
    config.secagg.clipping_range = *v;
  }
  if (auto v = ex.take_int("quantization_range")) {
    const long long range = *v;
    if (range < 2 || (range & (range - 1)) != 0) {
      throw ConfigError(path + ": key 'quantization_range' must be a power "
                        "of two, got " + std::to_string(range));
    }
    std::uint32_t bits = 0;
    while ((1ll << bits) < range) ++bits;
    config.secagg.quant_bits = bits;
  }
  if (auto v = ex.take_size("num_shares")) config.secagg.num_shares = *v;
  if (auto v = ex.take_size("reconstruction_threshold")) {
    config.secagg.threshold = *v;
  }

  ex.finish();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = textio::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config file '" + path + "': " + e.what());
  }
  return parse_config(text, path);
}

void finalize(ExperimentConfig& config) {
  const StrategyKind kind = config.strategy.kind;

  if (kind == StrategyKind::kFedProx && !config.mu_set) {
    throw ConfigError("the fedprox strategy requires mu");
  }
  if (kind != StrategyKind::kFedProx && config.mu_set) {
    throw ConfigError("mu is only meaningful for the fedprox strategy");
  }

  if (config.fl_rounds == 0) {
    throw ConfigError("fl_rounds must be at least 1");
  }
  if (config.eval_every == 0 || config.eval_every > config.fl_rounds) {
    throw ConfigError("eval_every must lie in [1, fl_rounds]");
  }
  if (config.repetitions == 0) {
    throw ConfigError("repetitions must be at least 1");
  }
  if (config.workers == 0) {
    throw ConfigError("workers must be at least 1");
  }
  if (!config.test_csv) {
    if (config.data_csv) {
      throw ConfigError(
          "test_csv is required when data_csv is given (a holdout can only "
          "be synthesized alongside synthetic development data)");
    }
    if (config.test_size < 2 || config.test_size % 2 != 0) {
      throw ConfigError(
          "test_size must be an even number of at least 2 records "
          "(the holdout is balanced per class)");
    }
  }

  if (!config.data_csv) {
    if (config.synth.n_sites == 0) {
      throw ConfigError("either data_csv or a synthetic block starting with "
                        "n_sites is required");
    }
    if (config.synth.per_site_counts.empty()) {
      throw ConfigError("synthetic data requires site_records");
    }
    if (config.synth.dimension == 0) {
      throw ConfigError("synthetic data requires dimension");
    }
    if (config.synth.class1_prob.empty()) {
      config.synth.class1_prob.assign(config.synth.n_sites, 0.5);
    }
    if (!config.data_seed_set) {
      config.synth.seed = rng::derive(config.base_seed, rng::kTagData);
      config.data_seed_set = true;
    }
    validate(config.synth);
  }

  validate(config.partition);
  validate(config.train);
  validate(config.strategy, config.partition.n_clients);

  const bool uses_privacy =
      kind == StrategyKind::kLocalDp || kind == StrategyKind::kAldp;
  if (uses_privacy) {
    config.privacy.mode = kind == StrategyKind::kAldp ? PrivacyMode::kAdaptive
                                                      : PrivacyMode::kFixed;
    validate(config.privacy);
  }
  if (kind == StrategyKind::kSecAgg) {
    validate(config.secagg, config.partition.n_clients);
  }
}

std::string render_config(const ExperimentConfig& config) {
  using textio::format_double;
  std::ostringstream out;
  const auto str = [](const std::string& s) { return "\"" + s + "\""; };

  out << "base_seed = " << config.base_seed << "\n";
  out << "fl_rounds = " << config.fl_rounds << "\n";
  out << "eval_every = " << config.eval_every << "\n";
  out << "repetitions = " << config.repetitions << "\n";
  out << "workers = " << config.workers << "\n";
  out << "\n";
  out << "clients = " << config.partition.n_clients << "\n";
  out << "train_ratio = " << format_double(config.partition.train_ratio)
      << "\n";
  out << "\n";
  out << "strategy = " << str(to_string(config.strategy.kind)) << "\n";
  if (config.strategy.kind == StrategyKind::kFedProx) {
    out << "mu = " << format_double(config.strategy.mu) << "\n";
  }
  out << "client_fraction = " << format_double(config.strategy.client_fraction)
      << "\n";
  out << "min_fit_clients = " << config.strategy.min_fit_clients << "\n";
  out << "\n";
  out << "model = " << str(to_string(config.train.model)) << "\n";
  if (config.train.model == ModelKind::kMlp) {
    out << "hidden_width = " << config.train.hidden_width << "\n";
  }
  out << "learning_rate = " << format_double(config.train.learning_rate)
      << "\n";
  out << "optimizer = " << str(to_string(config.train.optimizer)) << "\n";
  out << "weight_decay = " << format_double(config.train.weight_decay) << "\n";
  out << "lr_schedule = " << str(to_string(config.train.lr_schedule)) << "\n";
  out << "batch_size = " << config.train.batch_size << "\n";
  out << "local_epochs = " << config.train.local_epochs << "\n";
  out << "weighting = " << str(to_string(config.train.weighting)) << "\n";
  out << "\n";
  if (config.data_csv) {
    out << "data_csv = " << str(*config.data_csv) << "\n";
  } else {
    out << "n_sites = " << config.synth.n_sites << "\n";
    out << "site_records = [";
    for (std::size_t i = 0; i < config.synth.per_site_counts.size(); ++i) {
      out << (i == 0 ? "" : ", ") << config.synth.per_site_counts[i];
    }
    out << "]\n";
    out << "dimension = " << config.synth.dimension << "\n";
    out << "class_priors = [";
    for (std::size_t i = 0; i < config.synth.class1_prob.size(); ++i) {
      out << (i == 0 ? "" : ", ") << format_double(config.synth.class1_prob[i]);
    }
    out << "]\n";
    out << "site_shift = " << format_double(config.synth.site_shift) << "\n";
    out << "class_separation = "
        << format_double(config.synth.class_separation) << "\n";
    out << "noise_std = " << format_double(config.synth.noise_std) << "\n";
    out << "data_seed = " << config.synth.seed << "\n";
  }
  if (config.test_csv) {
    out << "test_csv = " << str(*config.test_csv) << "\n";
  } else {
    out << "test_size = " << config.test_size << "\n";
  }

  const StrategyKind kind = config.strategy.kind;
  if (kind == StrategyKind::kLocalDp || kind == StrategyKind::kAldp) {
    out << "\n";
    out << "epsilon = " << format_double(config.privacy.epsilon0) << "\n";
    out << "delta = " << format_double(config.privacy.delta) << "\n";
    out << "clipping_norm = " << format_double(config.privacy.clipping_norm)
        << "\n";
    out << "decay_factor = " << format_double(config.privacy.decay_factor)
        << "\n";
    out << "min_epsilon = " << format_double(config.privacy.epsilon_min)
        << "\n";
    out << "max_epsilon = " << format_double(config.privacy.epsilon_max)
        << "\n";
    out << "clip_update = " << (config.privacy.clip_update ? "true" : "false")
        << "\n";
  }
  if (kind == StrategyKind::kSecAgg) {
    out << "\n";
    out << "clipping_range = " << format_double(config.secagg.clipping_range)
        << "\n";
    out << "quantization_range = "
        << (std::uint64_t{1} << config.secagg.quant_bits) << "\n";
    out << "num_shares = " << config.secagg.num_shares << "\n";
    out << "reconstruction_threshold = " << config.secagg.threshold << "\n";
  }
  return out.str();
}

}  // namespace fedsim
