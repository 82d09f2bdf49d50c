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

// Experiment configuration: a flat `key = value` file format (TOML-like
// scalars plus bracketed lists), strict parsing with unknown keys rejected,
// and a writer whose output re-parses to the identical configuration.

#ifndef FEDSIM_CONFIG_HPP_
#define FEDSIM_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/secagg.hpp"
#include "fedsim/strategies.hpp"

namespace fedsim {

// Everything one experiment needs.  Sub-spec seeds are filled by the
// orchestrator from `base_seed` at run time; `synth.seed` alone is resolved
// at parse time (data stays fixed across repetitions).
struct ExperimentConfig {
  // Data: either a CSV path or a synthetic generator spec.
  std::optional<std::string> data_csv;
  SynthSpec synth;
  std::optional<std::string> test_csv;
  std::size_t test_size = 200;  // balanced holdout size when generated

  PartitionSpec partition;
  TrainSpec train;
  StrategyConfig strategy;
  PrivacySpec privacy;
  SecAggSpec secagg;

  std::size_t fl_rounds = 100;
  std::size_t eval_every = 5;
  std::size_t repetitions = 5;
  std::size_t workers = 1;
  std::uint64_t base_seed = 0;

  // Presence flags the validator needs (the iff-rules below).
  bool mu_set = false;
  bool data_seed_set = false;
};

// Parses `text` (as loaded from `path`, used in messages) and applies the
// full key schema.  Throws ConfigError for unknown/duplicate keys or bad
// values, with the offending key and line number in the message.
ExperimentConfig parse_config(const std::string& text,
                              const std::string& path);

// Reads and parses a config file (ConfigError mentions the path if the
// file cannot be read).
ExperimentConfig load_config(const std::string& path);

// Cross-field validation, applied after flag overrides:
//  - mu is required for fedprox and rejected for every other strategy;
//  - eval_every in [1, fl_rounds], repetitions >= 1, workers >= 1;
//  - synthetic fields are coherent when no data_csv is given;
//  - sub-spec validators run for the active strategy.
// Also resolves synth.seed from base_seed when no data_seed was given.
void finalize(ExperimentConfig& config);

// Renders the resolved configuration as a parseable document.  Every value
// that affects the run is emitted, so a rerun from this text reproduces
// the experiment exactly.
std::string render_config(const ExperimentConfig& config);

}  // namespace fedsim

#endif  // FEDSIM_CONFIG_HPP_
