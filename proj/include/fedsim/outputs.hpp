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

// Renderers for run artifacts: rounds/timings/privacy-ledger CSVs and the
// summary JSON documents.  All renderers are pure string builders so their
// output can be asserted without touching the filesystem; doubles are
// written with full round-trip precision.  Timing values appear only in
// the timings CSV, keeping every other artifact byte-stable across reruns.

#ifndef FEDSIM_OUTPUTS_HPP_
#define FEDSIM_OUTPUTS_HPP_

#include <string>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/experiment.hpp"

namespace fedsim {

// repetition,round,participants,client_losses,train_loss,evaluated,
// val_accuracy,val_f1,checkpointed,skipped,epsilon_t — multi-valued cells
// are '|'-separated, non-applicable cells empty.
std::string rounds_csv(const RepetitionResults& results);

// repetition,round,train_ms,privacy_ms,transport_ms,aggregate_ms,eval_ms,
// total_ms.  The only artifact that varies between identically-seeded runs.
std::string timings_csv(const RepetitionResults& results);

// repetition,client_id,round,epsilon_t,sigma_base,sigma_<tensor>...
// Privacy strategies only; otherwise just the header line.
std::string privacy_ledger_csv(const RepetitionResults& results);

// Aggregated summary of a repetition block: per-metric mean/std/values,
// one entry per run with its test report, plus run events.  `command`
// names the producing subcommand.
std::string summary_json(const ExperimentConfig& config,
                         const RepetitionResults& results,
                         const std::string& command);

std::string ablation_json(const ExperimentConfig& config,
                          const AblationResult& result);

std::string mu_sweep_json(const ExperimentConfig& config,
                          const std::vector<MuSweepRow>& rows);

std::string epsilon_sweep_json(const ExperimentConfig& config,
                               const std::vector<EpsilonSweepRow>& rows);

// Row-normalized confusion matrix: each row of the 2x2 table divided by
// its class count (empty classes render as 0).
std::string confusion_csv(const ConfusionMatrix& cm);

// threshold,tpr,fpr rows of the ROC curve.
std::string roc_csv(const RocResult& roc);

// Single-model metrics document for the report subcommand.
std::string test_report_json(const TestReport& report);

}  // namespace fedsim

#endif  // FEDSIM_OUTPUTS_HPP_
