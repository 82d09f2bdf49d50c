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

// Experiment orchestration: the federated training loop (sampling, local
// rounds, aggregation, evaluation, checkpointing), the centralized and
// per-client baselines, and the repetition/sweep drivers.  Every run is a
// pure function of (config, data, run_seed); worker threads change only
// wall-clock numbers.

#ifndef FEDSIM_EXPERIMENT_HPP_
#define FEDSIM_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/model.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/tensor.hpp"

namespace fedsim {

// Development set (partitioned among clients) plus the shared holdout.
struct ExperimentData {
  SiteDataset dev;
  SiteDataset test;
};

// Generates or loads both datasets according to the config.  The holdout,
// when generated, is balanced per class with sites assigned round-robin and
// drawn from an independent stream of the same per-site distributions.
ExperimentData materialize_data(const ExperimentConfig& config);

// Wall-clock milliseconds per round phase.  Phase fields are summed across
// clients, so with workers > 1 their sum can exceed total_ms (overlap);
// with workers == 1 they account for the round within scheduling noise.
struct PhaseTimings {
  double train_ms = 0.0;
  double privacy_ms = 0.0;
  double transport_ms = 0.0;
  double aggregate_ms = 0.0;
  double eval_ms = 0.0;
  double total_ms = 0.0;
};

struct RoundReport {
  std::size_t round = 0;                  // 1-based
  std::vector<std::size_t> participants;  // client ids, ascending
  std::vector<double> client_losses;      // parallel to participants
  double train_loss = 0.0;                // sample-weighted mean
  bool evaluated = false;
  double val_accuracy = 0.0;  // only meaningful when evaluated
  double val_f1 = 0.0;
  bool checkpointed = false;
  bool skipped = false;
  double epsilon_t = 0.0;  // mean budget spent this round (DP runs only)
  bool has_epsilon = false;
  PhaseTimings timings;
};

// Metrics of one model on one dataset.
struct TestReport {
  double accuracy = 0.0;
  double f1_ad = 0.0;     // binary F1, positive class = label 1
  double f1_macro = 0.0;  // one-vs-rest mean
  double auc = 0.0;       // only meaningful when auc_defined
  bool auc_defined = false;
  double loss = 0.0;  // unweighted cross-entropy
  ConfusionMatrix cm;
  RocResult roc;  // empty when !auc_defined
};

TestReport evaluate_model(const ParameterSet& params, const SiteDataset& ds);

// One privacy-ledger row annotated with its owner and the global round.
struct ClientLedgerEntry {
  std::size_t client_id = 0;
  std::size_t global_round = 0;  // 1-based orchestrator round
  PrivacyLedgerRow row;
};

// Outcome of one federated (or baseline) run.
struct RunResult {
  ParameterSet best_params;
  std::size_t best_round = 0;  // 1-based; earliest among val-accuracy ties
  double best_val_accuracy = 0.0;
  std::vector<RoundReport> rounds;
  TestReport test;  // best checkpoint on the holdout
  std::vector<ClientLedgerEntry> privacy_ledger;
  std::vector<std::string> events;
};

// The federated loop: fl_rounds of (sample clients, local training,
// aggregation), evaluation on the union of client validation sets every
// eval_every rounds and at the final round, checkpoint by highest
// validation accuracy (ties to the earliest round), final evaluation of
// the best checkpoint on the holdout.
RunResult run_federated(const ExperimentConfig& config, const SiteDataset& dev,
                        const SiteDataset& test, std::uint64_t run_seed);

// Pooled baseline: the whole development set becomes one client (same
// split ratio and seed derivation), trained for fl_rounds passes with the
// same evaluation and checkpoint rules.  A 1-client federated run is
// bit-identical to this.
RunResult run_centralized(const ExperimentConfig& config,
                          const SiteDataset& dev, const SiteDataset& test,
                          std::uint64_t run_seed);

struct AblationRow {
  std::size_t client_id = 0;
  std::vector<std::string> sites;
  std::size_t n_train = 0;
  std::size_t best_round = 0;
  double best_val_accuracy = 0.0;
  TestReport test;
};

// Each client trained alone on its own split (checkpoint by its own
// validation accuracy), all evaluated on the shared holdout, plus the
// pooled baseline for reference.
struct AblationResult {
  std::vector<AblationRow> clients;
  RunResult centralized;
};

AblationResult run_ablation(const ExperimentConfig& config,
                            const SiteDataset& dev, const SiteDataset& test,
                            std::uint64_t run_seed);

// Mean and population standard deviation of one metric across runs.
struct MetricStat {
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;
};

MetricStat metric_stat(std::vector<double> values);

// config.repetitions runs with run seeds base_seed, base_seed+1, ...,
// sharing one dataset.
struct RepetitionResults {
  std::vector<std::uint64_t> run_seeds;
  std::vector<RunResult> runs;
  MetricStat accuracy;  // test metrics of the per-run best checkpoints
  MetricStat f1_ad;
  MetricStat f1_macro;
  MetricStat auc;
  MetricStat best_val_accuracy;
};

RepetitionResults run_repetitions(const ExperimentConfig& config,
                                  const SiteDataset& dev,
                                  const SiteDataset& test,
                                  bool centralized = false);

struct MuSweepRow {
  double mu = 0.0;
  RepetitionResults results;
};

// One repetition block per proximal strength, strategy forced to fedprox
// (mu = 0 runs the plain weighted-average path through the same objective).
std::vector<MuSweepRow> run_mu_sweep(const ExperimentConfig& config,
                                     const SiteDataset& dev,
                                     const SiteDataset& test,
                                     const std::vector<double>& mu_values);

struct EpsilonSweepRow {
  double epsilon = 0.0;
  RepetitionResults results;
};

// One repetition block per starting budget; requires a privacy strategy.
std::vector<EpsilonSweepRow> run_epsilon_sweep(
    const ExperimentConfig& config, const SiteDataset& dev,
    const SiteDataset& test, const std::vector<double>& epsilon_values);

}  // namespace fedsim

#endif  // FEDSIM_EXPERIMENT_HPP_
