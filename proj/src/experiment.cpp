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

#include "fedsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <utility>

#include "fedsim/error.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/secagg.hpp"
#include "fedsim/strategies.hpp"

namespace fedsim {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

std::size_t steps_per_round(std::size_t n_records, const TrainSpec& train) {
  const std::size_t per_epoch =
      (n_records + train.batch_size - 1) / train.batch_size;
  return per_epoch * train.local_epochs;
}

std::vector<std::size_t> all_indices(const SiteDataset& ds) {
  std::vector<std::size_t> idx(ds.records.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

// Inverse-frequency weights from a client's own training split; a split
// missing a class falls back to uniform weighting with a logged event.
std::vector<double> weights_for(const SiteDataset& train_split,
                                const TrainSpec& train,
                                const std::string& owner,
                                std::vector<std::string>* events) {
  if (train.weighting != LossWeighting::kInverse) return {};
  try {
    return class_weights(train_split);
  } catch (const ConfigError&) {
    if (events != nullptr) {
      events->push_back(owner +
                        ": training split is single-class, inverse "
                        "weighting fell back to uniform");
    }
    return {};
  }
}

// Uniform sample without replacement of the round's participants,
// ascending so downstream iteration order is canonical.
std::vector<std::size_t> sample_clients(std::size_t n_clients,
                                        const StrategyConfig& strategy,
                                        rng::Stream& stream) {
  std::size_t m = static_cast<std::size_t>(
      std::floor(strategy.client_fraction * static_cast<double>(n_clients)));
  m = std::max(m, strategy.min_fit_clients);
  m = std::max(m, std::size_t{1});
  m = std::min(m, n_clients);
  std::vector<std::size_t> ids(n_clients);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  rng::shuffle(ids.data(), ids.size(), stream);
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Runs fn(0..n-1) on up to `workers` threads.  Work items land in
// caller-preallocated slots, so scheduling cannot change results; the
// first exception is rethrown after the join.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(workers, n);
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Shared per-run fixtures for the isolated training loops (centralized
// and ablation rows): train fl_rounds passes on one split, evaluate and
// checkpoint on `val`, final-report on `test`.
RunResult train_isolated(const ExperimentConfig& config,
                         const SiteDataset& train_split,
                         const SiteDataset& val, const SiteDataset& test,
                         std::uint64_t run_seed, std::size_t client_slot) {
  RunResult result;
  const std::vector<double> weights = weights_for(
      train_split, config.train, "client " + std::to_string(client_slot),
      &result.events);
  const std::size_t spr = steps_per_round(train_split.size(), config.train);
  const std::uint64_t total_steps =
      static_cast<std::uint64_t>(config.fl_rounds) * spr;

  ParameterSet params =
      init_params(config.train.model, train_split.dimension, 2,
                  config.train.hidden_width,
                  rng::derive(run_seed, rng::kTagInit));
  double best_acc = -1.0;

  for (std::size_t r = 1; r <= config.fl_rounds; ++r) {
    const auto round_start = Clock::now();
    RoundReport report;
    report.round = r;
    report.participants = {client_slot};

    RoundContext ctx;
    ctx.batch_seed = rng::derive(run_seed, rng::kTagBatch, r, client_slot);
    ctx.global_step = static_cast<std::uint64_t>(r - 1) * spr;
    ctx.total_steps = total_steps;
    ctx.class_weights = weights;
    LocalTrainResult trained =
        local_train(params, train_split, config.train, ctx);
    params = std::move(trained.params);
    report.client_losses = {trained.mean_loss};
    report.train_loss = trained.mean_loss;
    report.timings.train_ms = ms_since(round_start);

    if (r % config.eval_every == 0 || r == config.fl_rounds) {
      const auto eval_start = Clock::now();
      const TestReport v = evaluate_model(params, val);
      report.evaluated = true;
      report.val_accuracy = v.accuracy;
      report.val_f1 = v.f1_ad;
      if (v.accuracy > best_acc) {
        best_acc = v.accuracy;
        result.best_params = params;
        result.best_round = r;
        report.checkpointed = true;
      }
      report.timings.eval_ms = ms_since(eval_start);
    }
    report.timings.total_ms = ms_since(round_start);
    result.rounds.push_back(std::move(report));
  }
  result.best_val_accuracy = best_acc;
  result.test = evaluate_model(result.best_params, test);
  return result;
}

}  // namespace

ExperimentData materialize_data(const ExperimentConfig& config) {
  ExperimentData data;
  data.dev = config.data_csv ? load_csv(*config.data_csv)
                             : generate(config.synth);
  if (config.test_csv) {
    data.test = load_csv(*config.test_csv);
  } else {
    data.test = generate_balanced_test(config.synth, config.test_size);
  }
  if (data.dev.dimension != data.test.dimension) {
    throw ConfigError("development and test sets disagree on dimension (" +
                      std::to_string(data.dev.dimension) + " vs " +
                      std::to_string(data.test.dimension) + ")");
  }
  return data;
}

TestReport evaluate_model(const ParameterSet& params, const SiteDataset& ds) {
  TestReport report;
  std::vector<int> labels, preds;
  std::vector<double> scores;
  labels.reserve(ds.size());
  preds.reserve(ds.size());
  scores.reserve(ds.size());
  for (const SiteRecord& rec : ds.records) {
    const Prediction p = predict(params, rec.features);
    labels.push_back(rec.label);
    preds.push_back(p.label);
    scores.push_back(p.probabilities.size() > 1 ? p.probabilities[1] : 0.0);
  }
  report.cm = confusion(labels, preds);
  report.accuracy = accuracy(report.cm);
  report.f1_ad = f1(report.cm);
  report.f1_macro = macro_f1(labels, preds, ds.num_classes);
  report.loss = weighted_ce_loss(params, ds, all_indices(ds), {}, nullptr);
  try {
    report.roc = roc_auc(labels, scores);
    report.auc = report.roc.auc;
    report.auc_defined = true;
  } catch (const MetricsError&) {
    report.auc = std::numeric_limits<double>::quiet_NaN();
    report.auc_defined = false;
  }
  return report;
}

RunResult run_federated(const ExperimentConfig& config, const SiteDataset& dev,
                        const SiteDataset& test, std::uint64_t run_seed) {
  const StrategyKind kind = config.strategy.kind;
  const bool uses_privacy =
      kind == StrategyKind::kLocalDp || kind == StrategyKind::kAldp;
  const bool uses_secagg = kind == StrategyKind::kSecAgg;
  const std::size_t n_clients = config.partition.n_clients;

  RunResult result;

  PartitionSpec pspec = config.partition;
  pspec.seed = rng::derive(run_seed, rng::kTagPartition);
  const std::vector<ClientPartition> clients =
      partition(dev, pspec, &result.events);

  // Aggregated validation set: the exact multiset union of client splits.
  SiteDataset global_val;
  global_val.dimension = dev.dimension;
  global_val.num_classes = dev.num_classes;
  for (const ClientPartition& c : clients) {
    global_val = global_val.empty() ? c.val : concat(global_val, c.val);
  }

  std::vector<std::vector<double>> client_weights(n_clients);
  std::vector<std::size_t> spr(n_clients);
  std::vector<std::uint64_t> total_steps(n_clients);
  for (std::size_t k = 0; k < n_clients; ++k) {
    client_weights[k] =
        weights_for(clients[k].train, config.train,
                    "client " + std::to_string(k), &result.events);
    spr[k] = steps_per_round(clients[k].train.size(), config.train);
    total_steps[k] = static_cast<std::uint64_t>(config.fl_rounds) * spr[k];
  }

  PrivacySpec privacy = config.privacy;
  privacy.seed = run_seed;
  std::vector<PrivacyState> privacy_states(n_clients);
  for (std::size_t k = 0; k < n_clients; ++k) {
    privacy_states[k].client_id = k;
  }

  SecAggSpec secagg_spec = config.secagg;
  secagg_spec.seed = run_seed;
  SecAggSession session;
  if (uses_secagg) {
    validate(secagg_spec, n_clients);
    session = secagg_setup(n_clients, secagg_spec);
  }

  ParameterSet global =
      init_params(config.train.model, dev.dimension, 2,
                  config.train.hidden_width,
                  rng::derive(run_seed, rng::kTagInit));
  double best_acc = -1.0;

  for (std::size_t r = 1; r <= config.fl_rounds; ++r) {
    const auto round_start = Clock::now();
    RoundReport report;
    report.round = r;

    rng::Stream sampler(rng::derive(run_seed, rng::kTagSample, r));
    const std::vector<std::size_t> selected =
        sample_clients(n_clients, config.strategy, sampler);
    if (selected.empty()) {
      report.skipped = true;
      report.timings.total_ms = ms_since(round_start);
      result.events.push_back("round " + std::to_string(r) +
                              ": empty client sample, skipped");
      result.rounds.push_back(std::move(report));
      continue;
    }

    std::vector<ClientUpdate> updates(selected.size());
    parallel_for(selected.size(), config.workers, [&](std::size_t i) {
      const std::size_t k = selected[i];
      ClientRoundInput input;
      input.global = &global;
      input.partition = &clients[k];
      input.strategy = &config.strategy;
      input.train = &config.train;
      if (uses_privacy) {
        input.privacy = &privacy;
        input.privacy_state = &privacy_states[k];
      }
      input.class_weights = client_weights[k];
      input.batch_seed = rng::derive(run_seed, rng::kTagBatch, r, k);
      input.global_step = static_cast<std::uint64_t>(r - 1) * spr[k];
      input.total_steps = total_steps[k];
      updates[i] = run_client_round(input);
    });

    double weighted_loss = 0.0;
    double weight_sum = 0.0;
    for (const ClientUpdate& u : updates) {
      report.participants.push_back(u.client_id);
      report.client_losses.push_back(u.train_loss);
      weighted_loss += static_cast<double>(u.n_samples) * u.train_loss;
      weight_sum += static_cast<double>(u.n_samples);
      report.timings.train_ms += u.train_ms;
      report.timings.privacy_ms += u.privacy_ms;
    }
    report.train_loss = weight_sum > 0.0 ? weighted_loss / weight_sum : 0.0;

    if (uses_privacy) {
      double eps_sum = 0.0;
      for (const std::size_t k : selected) {
        const PrivacyLedgerRow& row = privacy_states[k].ledger.back();
        result.privacy_ledger.push_back(ClientLedgerEntry{k, r, row});
        eps_sum += row.epsilon_t;
      }
      report.epsilon_t = eps_sum / static_cast<double>(selected.size());
      report.has_epsilon = true;
    }

    if (uses_secagg) {
      // Transport: each participant ships a masked fixed-point round
      // delta; unsampled clients count as dropouts whose residual masks
      // the survivors' shares remove.
      const auto transport_start = Clock::now();
      std::vector<MaskedUpdate> masked(updates.size());
      parallel_for(updates.size(), config.workers, [&](std::size_t i) {
        const std::vector<double> delta =
            sub(updates[i].params, global).flatten();
        masked[i] = mask_update(session, updates[i].client_id,
                                quantize(delta, secagg_spec), r);
      });
      std::set<std::size_t> dropped;
      for (std::size_t k = 0; k < n_clients; ++k) dropped.insert(k);
      for (const std::size_t k : selected) dropped.erase(k);
      report.timings.transport_ms = ms_since(transport_start);

      const auto agg_start = Clock::now();
      const AggregateOutcome outcome =
          secure_aggregate(masked, dropped, session, r);
      global = add(global, global.unflatten(outcome.mean));
      report.timings.aggregate_ms = ms_since(agg_start);
    } else {
      const auto agg_start = Clock::now();
      global = fedavg_aggregate(updates);
      report.timings.aggregate_ms = ms_since(agg_start);
    }

    if (r % config.eval_every == 0 || r == config.fl_rounds) {
      const auto eval_start = Clock::now();
      const TestReport v = evaluate_model(global, global_val);
      report.evaluated = true;
      report.val_accuracy = v.accuracy;
      report.val_f1 = v.f1_ad;
      if (v.accuracy > best_acc) {
        best_acc = v.accuracy;
        result.best_params = global;
        result.best_round = r;
        report.checkpointed = true;
      }
      report.timings.eval_ms = ms_since(eval_start);
    }
    report.timings.total_ms = ms_since(round_start);
    result.rounds.push_back(std::move(report));
  }

  result.best_val_accuracy = best_acc;
  result.test = evaluate_model(result.best_params, test);
  return result;
}

RunResult run_centralized(const ExperimentConfig& config,
                          const SiteDataset& dev, const SiteDataset& test,
                          std::uint64_t run_seed) {
  PartitionSpec pspec;
  pspec.n_clients = 1;
  pspec.train_ratio = config.partition.train_ratio;
  pspec.seed = rng::derive(run_seed, rng::kTagPartition);
  std::vector<std::string> warnings;
  const std::vector<ClientPartition> pooled = partition(dev, pspec, &warnings);
  RunResult result = train_isolated(config, pooled[0].train, pooled[0].val,
                                    test, run_seed, 0);
  result.events.insert(result.events.begin(), warnings.begin(),
                       warnings.end());
  return result;
}

AblationResult run_ablation(const ExperimentConfig& config,
                            const SiteDataset& dev, const SiteDataset& test,
                            std::uint64_t run_seed) {
  PartitionSpec pspec = config.partition;
  pspec.seed = rng::derive(run_seed, rng::kTagPartition);
  std::vector<std::string> warnings;
  const std::vector<ClientPartition> clients =
      partition(dev, pspec, &warnings);

  AblationResult result;
  for (const ClientPartition& c : clients) {
    RunResult run = train_isolated(config, c.train, c.val, test, run_seed,
                                   c.client_id);
    AblationRow row;
    row.client_id = c.client_id;
    row.sites = c.sites;
    row.n_train = c.train.size();
    row.best_round = run.best_round;
    row.best_val_accuracy = run.best_val_accuracy;
    row.test = run.test;
    result.clients.push_back(std::move(row));
  }
  result.centralized = run_centralized(config, dev, test, run_seed);
  return result;
}

MetricStat metric_stat(std::vector<double> values) {
  MetricStat stat;
  stat.values = std::move(values);
  const std::size_t n = stat.values.size();
  if (n == 0) {
    stat.mean = std::numeric_limits<double>::quiet_NaN();
    stat.stddev = std::numeric_limits<double>::quiet_NaN();
    return stat;
  }
  double sum = 0.0;
  for (double v : stat.values) sum += v;
  stat.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double v : stat.values) {
    const double d = v - stat.mean;
    sq += d * d;
  }
  stat.stddev = std::sqrt(sq / static_cast<double>(n));
  return stat;
}

RepetitionResults run_repetitions(const ExperimentConfig& config,
                                  const SiteDataset& dev,
                                  const SiteDataset& test, bool centralized) {
  RepetitionResults results;
  std::vector<double> acc, f1_ad, f1_macro, auc, best_val;
  for (std::size_t i = 0; i < config.repetitions; ++i) {
    const std::uint64_t run_seed = config.base_seed + i;
    results.run_seeds.push_back(run_seed);
    RunResult run = centralized
                        ? run_centralized(config, dev, test, run_seed)
                        : run_federated(config, dev, test, run_seed);
    acc.push_back(run.test.accuracy);
    f1_ad.push_back(run.test.f1_ad);
    f1_macro.push_back(run.test.f1_macro);
    if (run.test.auc_defined) auc.push_back(run.test.auc);
    best_val.push_back(run.best_val_accuracy);
    results.runs.push_back(std::move(run));
  }
  results.accuracy = metric_stat(std::move(acc));
  results.f1_ad = metric_stat(std::move(f1_ad));
  results.f1_macro = metric_stat(std::move(f1_macro));
  results.auc = metric_stat(std::move(auc));
  results.best_val_accuracy = metric_stat(std::move(best_val));
  return results;
}

std::vector<MuSweepRow> run_mu_sweep(const ExperimentConfig& config,
                                     const SiteDataset& dev,
                                     const SiteDataset& test,
                                     const std::vector<double>& mu_values) {
  if (mu_values.empty()) {
    throw ConfigError("mu sweep needs at least one value");
  }
  std::vector<MuSweepRow> rows;
  for (const double mu : mu_values) {
    if (!(mu >= 0.0)) {
      throw ConfigError("mu values must be nonnegative");
    }
    ExperimentConfig swept = config;
    swept.strategy.kind = StrategyKind::kFedProx;
    swept.strategy.mu = mu;
    swept.mu_set = true;
    MuSweepRow row;
    row.mu = mu;
    row.results = run_repetitions(swept, dev, test);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<EpsilonSweepRow> run_epsilon_sweep(
    const ExperimentConfig& config, const SiteDataset& dev,
    const SiteDataset& test, const std::vector<double>& epsilon_values) {
  const StrategyKind kind = config.strategy.kind;
  if (kind != StrategyKind::kLocalDp && kind != StrategyKind::kAldp) {
    throw ConfigError(
        "sweep-epsilon requires a privacy strategy (local_dp or aldp)");
  }
  if (epsilon_values.empty()) {
    throw ConfigError("epsilon sweep needs at least one value");
  }
  std::vector<EpsilonSweepRow> rows;
  for (const double epsilon : epsilon_values) {
    ExperimentConfig swept = config;
    swept.privacy.epsilon0 = epsilon;
    validate(swept.privacy);
    EpsilonSweepRow row;
    row.epsilon = epsilon;
    row.results = run_repetitions(swept, dev, test);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fedsim
