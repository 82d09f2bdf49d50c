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

// fedsim command-line front end.  Each subcommand binds a config file
// (plus flag overrides) to one experiment driver and writes its artifacts
// into --out.  Every config-driven run also writes the fully resolved
// config, so rerunning from that file reproduces the outputs byte for
// byte.  Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedsim/config.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/error.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/outputs.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/strategies.hpp"
#include "fedsim/textio.hpp"

namespace {

using fedsim::ExperimentConfig;
using fedsim::ExperimentData;

// Flags shared by the config-driven subcommands.  CLI11 option handles
// let each handler distinguish "flag given" from "config value".
struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string strategy;
  double epsilon = 0.0;
  double mu = 0.0;
  std::size_t clients = 0;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* strategy_opt = nullptr;
  CLI::Option* epsilon_opt = nullptr;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* clients_opt = nullptr;
};

// Registers -c/--config, --out, and the override flags on `sub`.  The
// epsilon/mu single-value overrides are skipped for the sweep commands,
// which own those names as grid lists.
void add_common_flags(CLI::App* sub, CommonFlags* flags,
                      bool with_epsilon_mu) {
  sub->add_option("-c,--config", flags->config_path, "experiment config file")
      ->required();
  sub->add_option("--out", flags->out_dir, "output directory (default: out)");
  flags->seed_opt =
      sub->add_option("--seed", flags->seed, "override base_seed");
  flags->workers_opt =
      sub->add_option("--workers", flags->workers, "override worker threads");
  flags->strategy_opt = sub->add_option(
      "--strategy", flags->strategy,
      "override strategy (fedavg|fedprox|local_dp|aldp|secagg)");
  flags->clients_opt =
      sub->add_option("--clients", flags->clients, "override client count");
  if (with_epsilon_mu) {
    flags->epsilon_opt = sub->add_option("--epsilon", flags->epsilon,
                                         "override the starting budget");
    flags->mu_opt =
        sub->add_option("--mu", flags->mu, "override the proximal strength");
  }
}

// Loads the config file, applies flag overrides, and resolves defaults.
// Overrides land before finalize so derived values (data seed, privacy
// mode) follow the overridden fields.
ExperimentConfig resolve_config(const CommonFlags& flags) {
  ExperimentConfig config = fedsim::load_config(flags.config_path);
  if (flags.seed_opt != nullptr && flags.seed_opt->count() > 0) {
    config.base_seed = flags.seed;
  }
  if (flags.workers_opt != nullptr && flags.workers_opt->count() > 0) {
    config.workers = flags.workers;
  }
  if (flags.strategy_opt != nullptr && flags.strategy_opt->count() > 0) {
    config.strategy.kind = fedsim::parse_strategy(flags.strategy);
  }
  if (flags.clients_opt != nullptr && flags.clients_opt->count() > 0) {
    config.partition.n_clients = flags.clients;
  }
  if (flags.epsilon_opt != nullptr && flags.epsilon_opt->count() > 0) {
    config.privacy.epsilon0 = flags.epsilon;
  }
  if (flags.mu_opt != nullptr && flags.mu_opt->count() > 0) {
    config.strategy.mu = flags.mu;
    config.mu_set = true;
  }
  fedsim::finalize(config);
  return config;
}

void write_resolved(const std::string& dir, const ExperimentConfig& config) {
  fedsim::textio::write_file(dir + "/resolved_config.toml",
                             fedsim::render_config(config));
}

void write_run_artifacts(const std::string& dir,
                         const ExperimentConfig& config,
                         const fedsim::RepetitionResults& results,
                         const std::string& command) {
  write_resolved(dir, config);
  fedsim::textio::write_file(dir + "/rounds.csv",
                             fedsim::rounds_csv(results));
  fedsim::textio::write_file(dir + "/summary.json",
                             fedsim::summary_json(config, results, command));
  fedsim::textio::write_file(dir + "/privacy_ledger.csv",
                             fedsim::privacy_ledger_csv(results));
  fedsim::textio::write_file(dir + "/timings.csv",
                             fedsim::timings_csv(results));
}

int cmd_generate(const CommonFlags& flags) {
  const ExperimentConfig config = resolve_config(flags);
  const ExperimentData data = fedsim::materialize_data(config);
  fedsim::save_csv(data.dev, flags.out_dir + "/data.csv");
  fedsim::save_csv(data.test, flags.out_dir + "/test.csv");
  write_resolved(flags.out_dir, config);
  std::cout << "wrote " << data.dev.size() << " development and "
            << data.test.size() << " holdout records to " << flags.out_dir
            << "\n";
  return 0;
}

int cmd_partition(const std::string& input, std::size_t clients,
                  double train_ratio, std::uint64_t seed,
                  const std::string& out_dir) {
  const fedsim::SiteDataset ds = fedsim::load_csv(input);
  fedsim::PartitionSpec spec;
  spec.n_clients = clients;
  spec.train_ratio = train_ratio;
  spec.seed = seed;
  std::vector<std::string> warnings;
  const std::vector<fedsim::ClientPartition> parts =
      fedsim::partition(ds, spec, &warnings);

  nlohmann::ordered_json doc;
  doc["clients"] = nlohmann::ordered_json::array();
  for (const fedsim::ClientPartition& p : parts) {
    const std::string stem =
        out_dir + "/client_" + std::to_string(p.client_id);
    fedsim::save_csv(p.train, stem + "_train.csv");
    fedsim::save_csv(p.val, stem + "_val.csv");
    nlohmann::ordered_json row;
    row["client_id"] = p.client_id;
    row["sites"] = p.sites;
    row["n_records"] = p.train.size() + p.val.size();
    row["n_train"] = p.train.size();
    row["n_val"] = p.val.size();
    doc["clients"].push_back(row);
  }
  doc["warnings"] = warnings;
  fedsim::textio::write_file(out_dir + "/assignment.json",
                             doc.dump(2) + "\n");
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "partitioned " << ds.size() << " records across "
            << parts.size() << " clients into " << out_dir << "\n";
  return 0;
}

int cmd_train(const CommonFlags& flags, bool centralized) {
  const ExperimentConfig config = resolve_config(flags);
  const ExperimentData data = fedsim::materialize_data(config);
  const fedsim::RepetitionResults results =
      fedsim::run_repetitions(config, data.dev, data.test, centralized);
  const std::string command = centralized ? "centralized" : "train";
  write_run_artifacts(flags.out_dir, config, results, command);
  std::cout << command << ": " << results.runs.size()
            << " repetitions, test accuracy " << results.accuracy.mean
            << " +/- " << results.accuracy.stddev << "\n";
  return 0;
}

int cmd_ablate(const CommonFlags& flags) {
  const ExperimentConfig config = resolve_config(flags);
  const ExperimentData data = fedsim::materialize_data(config);
  const fedsim::AblationResult result =
      fedsim::run_ablation(config, data.dev, data.test, config.base_seed);
  write_resolved(flags.out_dir, config);
  fedsim::textio::write_file(flags.out_dir + "/ablation.json",
                             fedsim::ablation_json(config, result));
  std::cout << "ablation: " << result.clients.size()
            << " isolated clients plus the pooled baseline -> "
            << flags.out_dir << "/ablation.json\n";
  return 0;
}

int cmd_sweep_mu(const CommonFlags& flags,
                 const std::vector<double>& mu_values) {
  const ExperimentConfig config = resolve_config(flags);
  const ExperimentData data = fedsim::materialize_data(config);
  const std::vector<fedsim::MuSweepRow> rows =
      fedsim::run_mu_sweep(config, data.dev, data.test, mu_values);
  write_resolved(flags.out_dir, config);
  fedsim::textio::write_file(flags.out_dir + "/mu_sweep.json",
                             fedsim::mu_sweep_json(config, rows));
  std::cout << "mu sweep: " << rows.size() << " values -> " << flags.out_dir
            << "/mu_sweep.json\n";
  return 0;
}

int cmd_sweep_epsilon(const CommonFlags& flags,
                      const std::vector<double>& epsilon_values) {
  const ExperimentConfig config = resolve_config(flags);
  const ExperimentData data = fedsim::materialize_data(config);
  const std::vector<fedsim::EpsilonSweepRow> rows =
      fedsim::run_epsilon_sweep(config, data.dev, data.test, epsilon_values);
  write_resolved(flags.out_dir, config);
  fedsim::textio::write_file(flags.out_dir + "/epsilon_sweep.json",
                             fedsim::epsilon_sweep_json(config, rows));
  std::cout << "epsilon sweep: " << rows.size() << " values -> "
            << flags.out_dir << "/epsilon_sweep.json\n";
  return 0;
}

int cmd_report(const CommonFlags& flags) {
  const ExperimentConfig config = resolve_config(flags);
  const ExperimentData data = fedsim::materialize_data(config);
  const fedsim::RunResult run =
      fedsim::run_federated(config, data.dev, data.test, config.base_seed);
  write_resolved(flags.out_dir, config);
  fedsim::textio::write_file(flags.out_dir + "/metrics.json",
                             fedsim::test_report_json(run.test));
  fedsim::textio::write_file(flags.out_dir + "/confusion.csv",
                             fedsim::confusion_csv(run.test.cm));
  fedsim::textio::write_file(flags.out_dir + "/roc.csv",
                             fedsim::roc_csv(run.test.roc));
  std::cout << "report: best round " << run.best_round << ", test accuracy "
            << run.test.accuracy << " -> " << flags.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic federated-learning simulator"};
  app.require_subcommand(1);

  CommonFlags generate_flags;
  CLI::App* generate =
      app.add_subcommand("generate", "materialize the configured datasets");
  add_common_flags(generate, &generate_flags, false);

  std::string part_input;
  std::size_t part_clients = 0;
  double part_ratio = 0.8;
  std::uint64_t part_seed = 0;
  std::string part_out = "out";
  CLI::App* part = app.add_subcommand(
      "partition", "split a dataset across clients by site");
  part->add_option("--input", part_input, "dataset CSV")->required();
  part->add_option("--clients", part_clients, "number of clients")
      ->required();
  part->add_option("--train-ratio", part_ratio,
                   "per-client train fraction (default 0.8)");
  part->add_option("--seed", part_seed, "shuffle seed");
  part->add_option("--out", part_out, "output directory (default: out)");

  CommonFlags train_flags;
  CLI::App* train =
      app.add_subcommand("train", "run the federated experiment");
  add_common_flags(train, &train_flags, true);

  CommonFlags central_flags;
  CLI::App* central =
      app.add_subcommand("centralized", "run the pooled baseline");
  add_common_flags(central, &central_flags, true);

  CommonFlags ablate_flags;
  CLI::App* ablate =
      app.add_subcommand("ablate", "train each client in isolation");
  add_common_flags(ablate, &ablate_flags, true);

  CommonFlags mu_flags;
  std::vector<double> mu_values{1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 3.0, 5.0};
  CLI::App* sweep_mu = app.add_subcommand(
      "sweep-mu", "repeat the experiment across proximal strengths");
  add_common_flags(sweep_mu, &mu_flags, false);
  sweep_mu->add_option("--mu", mu_values,
                       "proximal strengths to sweep (default grid)");

  CommonFlags eps_flags;
  std::vector<double> epsilon_values{100.0, 500.0, 1000.0, 2000.0};
  CLI::App* sweep_eps = app.add_subcommand(
      "sweep-epsilon", "repeat the experiment across privacy budgets");
  add_common_flags(sweep_eps, &eps_flags, false);
  sweep_eps->add_option("--epsilon", epsilon_values,
                        "starting budgets to sweep (default grid)");

  CommonFlags report_flags;
  CLI::App* report = app.add_subcommand(
      "report", "evaluate one run's best checkpoint on the holdout");
  add_common_flags(report, &report_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(generate_flags);
    if (part->parsed()) {
      return cmd_partition(part_input, part_clients, part_ratio, part_seed,
                           part_out);
    }
    if (train->parsed()) return cmd_train(train_flags, false);
    if (central->parsed()) return cmd_train(central_flags, true);
    if (ablate->parsed()) return cmd_ablate(ablate_flags);
    if (sweep_mu->parsed()) return cmd_sweep_mu(mu_flags, mu_values);
    if (sweep_eps->parsed()) return cmd_sweep_epsilon(eps_flags, epsilon_values);
    if (report->parsed()) return cmd_report(report_flags);
  } catch (const fedsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
