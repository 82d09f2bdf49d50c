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

#include "fedsim/outputs.hpp"

#include <sstream>

#include "json.hpp"

#include "fedsim/textio.hpp"

namespace fedsim {
namespace {

using json = nlohmann::ordered_json;
using textio::format_double;

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << (i == 0 ? "" : "|") << v[i];
  }
  return out.str();
}

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << (i == 0 ? "" : "|") << format_double(v[i]);
  }
  return out.str();
}

json stat_json(const MetricStat& stat) {
  json j;
  j["mean"] = stat.mean;
  j["std"] = stat.stddev;
  j["values"] = stat.values;
  return j;
}

json test_json(const TestReport& report) {
  json j;
  j["accuracy"] = report.accuracy;
  j["f1_ad"] = report.f1_ad;
  j["f1_macro"] = report.f1_macro;
  if (report.auc_defined) {
    j["auc"] = report.auc;
  } else {
    j["auc"] = nullptr;
  }
  j["loss"] = report.loss;
  j["confusion"] = {{"tp", report.cm.tp},
                    {"fn", report.cm.fn},
                    {"fp", report.cm.fp},
                    {"tn", report.cm.tn}};
  return j;
}

json run_json(std::uint64_t run_seed, const RunResult& run) {
  json j;
  j["run_seed"] = run_seed;
  j["best_round"] = run.best_round;
  j["best_val_accuracy"] = run.best_val_accuracy;
  j["test"] = test_json(run.test);
  j["events"] = run.events;
  return j;
}

json metrics_json(const RepetitionResults& results) {
  json j;
  j["accuracy"] = stat_json(results.accuracy);
  j["f1_ad"] = stat_json(results.f1_ad);
  j["f1_macro"] = stat_json(results.f1_macro);
  j["auc"] = stat_json(results.auc);
  j["best_val_accuracy"] = stat_json(results.best_val_accuracy);
  return j;
}

json header_json(const ExperimentConfig& config, const std::string& command) {
  json j;
  j["command"] = command;
  j["strategy"] = to_string(config.strategy.kind);
  j["model"] = to_string(config.train.model);
  j["clients"] = config.partition.n_clients;
  j["fl_rounds"] = config.fl_rounds;
  j["repetitions"] = config.repetitions;
  j["base_seed"] = config.base_seed;
  return j;
}

}  // namespace

std::string rounds_csv(const RepetitionResults& results) {
  std::ostringstream out;
  out << "repetition,round,participants,client_losses,train_loss,evaluated,"
         "val_accuracy,val_f1,checkpointed,skipped,epsilon_t\n";
  for (std::size_t rep = 0; rep < results.runs.size(); ++rep) {
    for (const RoundReport& r : results.runs[rep].rounds) {
      out << rep << ',' << r.round << ',' << join_sizes(r.participants) << ','
          << join_doubles(r.client_losses) << ',';
      if (!r.skipped) out << format_double(r.train_loss);
      out << ',' << (r.evaluated ? 1 : 0) << ',';
      if (r.evaluated) {
        out << format_double(r.val_accuracy) << ','
            << format_double(r.val_f1);
      } else {
        out << ',';
      }
      out << ',' << (r.checkpointed ? 1 : 0) << ',' << (r.skipped ? 1 : 0)
          << ',';
      if (r.has_epsilon) out << format_double(r.epsilon_t);
      out << '\n';
    }
  }
  return out.str();
}

std::string timings_csv(const RepetitionResults& results) {
  std::ostringstream out;
  out << "repetition,round,train_ms,privacy_ms,transport_ms,aggregate_ms,"
         "eval_ms,total_ms\n";
  for (std::size_t rep = 0; rep < results.runs.size(); ++rep) {
    for (const RoundReport& r : results.runs[rep].rounds) {
      const PhaseTimings& t = r.timings;
      out << rep << ',' << r.round << ',' << format_double(t.train_ms) << ','
          << format_double(t.privacy_ms) << ','
          << format_double(t.transport_ms) << ','
          << format_double(t.aggregate_ms) << ',' << format_double(t.eval_ms)
          << ',' << format_double(t.total_ms) << '\n';
    }
  }
  return out.str();
}

std::string privacy_ledger_csv(const RepetitionResults& results) {
  // Column layout follows the parameter order of the trained model.
  const ParameterSet* reference = nullptr;
  for (const RunResult& run : results.runs) {
    if (!run.privacy_ledger.empty()) {
      reference = &run.best_params;
      break;
    }
  }
  std::ostringstream out;
  out << "repetition,client_id,round,epsilon_t,sigma_base";
  if (reference != nullptr) {
    for (const Tensor& t : reference->tensors) {
      out << ",sigma_" << t.name;
    }
  }
  out << '\n';
  for (std::size_t rep = 0; rep < results.runs.size(); ++rep) {
    for (const ClientLedgerEntry& e : results.runs[rep].privacy_ledger) {
      out << rep << ',' << e.client_id << ',' << e.global_round << ','
          << format_double(e.row.epsilon_t) << ','
          << format_double(e.row.sigma_base);
      for (const double s : e.row.tensor_sigmas) {
        out << ',' << format_double(s);
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string summary_json(const ExperimentConfig& config,
                         const RepetitionResults& results,
                         const std::string& command) {
  json j = header_json(config, command);
  j["metrics"] = metrics_json(results);
  json runs = json::array();
  for (std::size_t i = 0; i < results.runs.size(); ++i) {
    runs.push_back(run_json(results.run_seeds[i], results.runs[i]));
  }
  j["runs"] = runs;
  return j.dump(2) + "\n";
}

std::string ablation_json(const ExperimentConfig& config,
                          const AblationResult& result) {
  json j = header_json(config, "ablate");
  json clients = json::array();
  for (const AblationRow& row : result.clients) {
    json c;
    c["client_id"] = row.client_id;
    c["sites"] = row.sites;
    c["n_train"] = row.n_train;
    c["best_round"] = row.best_round;
    c["best_val_accuracy"] = row.best_val_accuracy;
    c["test"] = test_json(row.test);
    clients.push_back(c);
  }
  j["clients"] = clients;
  json central;
  central["best_round"] = result.centralized.best_round;
  central["best_val_accuracy"] = result.centralized.best_val_accuracy;
  central["test"] = test_json(result.centralized.test);
  j["centralized"] = central;
  return j.dump(2) + "\n";
}

std::string mu_sweep_json(const ExperimentConfig& config,
                          const std::vector<MuSweepRow>& rows) {
  json j = header_json(config, "sweep-mu");
  j["strategy"] = "fedprox";
  json table = json::array();
  for (const MuSweepRow& row : rows) {
    json r;
    r["mu"] = row.mu;
    r["metrics"] = metrics_json(row.results);
    table.push_back(r);
  }
  j["rows"] = table;
  return j.dump(2) + "\n";
}

std::string epsilon_sweep_json(const ExperimentConfig& config,
                               const std::vector<EpsilonSweepRow>& rows) {
  json j = header_json(config, "sweep-epsilon");
  json table = json::array();
  for (const EpsilonSweepRow& row : rows) {
    json r;
    r["epsilon"] = row.epsilon;
    r["metrics"] = metrics_json(row.results);
    table.push_back(r);
  }
  j["rows"] = table;
  return j.dump(2) + "\n";
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  const double n0 = static_cast<double>(cm.tn + cm.fp);
  const double n1 = static_cast<double>(cm.fn + cm.tp);
  const double r00 = n0 > 0.0 ? static_cast<double>(cm.tn) / n0 : 0.0;
  const double r01 = n0 > 0.0 ? static_cast<double>(cm.fp) / n0 : 0.0;
  const double r10 = n1 > 0.0 ? static_cast<double>(cm.fn) / n1 : 0.0;
  const double r11 = n1 > 0.0 ? static_cast<double>(cm.tp) / n1 : 0.0;
  std::ostringstream out;
  out << "label,pred_0,pred_1\n";
  out << "0," << format_double(r00) << ',' << format_double(r01) << '\n';
  out << "1," << format_double(r10) << ',' << format_double(r11) << '\n';
  return out.str();
}

std::string roc_csv(const RocResult& roc) {
  std::ostringstream out;
  out << "threshold,tpr,fpr\n";
  for (const RocPoint& p : roc.points) {
    out << format_double(p.threshold) << ',' << format_double(p.tpr) << ','
        << format_double(p.fpr) << '\n';
  }
  return out.str();
}

std::string test_report_json(const TestReport& report) {
  return test_json(report).dump(2) + "\n";
}

}  // namespace fedsim
