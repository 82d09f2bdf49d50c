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

// Aggregation strategies and local-objective variants.

#ifndef FEDSIM_STRATEGIES_HPP_
#define FEDSIM_STRATEGIES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/model.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/tensor.hpp"

namespace fedsim {

enum class StrategyKind { kFedAvg, kFedProx, kSecAgg, kLocalDp, kAldp };

const char* to_string(StrategyKind v);
StrategyKind parse_strategy(const std::string& s);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kFedAvg;
  double mu = 0.0;               // fedprox proximal strength
  double client_fraction = 1.0;  // in (0, 1]
  std::size_t min_fit_clients = 1;
};

void validate(const StrategyConfig& config, std::size_t n_clients);

struct ClientUpdate {
  std::size_t client_id = 0;
  ParameterSet params;         // locally trained (and possibly noised)
  std::size_t n_samples = 0;   // training-set size used as FedAvg weight
  double train_loss = 0.0;     // mean local batch loss
  double train_ms = 0.0;
  double privacy_ms = 0.0;
};

// Sample-count-weighted elementwise mean of the clients' parameters.
ParameterSet fedavg_aggregate(const std::vector<ClientUpdate>& updates);

// Proximal local objective: weighted CE plus (mu/2)*||w - w_global||^2;
// gradients gain mu*(w - w_global).  With mu = 0 this is exactly
// weighted_ce_loss.
double fedprox_local_objective(const ParameterSet& params,
                               const ParameterSet& global_params,
                               const SiteDataset& data,
                               const std::vector<std::size_t>& indices,
                               const std::vector<double>& weights, double mu,
                               ParameterSet* grads);

// Everything one client needs for one round.
struct ClientRoundInput {
  const ParameterSet* global = nullptr;
  const ClientPartition* partition = nullptr;
  const StrategyConfig* strategy = nullptr;
  const TrainSpec* train = nullptr;
  const PrivacySpec* privacy = nullptr;  // local_dp/aldp only
  PrivacyState* privacy_state = nullptr;
  std::vector<double> class_weights;
  std::uint64_t batch_seed = 0;
  std::uint64_t global_step = 0;
  std::uint64_t total_steps = 1;
};

// Local training from the global model (proximal objective for fedprox),
// followed by the privacy transform when configured.  For local_dp/aldp the
// update delta w_local - w_global is clipped/noised and re-anchored at the
// global model.
ClientUpdate run_client_round(const ClientRoundInput& input);

}  // namespace fedsim

#endif  // FEDSIM_STRATEGIES_HPP_
