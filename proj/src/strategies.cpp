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

#include "fedsim/strategies.hpp"

#include <chrono>

#include "fedsim/error.hpp"
#include "fedsim/kernels.hpp"

namespace fedsim {

const char* to_string(StrategyKind v) {
  switch (v) {
    case StrategyKind::kFedAvg:
      return "fedavg";
    case StrategyKind::kFedProx:
      return "fedprox";
    case StrategyKind::kSecAgg:
      return "secagg";
    case StrategyKind::kLocalDp:
      return "local_dp";
    case StrategyKind::kAldp:
      return "aldp";
  }
  return "unknown";
}

StrategyKind parse_strategy(const std::string& s) {
  if (s == "fedavg") return StrategyKind::kFedAvg;
  if (s == "fedprox") return StrategyKind::kFedProx;
  if (s == "secagg") return StrategyKind::kSecAgg;
  if (s == "local_dp") return StrategyKind::kLocalDp;
  if (s == "aldp") return StrategyKind::kAldp;
  throw ConfigError("unknown strategy '" + s +
                    "' (expected fedavg, fedprox, secagg, local_dp or aldp)");
}

void validate(const StrategyConfig& config, std::size_t n_clients) {
  if (!(config.client_fraction > 0.0 && config.client_fraction <= 1.0)) {
    throw ConfigError("client_fraction must lie in (0, 1]");
  }
  if (config.mu < 0.0) throw ConfigError("mu must be nonnegative");
  if (config.kind != StrategyKind::kFedProx && config.mu != 0.0) {
    throw ConfigError("mu is only meaningful for the fedprox strategy");
  }
  if (config.kind == StrategyKind::kSecAgg && n_clients < 3) {
    throw ConfigError("secagg requires at least 3 clients");
  }
  if (config.min_fit_clients > n_clients) {
    throw ConfigError("min_fit_clients cannot exceed the client count");
  }
}

ParameterSet fedavg_aggregate(const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) {
    throw ConfigError("fedavg_aggregate: no client updates");
  }
  double total = 0.0;
  for (const ClientUpdate& u : updates) {
    if (u.n_samples == 0) {
      throw ConfigError("fedavg_aggregate: client " +
                        std::to_string(u.client_id) + " reports 0 samples");
    }
    updates.front().params.require_conformant(u.params);
    total += static_cast<double>(u.n_samples);
  }
  ParameterSet result = ParameterSet::zeros_like(updates.front().params);
  for (const ClientUpdate& u : updates) {
    axpy_inplace(result, static_cast<double>(u.n_samples) / total, u.params);
  }
  return result;
}

double fedprox_local_objective(const ParameterSet& params,
                               const ParameterSet& global_params,
                               const SiteDataset& data,
                               const std::vector<std::size_t>& indices,
                               const std::vector<double>& weights, double mu,
                               ParameterSet* grads) {
  double loss = weighted_ce_loss(params, data, indices, weights, grads);
  if (mu > 0.0) {
    params.require_conformant(global_params);
    ParameterSet diff = sub(params, global_params);
    loss += 0.5 * mu * squared_norm(diff);
    if (grads != nullptr) axpy_inplace(*grads, mu, diff);
  }
  return loss;
}

ClientUpdate run_client_round(const ClientRoundInput& input) {
  if (input.global == nullptr || input.partition == nullptr ||
      input.strategy == nullptr || input.train == nullptr) {
    throw ConfigError("run_client_round: missing inputs");
  }
  const StrategyKind kind = input.strategy->kind;
  const bool needs_privacy =
      kind == StrategyKind::kLocalDp || kind == StrategyKind::kAldp;
  if (needs_privacy &&
      (input.privacy == nullptr || input.privacy_state == nullptr)) {
    throw ConfigError("run_client_round: privacy strategy without a "
                      "privacy spec/state");
  }

  using Clock = std::chrono::steady_clock;
  const auto train_start = Clock::now();

  RoundContext ctx;
  ctx.batch_seed = input.batch_seed;
  ctx.global_step = input.global_step;
  ctx.total_steps = input.total_steps;
  ctx.class_weights = input.class_weights;
  if (kind == StrategyKind::kFedProx) {
    ctx.prox_reference = input.global;
    ctx.mu = input.strategy->mu;
  }

  LocalTrainResult trained =
      local_train(*input.global, input.partition->train, *input.train, ctx);

  ClientUpdate update;
  update.client_id = input.partition->client_id;
  update.n_samples = input.partition->train.size();
  update.train_loss = trained.mean_loss;
  const auto train_end = Clock::now();
  update.train_ms =
      std::chrono::duration<double, std::milli>(train_end - train_start)
          .count();

  if (needs_privacy) {
    // Noise the round delta, then re-anchor at the global model so C acts
    // as the sensitivity of what a client actually contributes.
    ParameterSet delta = sub(trained.params, *input.global);
    ParameterSet noised =
        apply_local_dp(delta, *input.privacy, *input.privacy_state);
    update.params = add(*input.global, noised);
  } else {
    update.params = std::move(trained.params);
  }
  update.privacy_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - train_end)
          .count();
  return update;
}

}  // namespace fedsim
