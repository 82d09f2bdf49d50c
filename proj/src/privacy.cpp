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

#include "fedsim/privacy.hpp"

#include <cmath>

#include "fedsim/error.hpp"
#include "fedsim/kernels.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

const char* to_string(PrivacyMode v) {
  return v == PrivacyMode::kFixed ? "fixed" : "adaptive";
}

void validate(const PrivacySpec& spec) {
  if (!(spec.epsilon0 > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
    throw ConfigError("delta must lie strictly between 0 and 1");
  }
  if (!(spec.clipping_norm > 0.0)) {
    throw ConfigError("clipping_norm must be positive");
  }
  if (!(spec.decay_factor > 0.0 && spec.decay_factor < 1.0)) {
    throw ConfigError("decay_factor must lie strictly between 0 and 1");
  }
  if (!(spec.epsilon_min > 0.0)) {
    throw ConfigError("min_epsilon must be positive");
  }
  if (!(spec.epsilon_max > spec.epsilon_min)) {
    throw ConfigError("max_epsilon must exceed min_epsilon");
  }
  if (spec.epsilon0 < spec.epsilon_min || spec.epsilon0 > spec.epsilon_max) {
    throw ConfigError("epsilon must lie within [min_epsilon, max_epsilon]");
  }
  if (spec.forced_sigma_base && *spec.forced_sigma_base < 0.0) {
    throw ConfigError("forced sigma must be nonnegative");
  }
}

double epsilon_at(const PrivacySpec& spec, std::size_t t) {
  if (t < 1) throw ConfigError("epsilon_at: round index starts at 1");
  const double growth = std::pow(1.0 / spec.decay_factor,
                                 static_cast<double>(t - 1));
  double eps = spec.epsilon0 * growth;
  if (eps < spec.epsilon_min) eps = spec.epsilon_min;
  if (std::isfinite(spec.epsilon_max) && eps > spec.epsilon_max) {
    eps = spec.epsilon_max;
  }
  return eps;
}

double sigma_base(double clipping_norm, double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must lie strictly between 0 and 1");
  }
  return clipping_norm / epsilon * std::sqrt(2.0 * std::log(1.25 / delta));
}

std::vector<double> tensor_scales(const ParameterSet& params) {
  if (params.tensors.empty()) {
    throw ConformanceError("tensor_scales: empty parameter set");
  }
  std::vector<double> stds;
  stds.reserve(params.tensors.size());
  for (const Tensor& t : params.tensors) {
    const std::size_t n = t.size();
    const double mean = kernels::sum(t.data.data(), n) /
                        static_cast<double>(n);
    double sq = 0.0;
    for (double v : t.data) {
      const double d = v - mean;
      sq += d * d;
    }
    stds.push_back(std::sqrt(sq / static_cast<double>(n)));
  }
  double mean_std = 0.0;
  for (double s : stds) mean_std += s;
  mean_std /= static_cast<double>(stds.size());
  if (mean_std < 1e-12) mean_std = 1e-12;

  std::vector<double> scales(stds.size());
  for (std::size_t i = 0; i < stds.size(); ++i) {
    double rel = stds[i] / mean_std;
    if (rel < 0.1) rel = 0.1;
    if (rel > 1.0) rel = 1.0;
    scales[i] = rel;
  }
  return scales;
}

ParameterSet clip_to_norm(const ParameterSet& update, double clipping_norm) {
  const double norm = std::sqrt(squared_norm(update));
  if (norm <= clipping_norm) return update;
  return scale(update, clipping_norm / norm);
}

ParameterSet apply_local_dp(const ParameterSet& update,
                            const PrivacySpec& spec, PrivacyState& state) {
  validate(spec);
  state.t += 1;
  state.epsilon_t = spec.mode == PrivacyMode::kAdaptive
                        ? epsilon_at(spec, state.t)
                        : spec.epsilon0;

  const double base =
      spec.forced_sigma_base
          ? *spec.forced_sigma_base
          : sigma_base(spec.clipping_norm, state.epsilon_t, spec.delta);

  ParameterSet noised =
      spec.clip_update ? clip_to_norm(update, spec.clipping_norm) : update;

  PrivacyLedgerRow row;
  row.round = state.t;
  row.epsilon_t = state.epsilon_t;
  row.sigma_base = base;
  if (spec.mode == PrivacyMode::kAdaptive) {
    const std::vector<double> scales = tensor_scales(noised);
    for (double s : scales) row.tensor_sigmas.push_back(base * s);
  } else {
    row.tensor_sigmas.assign(noised.tensors.size(), base);
  }

  rng::Stream stream(
      rng::derive(spec.seed, rng::kTagNoise, state.client_id, state.t));
  for (std::size_t i = 0; i < noised.tensors.size(); ++i) {
    const double sigma = row.tensor_sigmas[i];
    for (double& v : noised.tensors[i].data) {
      v += sigma * stream.next_gaussian();
    }
  }
  state.ledger.push_back(std::move(row));
  return noised;
}

}  // namespace fedsim
