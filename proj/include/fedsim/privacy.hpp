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

// Local differential privacy for parameter updates: Gaussian-mechanism
// calibration, a fixed-noise mode, and an adaptive mode where the budget
// grows exponentially per round and noise is scaled per tensor by relative
// standard deviation.

#ifndef FEDSIM_PRIVACY_HPP_
#define FEDSIM_PRIVACY_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "fedsim/tensor.hpp"

namespace fedsim {

enum class PrivacyMode { kFixed, kAdaptive };

const char* to_string(PrivacyMode v);

struct PrivacySpec {
  double epsilon0 = 100.0;
  double delta = 1e-5;
  double clipping_norm = 1.0;
  double decay_factor = 0.95;  // alpha in (0,1); budget grows as (1/alpha)^t
  double epsilon_min = 1e-3;
  double epsilon_max = std::numeric_limits<double>::infinity();
  PrivacyMode mode = PrivacyMode::kFixed;
  bool clip_update = true;
  std::uint64_t seed = 0;
  // Test hook: when set, overrides the calibrated base noise scale.
  std::optional<double> forced_sigma_base;
};

void validate(const PrivacySpec& spec);

struct PrivacyLedgerRow {
  std::size_t round = 0;  // 1-based
  double epsilon_t = 0.0;
  double sigma_base = 0.0;
  std::vector<double> tensor_sigmas;  // per tensor, in parameter order
};

// Per-client mutable state: the round counter and the cumulative ledger.
struct PrivacyState {
  std::size_t client_id = 0;
  std::size_t t = 0;  // rounds applied so far
  double epsilon_t = 0.0;
  std::vector<PrivacyLedgerRow> ledger;
};

// Budget at round t (t >= 1): epsilon0 * (1/alpha)^(t-1), clamped into
// [epsilon_min, epsilon_max] (upper clamp skipped when infinite).
double epsilon_at(const PrivacySpec& spec, std::size_t t);

// Gaussian-mechanism noise scale sigma = (C / epsilon) * sqrt(2*ln(1.25/delta)).
double sigma_base(double clipping_norm, double epsilon, double delta);

// Per-tensor noise scale factors: std_i / max(mean(std), 1e-12), clipped to
// [0.1, 1.0].  std is the population standard deviation of the tensor's
// elements.
std::vector<double> tensor_scales(const ParameterSet& params);

// Scales the flattened update down to L2 norm <= clipping_norm (identity
// when already within the ball).
ParameterSet clip_to_norm(const ParameterSet& update, double clipping_norm);

// Applies the configured mechanism to one round's update for the client in
// `state`: optional clipping, then i.i.d. Gaussian noise — a single sigma
// in fixed mode, per-tensor sigmas in adaptive mode.  Advances state.t,
// recomputes state.epsilon_t, and appends a ledger row.  Deterministic in
// (spec.seed, state.client_id, round).
ParameterSet apply_local_dp(const ParameterSet& update,
                            const PrivacySpec& spec, PrivacyState& state);

}  // namespace fedsim

#endif  // FEDSIM_PRIVACY_HPP_
