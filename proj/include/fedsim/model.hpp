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

// Small differentiable classifiers over named parameter tensors: logistic
// regression ({"W": d×L, "b": L}) and a one-hidden-layer tanh MLP
// ({"W1": d×h, "b1": h, "W2": h×L, "b2": L}), with weighted cross-entropy,
// analytic gradients, SGD/AdamW, and constant/cosine LR schedules.

#ifndef FEDSIM_MODEL_HPP_
#define FEDSIM_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/tensor.hpp"

namespace fedsim {

enum class ModelKind { kLogreg, kMlp };
enum class OptimizerKind { kSgd, kAdamW };
enum class LrSchedule { kConstant, kCosine };
enum class LossWeighting { kUniform, kInverse };

const char* to_string(ModelKind v);
const char* to_string(OptimizerKind v);
const char* to_string(LrSchedule v);
const char* to_string(LossWeighting v);

// Throw ConfigError on unknown names.
ModelKind parse_model_kind(const std::string& s);
OptimizerKind parse_optimizer(const std::string& s);
LrSchedule parse_lr_schedule(const std::string& s);
LossWeighting parse_loss_weighting(const std::string& s);

struct TrainSpec {
  ModelKind model = ModelKind::kLogreg;
  std::size_t hidden_width = 16;  // mlp only
  double learning_rate = 1e-4;
  OptimizerKind optimizer = OptimizerKind::kAdamW;
  double weight_decay = 1e-2;
  LrSchedule lr_schedule = LrSchedule::kCosine;
  std::size_t batch_size = 16;
  std::size_t local_epochs = 1;
  LossWeighting weighting = LossWeighting::kInverse;
  std::uint64_t seed = 0;
};

void validate(const TrainSpec& spec);

struct Prediction {
  std::vector<double> probabilities;  // softmax, sums to 1
  int label = 0;                      // argmax, ties to the lowest index
};

// Weight tensors drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)],
// biases zero.  Deterministic in seed.
ParameterSet init_params(ModelKind kind, std::size_t dimension,
                         int num_classes, std::size_t hidden_width,
                         std::uint64_t seed);

Prediction predict(const ParameterSet& params,
                   const std::vector<double>& features);

// Mean weighted cross-entropy over the records of `data` selected by
// `indices`:  L = -(1/N) * sum_i w_{y_i} * log(p_{y_i}), with the
// probability inside the log floored at 1e-12.  `weights` has one entry
// per class (empty = all ones).  When `grads` is non-null it receives the
// analytic gradient (structure of `params`).
double weighted_ce_loss(const ParameterSet& params, const SiteDataset& data,
                        const std::vector<std::size_t>& indices,
                        const std::vector<double>& weights,
                        ParameterSet* grads);

// Per-call context for one local training pass.
struct RoundContext {
  std::uint64_t batch_seed = 0;   // seeds this call's epoch shuffles
  std::uint64_t global_step = 0;  // optimizer steps completed before the call
  std::uint64_t total_steps = 1;  // cosine period T in steps
  const ParameterSet* prox_reference = nullptr;  // proximal anchor, may be null
  double mu = 0.0;                               // proximal strength
  std::vector<double> class_weights;             // empty = uniform
};

struct LocalTrainResult {
  ParameterSet params;
  double mean_loss = 0.0;  // mean pre-update batch loss over all steps
  std::uint64_t steps = 0;
};

// Runs spec.local_epochs passes of seeded mini-batch training from
// `params`.  The optimizer state is fresh for the call; the LR schedule
// position is ctx.global_step within ctx.total_steps.  When
// ctx.prox_reference is set and ctx.mu > 0, each step optimizes the
// proximal objective  batch_loss + (mu/2)*||w - w_ref||^2.
LocalTrainResult local_train(const ParameterSet& params,
                             const SiteDataset& data, const TrainSpec& spec,
                             const RoundContext& ctx);

// Cosine schedule value for 0-based step t of T:  0.5*eta0*(1+cos(pi*t/T)).
double learning_rate_at(const TrainSpec& spec, std::uint64_t step,
                        std::uint64_t total_steps);

// Binary checkpoint (magic "FSCP", version, ordered name/shape/float64
// blocks, little-endian) plus a <path>.json sidecar holding the TrainSpec.
void save_checkpoint(const std::string& path, const ParameterSet& params,
                     const TrainSpec& spec);
ParameterSet load_checkpoint(const std::string& path,
                             TrainSpec* spec = nullptr);

}  // namespace fedsim

#endif  // FEDSIM_MODEL_HPP_
