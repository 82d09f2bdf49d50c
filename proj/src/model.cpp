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

#include "fedsim/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fedsim/error.hpp"
#include "fedsim/kernels.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/textio.hpp"

namespace fedsim {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

const char* to_string(ModelKind v) {
  return v == ModelKind::kLogreg ? "logreg" : "mlp";
}
const char* to_string(OptimizerKind v) {
  return v == OptimizerKind::kSgd ? "sgd" : "adamw";
}
const char* to_string(LrSchedule v) {
  return v == LrSchedule::kConstant ? "constant" : "cosine";
}
const char* to_string(LossWeighting v) {
  return v == LossWeighting::kUniform ? "uniform" : "inverse";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "logreg") return ModelKind::kLogreg;
  if (s == "mlp") return ModelKind::kMlp;
  throw ConfigError("unknown model '" + s + "' (expected logreg or mlp)");
}
OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adamw") return OptimizerKind::kAdamW;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adamw)");
}
LrSchedule parse_lr_schedule(const std::string& s) {
  if (s == "constant") return LrSchedule::kConstant;
  if (s == "cosine") return LrSchedule::kCosine;
  throw ConfigError("unknown lr_scheduler '" + s +
                    "' (expected constant or cosine)");
}
LossWeighting parse_loss_weighting(const std::string& s) {
  if (s == "uniform") return LossWeighting::kUniform;
  if (s == "inverse") return LossWeighting::kInverse;
  throw ConfigError("unknown weighted_loss '" + s +
                    "' (expected uniform or inverse)");
}

void validate(const TrainSpec& spec) {
  if (!(spec.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (spec.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (spec.local_epochs == 0) {
    throw ConfigError("local_epochs must be positive");
  }
  if (spec.model == ModelKind::kMlp && spec.hidden_width == 0) {
    throw ConfigError("hidden_width must be positive for mlp");
  }
  if (!(spec.weight_decay >= 0.0)) {
    throw ConfigError("weight_decay must be nonnegative");
  }
}

ParameterSet init_params(ModelKind kind, std::size_t dimension,
                         int num_classes, std::size_t hidden_width,
                         std::uint64_t seed) {
  if (dimension == 0) throw ConfigError("dimension must be positive");
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  const std::size_t classes = static_cast<std::size_t>(num_classes);

  ParameterSet params;
  if (kind == ModelKind::kLogreg) {
    params.tensors.push_back(make_tensor("W", {dimension, classes}));
    params.tensors.push_back(make_tensor("b", {classes}));
  } else {
    if (hidden_width == 0) throw ConfigError("hidden_width must be positive");
    params.tensors.push_back(make_tensor("W1", {dimension, hidden_width}));
    params.tensors.push_back(make_tensor("b1", {hidden_width}));
    params.tensors.push_back(make_tensor("W2", {hidden_width, classes}));
    params.tensors.push_back(make_tensor("b2", {classes}));
  }

  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    Tensor& t = params.tensors[i];
    if (t.shape.size() != 2) continue;  // biases stay zero
    const double scale = 1.0 / std::sqrt(static_cast<double>(t.shape[0]));
    rng::Stream stream(rng::derive(seed, rng::kTagInit, i));
    for (double& w : t.data) {
      w = scale * (2.0 * stream.next_unit() - 1.0);
    }
  }
  return params;
}

namespace {

bool is_mlp(const ParameterSet& params) {
  if (params.tensors.size() == 2) return false;
  if (params.tensors.size() == 4) return true;
  throw ConformanceError("parameter set is neither logreg nor mlp shaped");
}

void softmax_inplace(std::vector<double>& z) {
  double max_z = z[0];
  for (double v : z) max_z = v > max_z ? v : max_z;
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - max_z);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

struct ForwardPass {
  std::vector<double> hidden;  // tanh activations; empty for logreg
  std::vector<double> probs;
};

ForwardPass forward(const ParameterSet& params,
                    const std::vector<double>& x) {
  ForwardPass fp;
  if (!is_mlp(params)) {
    const Tensor& w = params.tensors[0];
    const Tensor& b = params.tensors[1];
    if (x.size() != w.shape[0]) {
      throw ConformanceError("feature length " + std::to_string(x.size()) +
                             " does not match model dimension " +
                             std::to_string(w.shape[0]));
    }
    fp.probs = b.data;
    kernels::matvec_rows(fp.probs.data(), x.data(), w.data.data(), w.shape[0],
                         w.shape[1]);
    softmax_inplace(fp.probs);
    return fp;
  }
  const Tensor& w1 = params.tensors[0];
  const Tensor& b1 = params.tensors[1];
  const Tensor& w2 = params.tensors[2];
  const Tensor& b2 = params.tensors[3];
  if (x.size() != w1.shape[0]) {
    throw ConformanceError("feature length " + std::to_string(x.size()) +
                           " does not match model dimension " +
                           std::to_string(w1.shape[0]));
  }
  fp.hidden = b1.data;
  kernels::matvec_rows(fp.hidden.data(), x.data(), w1.data.data(), w1.shape[0],
                       w1.shape[1]);
  for (double& h : fp.hidden) h = std::tanh(h);
  fp.probs = b2.data;
  kernels::matvec_rows(fp.probs.data(), fp.hidden.data(), w2.data.data(),
                       w2.shape[0], w2.shape[1]);
  softmax_inplace(fp.probs);
  return fp;
}

}  // namespace

Prediction predict(const ParameterSet& params,
                   const std::vector<double>& features) {
  ForwardPass fp = forward(params, features);
  Prediction pred;
  pred.label = 0;
  for (std::size_t c = 1; c < fp.probs.size(); ++c) {
    if (fp.probs[c] > fp.probs[static_cast<std::size_t>(pred.label)]) {
      pred.label = static_cast<int>(c);
    }
  }
  pred.probabilities = std::move(fp.probs);
  return pred;
}

double weighted_ce_loss(const ParameterSet& params, const SiteDataset& data,
                        const std::vector<std::size_t>& indices,
                        const std::vector<double>& weights,
                        ParameterSet* grads) {
  if (indices.empty()) throw ConfigError("weighted_ce_loss: empty batch");
  const bool mlp = is_mlp(params);
  const std::size_t num_classes =
      params.tensors[mlp ? 3 : 1].shape[0];
  if (!weights.empty() && weights.size() != num_classes) {
    throw ConformanceError("class weight vector length " +
                           std::to_string(weights.size()) +
                           " does not match class count " +
                           std::to_string(num_classes));
  }
  if (grads != nullptr) *grads = ParameterSet::zeros_like(params);

  const double inv_n = 1.0 / static_cast<double>(indices.size());
  double log_sum = 0.0;
  std::vector<double> dz(num_classes);
  std::vector<double> dhidden;

  for (std::size_t idx : indices) {
    if (idx >= data.records.size()) {
      throw ConformanceError("batch index out of range");
    }
    const SiteRecord& rec = data.records[idx];
    const std::size_t y = static_cast<std::size_t>(rec.label);
    if (y >= num_classes) {
      throw ConformanceError("record label " + std::to_string(rec.label) +
                             " outside model class range");
    }
    ForwardPass fp = forward(params, rec.features);
    const double w = weights.empty() ? 1.0 : weights[y];
    const double p = fp.probs[y];
    log_sum += w * std::log(p < kProbFloor ? kProbFloor : p);
    if (grads == nullptr) continue;

    const double coeff = w * inv_n;
    for (std::size_t c = 0; c < num_classes; ++c) {
      dz[c] = coeff * (fp.probs[c] - (c == y ? 1.0 : 0.0));
    }
    if (!mlp) {
      Tensor& gw = grads->tensors[0];
      Tensor& gb = grads->tensors[1];
      kernels::outer_accumulate(gw.data.data(), rec.features.data(), dz.data(),
                                gw.shape[0], gw.shape[1]);
      kernels::add(gb.data.data(), gb.data.data(), dz.data(), gb.size());
    } else {
      const Tensor& w2 = params.tensors[2];
      Tensor& gw1 = grads->tensors[0];
      Tensor& gb1 = grads->tensors[1];
      Tensor& gw2 = grads->tensors[2];
      Tensor& gb2 = grads->tensors[3];
      kernels::outer_accumulate(gw2.data.data(), fp.hidden.data(), dz.data(),
                                gw2.shape[0], gw2.shape[1]);
      kernels::add(gb2.data.data(), gb2.data.data(), dz.data(), gb2.size());
      dhidden.resize(fp.hidden.size());
      for (std::size_t i = 0; i < fp.hidden.size(); ++i) {
        const double upstream = kernels::dot(
            w2.data.data() + i * w2.shape[1], dz.data(), w2.shape[1]);
        dhidden[i] = upstream * (1.0 - fp.hidden[i] * fp.hidden[i]);
      }
      kernels::outer_accumulate(gw1.data.data(), rec.features.data(),
                                dhidden.data(), gw1.shape[0], gw1.shape[1]);
      kernels::add(gb1.data.data(), gb1.data.data(), dhidden.data(),
                   gb1.size());
    }
  }
  return -log_sum * inv_n;
}

double learning_rate_at(const TrainSpec& spec, std::uint64_t step,
                        std::uint64_t total_steps) {
  if (spec.lr_schedule == LrSchedule::kConstant) return spec.learning_rate;
  const std::uint64_t t = step > total_steps ? total_steps : step;
  const double frac =
      static_cast<double>(t) / static_cast<double>(total_steps);
  return 0.5 * spec.learning_rate * (1.0 + std::cos(0x1.921fb54442d18p+1 * frac));
}

namespace {

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

void apply_sgd(ParameterSet& params, const ParameterSet& grads, double lr,
               double weight_decay) {
  const double keep = 1.0 - lr * weight_decay;
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    double* p = params.tensors[i].data.data();
    const double* g = grads.tensors[i].data.data();
    const std::size_t n = params.tensors[i].size();
    if (weight_decay != 0.0) {
      kernels::scale(p, p, keep, n);
    }
    kernels::axpy(p, -lr, g, n);
  }
}

void apply_adamw(ParameterSet& params, const ParameterSet& grads,
                 AdamState& state, std::uint64_t step_in_call, double lr,
                 double weight_decay) {
  const double bias1 =
      1.0 - std::pow(kAdamBeta1, static_cast<double>(step_in_call));
  const double bias2 =
      1.0 - std::pow(kAdamBeta2, static_cast<double>(step_in_call));
  const double keep = 1.0 - lr * weight_decay;
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    double* p = params.tensors[i].data.data();
    const double* g = grads.tensors[i].data.data();
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    const std::size_t n = params.tensors[i].size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * g[j];
      v[j] = kAdamBeta2 * v[j] + (1.0 - kAdamBeta2) * g[j] * g[j];
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      if (weight_decay != 0.0) p[j] = keep * p[j];
      p[j] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
  }
}

}  // namespace

LocalTrainResult local_train(const ParameterSet& params,
                             const SiteDataset& data, const TrainSpec& spec,
                             const RoundContext& ctx) {
  validate(spec);
  if (data.empty()) throw ConfigError("local_train: empty dataset");
  const bool use_prox = ctx.prox_reference != nullptr && ctx.mu > 0.0;
  if (use_prox) params.require_conformant(*ctx.prox_reference);

  LocalTrainResult result;
  result.params = params;

  AdamState adam;
  if (spec.optimizer == OptimizerKind::kAdamW) {
    adam.m.resize(params.tensors.size());
    adam.v.resize(params.tensors.size());
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
      adam.m[i].assign(params.tensors[i].size(), 0.0);
      adam.v[i].assign(params.tensors[i].size(), 0.0);
    }
  }

  const std::size_t n = data.records.size();
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> batch;
  ParameterSet grads;
  double loss_sum = 0.0;

  for (std::size_t epoch = 0; epoch < spec.local_epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng::Stream stream(rng::derive(ctx.batch_seed, epoch));
    rng::shuffle(order.data(), n, stream);

    for (std::size_t start = 0; start < n; start += spec.batch_size) {
      const std::size_t end =
          start + spec.batch_size < n ? start + spec.batch_size : n;
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(end));

      double loss = weighted_ce_loss(result.params, data, batch,
                                     ctx.class_weights, &grads);
      if (use_prox) {
        ParameterSet diff = sub(result.params, *ctx.prox_reference);
        loss += 0.5 * ctx.mu * squared_norm(diff);
        axpy_inplace(grads, ctx.mu, diff);
      }
      loss_sum += loss;

      const double lr = learning_rate_at(
          spec, ctx.global_step + result.steps, ctx.total_steps);
      if (spec.optimizer == OptimizerKind::kSgd) {
        apply_sgd(result.params, grads, lr, spec.weight_decay);
      } else {
        apply_adamw(result.params, grads, adam, result.steps + 1, lr,
                    spec.weight_decay);
      }
      ++result.steps;
    }
  }
  result.mean_loss = loss_sum / static_cast<double>(result.steps);
  return result;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.append(b, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.append(b, 8);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  const std::string& path;

  void need(std::size_t n) {
    if (pos + n > buf.size()) {
      throw ParseError(path + ": truncated checkpoint");
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos += 8;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

constexpr char kCheckpointMagic[4] = {'F', 'S', 'C', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::ordered_json spec_to_json(const TrainSpec& spec) {
  nlohmann::ordered_json j;
  j["model"] = to_string(spec.model);
  j["hidden_width"] = spec.hidden_width;
  j["learning_rate"] = spec.learning_rate;
  j["optimizer"] = to_string(spec.optimizer);
  j["weight_decay"] = spec.weight_decay;
  j["lr_scheduler"] = to_string(spec.lr_schedule);
  j["batch_size"] = spec.batch_size;
  j["local_epochs"] = spec.local_epochs;
  j["weighted_loss"] = to_string(spec.weighting);
  j["seed"] = spec.seed;
  return j;
}

TrainSpec spec_from_json(const nlohmann::json& j, const std::string& path) {
  TrainSpec spec;
  try {
    spec.model = parse_model_kind(j.at("model").get<std::string>());
    spec.hidden_width = j.at("hidden_width").get<std::size_t>();
    spec.learning_rate = j.at("learning_rate").get<double>();
    spec.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    spec.weight_decay = j.at("weight_decay").get<double>();
    spec.lr_schedule =
        parse_lr_schedule(j.at("lr_scheduler").get<std::string>());
    spec.batch_size = j.at("batch_size").get<std::size_t>();
    spec.local_epochs = j.at("local_epochs").get<std::size_t>();
    spec.weighting =
        parse_loss_weighting(j.at("weighted_loss").get<std::string>());
    spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": bad checkpoint sidecar: " + e.what());
  }
  return spec;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParameterSet& params,
                     const TrainSpec& spec) {
  std::string out;
  out.append(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(params.tensors.size()));
  for (const Tensor& t : params.tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) put_u64(out, d);
    for (double v : t.data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put_u64(out, bits);
    }
  }
  textio::write_file(path, out);
  textio::write_file(path + ".json", spec_to_json(spec).dump(2) + "\n");
}

ParameterSet load_checkpoint(const std::string& path, TrainSpec* spec) {
  const std::string buf = textio::read_file(path);
  Reader r{buf, 0, path};
  const std::string magic = r.bytes(4);
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) {
    throw ParseError(path + ": not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw ParseError(path + ": unsupported checkpoint version " +
                     std::to_string(version));
  }
  ParameterSet params;
  const std::uint32_t n_tensors = r.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    Tensor t;
    const std::uint32_t name_len = r.u32();
    t.name = r.bytes(name_len);
    const std::uint32_t ndim = r.u32();
    std::size_t count = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const std::uint64_t dim = r.u64();
      t.shape.push_back(static_cast<std::size_t>(dim));
      count *= static_cast<std::size_t>(dim);
    }
    t.data.resize(count);
    for (double& v : t.data) {
      const std::uint64_t bits = r.u64();
      std::memcpy(&v, &bits, 8);
    }
    params.tensors.push_back(std::move(t));
  }
  if (r.pos != buf.size()) {
    throw ParseError(path + ": trailing bytes after checkpoint data");
  }
  if (spec != nullptr) {
    const std::string sidecar = textio::read_file(path + ".json");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(sidecar);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ".json: " + e.what());
    }
    *spec = spec_from_json(j, path + ".json");
  }
  return params;
}

}  // namespace fedsim
