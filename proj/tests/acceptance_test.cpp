// Acceptance gate: nine end-to-end criteria covering formula goldens,
// partition properties, aggregation and gradient oracles, privacy noise
// statistics, masked-aggregation exactness, metric identities, qualitative
// accuracy/loss trends on synthetic multi-site data, and byte-identical
// CLI reruns.  Prints exactly one PASS/FAIL line per criterion and exits
// nonzero if any fail.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/error.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/model.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/secagg.hpp"
#include "fedsim/strategies.hpp"
#include "fedsim/tensor.hpp"
#include "fedsim/textio.hpp"

namespace {

using namespace fedsim;

[[noreturn]] void fail(const std::string& detail) {
  throw std::runtime_error(detail);
}

void require(bool ok, const std::string& detail) {
  if (!ok) fail(detail);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: closed-form goldens at tight relative tolerances.

void criterion_formulas() {
  PrivacySpec growth;
  growth.epsilon0 = 100.0;
  growth.decay_factor = 0.95;
  growth.epsilon_min = 1e-3;
  growth.epsilon_max = std::numeric_limits<double>::infinity();
  for (const std::size_t t : {std::size_t{1}, std::size_t{2}, std::size_t{10},
                              std::size_t{50}}) {
    const long double expect =
        100.0L * powl(1.0L / 0.95L, static_cast<long double>(t - 1));
    const double got = epsilon_at(growth, t);
    const double rel = std::abs(got - static_cast<double>(expect)) /
                       static_cast<double>(expect);
    require(rel <= 1e-9, "budget growth at t=" + std::to_string(t) +
                             ": got " + fmt(got) + ", rel err " + fmt(rel));
  }

  for (const double eps : {100.0, 500.0, 1000.0, 2000.0}) {
    const long double oracle =
        sqrtl(2.0L * logl(1.25L / 1e-5L)) / static_cast<long double>(eps);
    const double got = sigma_base(1.0, eps, 1e-5);
    const double rel = std::abs(got - static_cast<double>(oracle)) /
                       static_cast<double>(oracle);
    require(rel <= 1e-6, "noise scale at eps=" + fmt(eps) + ": got " +
                             fmt(got) + ", rel err " + fmt(rel));
  }

  SiteDataset ds;
  ds.dimension = 1;
  ds.num_classes = 2;
  for (int i = 0; i < 490; ++i) ds.records.push_back({"s", 0, {0.0}});
  for (int i = 0; i < 307; ++i) ds.records.push_back({"s", 1, {0.0}});
  const std::vector<double> w = class_weights(ds);
  require(std::abs(w[0] - 797.0 / 980.0) <= 1e-12,
          "class-0 weight " + fmt(w[0]) + " != 797/980");
  require(std::abs(w[1] - 797.0 / 614.0) <= 1e-12,
          "class-1 weight " + fmt(w[1]) + " != 797/614");
}

// ---------------------------------------------------------------------------
// Criterion 2: randomized partition properties plus an independent greedy
// re-trace, 1000 cases.

void criterion_partition() {
  rng::Stream gen(987654321);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n_sites = 1 + gen.next_below(8);
    const std::size_t k = 1 + gen.next_below(n_sites);
    std::vector<std::size_t> counts(n_sites);
    SiteDataset ds;
    ds.dimension = 1;
    ds.num_classes = 2;
    for (std::size_t s = 0; s < n_sites; ++s) {
      counts[s] = 1 + gen.next_below(50);
      for (std::size_t i = 0; i < counts[s]; ++i) {
        ds.records.push_back({"s" + std::to_string(s),
                              static_cast<int>(gen.next_below(2)),
                              {gen.next_unit()}});
      }
    }
    PartitionSpec spec;
    spec.n_clients = k;
    spec.train_ratio = 0.5 + 0.4 * gen.next_unit();
    spec.seed = gen.next_u64();
    const std::vector<ClientPartition> parts = partition(ds, spec);

    // Independent greedy re-trace: count-descending sites (ties by id
    // ascending) onto the least-loaded client (ties by lowest index).
    std::vector<std::pair<std::string, std::size_t>> order;
    for (std::size_t s = 0; s < n_sites; ++s) {
      order.emplace_back("s" + std::to_string(s), counts[s]);
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    std::map<std::string, std::size_t> expected_owner;
    std::vector<std::size_t> load(k, 0);
    for (const auto& [site, count] : order) {
      const std::size_t owner = static_cast<std::size_t>(
          std::min_element(load.begin(), load.end()) - load.begin());
      expected_owner[site] = owner;
      load[owner] += count;
    }
    for (const ClientPartition& p : parts) {
      for (const std::string& site : p.sites) {
        require(expected_owner.at(site) == p.client_id,
                "case " + std::to_string(c) + ": site " + site +
                    " assigned to client " + std::to_string(p.client_id) +
                    ", greedy re-trace says " +
                    std::to_string(expected_owner.at(site)));
      }
    }

    // Site integrity: every record of a site lands inside its one owner.
    std::multiset<std::tuple<std::string, int, double>> seen;
    std::vector<std::size_t> totals(k, 0);
    for (const ClientPartition& p : parts) {
      const std::set<std::string> owned(p.sites.begin(), p.sites.end());
      totals[p.client_id] = p.train.size() + p.val.size();
      for (const SiteDataset* split : {&p.train, &p.val}) {
        for (const SiteRecord& r : split->records) {
          require(owned.count(r.site_id) == 1,
                  "case " + std::to_string(c) + ": record from " + r.site_id +
                      " leaked into client " + std::to_string(p.client_id));
          seen.emplace(r.site_id, r.label, r.features[0]);
        }
      }
    }

    // Multiset coverage: nothing lost, nothing invented.
    std::multiset<std::tuple<std::string, int, double>> input;
    for (const SiteRecord& r : ds.records) {
      input.emplace(r.site_id, r.label, r.features[0]);
    }
    require(seen == input,
            "case " + std::to_string(c) + ": client records are not a "
            "multiset partition of the input");

    // Balance bound of the greedy assignment.
    const std::size_t max_site = *std::max_element(counts.begin(),
                                                   counts.end());
    const auto [lo, hi] = std::minmax_element(totals.begin(), totals.end());
    require(*hi - *lo <= max_site,
            "case " + std::to_string(c) + ": client size spread " +
                std::to_string(*hi - *lo) + " exceeds largest site " +
                std::to_string(max_site));

    // Determinism of the full split.
    const std::vector<ClientPartition> again = partition(ds, spec);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      require(again[i].sites == parts[i].sites &&
                  again[i].train.size() == parts[i].train.size(),
              "case " + std::to_string(c) + ": repeated partition differs");
      for (std::size_t j = 0; j < parts[i].train.records.size(); ++j) {
        require(again[i].train.records[j].features ==
                    parts[i].train.records[j].features,
                "case " + std::to_string(c) + ": shuffle not deterministic");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 3: weighted-mean aggregation oracle and the zero-strength
// proximal reduction over a 20-round trajectory.

ParameterSet random_params(rng::Stream& gen, std::size_t n_tensors) {
  ParameterSet p;
  for (std::size_t t = 0; t < n_tensors; ++t) {
    Tensor tensor;
    tensor.name = "t" + std::to_string(t);
    const std::size_t rows = 1 + gen.next_below(4);
    const std::size_t cols = 1 + gen.next_below(4);
    tensor.shape = {rows, cols};
    tensor.data.resize(rows * cols);
    for (double& v : tensor.data) v = 10.0 * gen.next_unit() - 5.0;
    p.tensors.push_back(std::move(tensor));
  }
  return p;
}

void criterion_aggregation() {
  rng::Stream gen(24680);
  for (int c = 0; c < 500; ++c) {
    const std::size_t n_clients = 2 + gen.next_below(3);
    const std::size_t n_tensors = 1 + gen.next_below(3);
    const ParameterSet shape_ref = random_params(gen, n_tensors);
    std::vector<ClientUpdate> updates(n_clients);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n_clients; ++i) {
      updates[i].client_id = i;
      updates[i].params = shape_ref;
      for (Tensor& t : updates[i].params.tensors) {
        for (double& v : t.data) v = 10.0 * gen.next_unit() - 5.0;
      }
      updates[i].n_samples = 1 + gen.next_below(20);
      weight_sum += static_cast<double>(updates[i].n_samples);
    }
    const ParameterSet got = fedavg_aggregate(updates);
    const std::vector<double> flat = got.flatten();
    std::vector<double> oracle(flat.size(), 0.0);
    for (const ClientUpdate& u : updates) {
      const std::vector<double> uf = u.params.flatten();
      const double w = static_cast<double>(u.n_samples) / weight_sum;
      for (std::size_t j = 0; j < uf.size(); ++j) oracle[j] += w * uf[j];
    }
    for (std::size_t j = 0; j < flat.size(); ++j) {
      require(std::abs(flat[j] - oracle[j]) <= 1e-12,
              "case " + std::to_string(c) + ": aggregate deviates from the "
              "flat weighted mean by " + fmt(std::abs(flat[j] - oracle[j])));
    }
  }

  // mu = 0 must reproduce the plain weighted average bitwise, trajectory
  // and checkpoint included, over 20 rounds.
  ExperimentConfig avg;
  avg.synth.n_sites = 3;
  avg.synth.per_site_counts = {40, 30, 20};
  avg.synth.dimension = 4;
  avg.synth.class1_prob = {0.5, 0.5, 0.5};
  avg.synth.class_separation = 2.5;
  avg.synth.site_shift = 1.0;
  avg.synth.noise_std = 1.0;
  avg.synth.seed = 5150;
  avg.data_seed_set = true;
  avg.partition.n_clients = 2;
  avg.train.learning_rate = 0.02;
  avg.train.batch_size = 8;
  avg.test_size = 40;
  avg.fl_rounds = 20;
  avg.eval_every = 5;
  avg.repetitions = 1;
  finalize(avg);
  ExperimentConfig prox = avg;
  prox.strategy.kind = StrategyKind::kFedProx;
  prox.strategy.mu = 0.0;
  prox.mu_set = true;
  const ExperimentData data = materialize_data(avg);
  const RunResult a = run_federated(avg, data.dev, data.test, 3131);
  const RunResult p = run_federated(prox, data.dev, data.test, 3131);
  require(a.rounds.size() == 20 && p.rounds.size() == 20, "round count");
  for (std::size_t r = 0; r < 20; ++r) {
    require(a.rounds[r].client_losses == p.rounds[r].client_losses,
            "round " + std::to_string(r + 1) +
                ": zero-strength proximal losses differ from plain "
                "averaging");
  }
  require(a.best_round == p.best_round, "best round differs");
  for (std::size_t t = 0; t < a.best_params.tensors.size(); ++t) {
    require(a.best_params.tensors[t].data == p.best_params.tensors[t].data,
            "best checkpoint differs at tensor " +
                a.best_params.tensors[t].name);
  }
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic gradients vs central finite differences.

SiteDataset random_batch(rng::Stream& gen, std::size_t dim, std::size_t n) {
  SiteDataset ds;
  ds.dimension = dim;
  ds.num_classes = 2;
  for (std::size_t i = 0; i < n; ++i) {
    SiteRecord rec;
    rec.site_id = "s";
    rec.label = (i < 2) ? static_cast<int>(i) % 2
                        : static_cast<int>(gen.next_below(2));
    for (std::size_t j = 0; j < dim; ++j) {
      rec.features.push_back(4.0 * gen.next_unit() - 2.0);
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

void randomize(ParameterSet& params, rng::Stream& gen) {
  for (Tensor& t : params.tensors) {
    for (double& v : t.data) v = 1.6 * gen.next_unit() - 0.8;
  }
}

void check_gradient(const std::function<double(const ParameterSet&)>& loss_fn,
                    const ParameterSet& at, const ParameterSet& analytic,
                    const std::string& what) {
  const double h = 1e-6;
  std::vector<double> fd;
  ParameterSet probe = at;
  for (std::size_t t = 0; t < probe.tensors.size(); ++t) {
    for (std::size_t j = 0; j < probe.tensors[t].data.size(); ++j) {
      const double orig = probe.tensors[t].data[j];
      probe.tensors[t].data[j] = orig + h;
      const double up = loss_fn(probe);
      probe.tensors[t].data[j] = orig - h;
      const double down = loss_fn(probe);
      probe.tensors[t].data[j] = orig;
      fd.push_back((up - down) / (2.0 * h));
    }
  }
  const std::vector<double> an = analytic.flatten();
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t j = 0; j < fd.size(); ++j) {
    num += (fd[j] - an[j]) * (fd[j] - an[j]);
    da += fd[j] * fd[j];
    db += an[j] * an[j];
  }
  const double rel = std::sqrt(num) /
                     std::max({std::sqrt(da), std::sqrt(db), 1e-10});
  require(rel <= 1e-4, what + ": gradient rel err " + fmt(rel));
}

void criterion_gradients() {
  rng::Stream gen(13579);
  for (const ModelKind kind : {ModelKind::kLogreg, ModelKind::kMlp}) {
    for (int c = 0; c < 100; ++c) {
      const std::size_t dim = 2 + gen.next_below(3);
      const SiteDataset batch = random_batch(gen, dim, 3 + gen.next_below(4));
      std::vector<std::size_t> idx(batch.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      const std::vector<double> weights{0.8, 1.25};
      ParameterSet params = init_params(kind, dim, 2, 3, gen.next_u64());
      randomize(params, gen);

      ParameterSet grads;
      weighted_ce_loss(params, batch, idx, weights, &grads);
      check_gradient(
          [&](const ParameterSet& p) {
            return weighted_ce_loss(p, batch, idx, weights, nullptr);
          },
          params, grads,
          std::string(to_string(kind)) + " ce case " + std::to_string(c));

      ParameterSet global = params;
      randomize(global, gen);
      const double mu = 0.7;
      ParameterSet prox_grads;
      fedprox_local_objective(params, global, batch, idx, weights, mu,
                              &prox_grads);
      check_gradient(
          [&](const ParameterSet& p) {
            return fedprox_local_objective(p, global, batch, idx, weights, mu,
                                           nullptr);
          },
          params, prox_grads,
          std::string(to_string(kind)) + " proximal case " +
              std::to_string(c));
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 5: noise statistics at one million draws, scale bounds, and
// exact clipping.

void criterion_privacy_stats() {
  PrivacySpec spec;
  spec.epsilon0 = 100.0;
  spec.delta = 1e-5;
  spec.clipping_norm = 1.0;
  spec.mode = PrivacyMode::kFixed;
  spec.seed = 20260822;
  const double sigma = sigma_base(1.0, 100.0, 1e-5);

  ParameterSet zeros;
  zeros.tensors.push_back(Tensor{"w", {1000000}, std::vector<double>(1000000, 0.0)});
  PrivacyState state;
  state.client_id = 0;
  const ParameterSet noised = apply_local_dp(zeros, spec, state);
  const std::vector<double>& draws = noised.tensors[0].data;
  double mean = 0.0;
  for (const double v : draws) mean += v;
  mean /= static_cast<double>(draws.size());
  double var = 0.0;
  for (const double v : draws) var += (v - mean) * (v - mean);
  var /= static_cast<double>(draws.size());
  const double emp = std::sqrt(var);
  require(std::abs(emp - sigma) / sigma <= 0.01,
          "empirical noise std " + fmt(emp) + " vs sigma " + fmt(sigma));

  rng::Stream gen(11223);
  for (int c = 0; c < 100; ++c) {
    ParameterSet p = random_params(gen, 1 + gen.next_below(4));
    const std::vector<double> scales = tensor_scales(p);
    for (const double s : scales) {
      require(s >= 0.1 && s <= 1.0,
              "tensor scale " + fmt(s) + " outside [0.1, 1.0]");
    }
  }

  ParameterSet flat;
  flat.tensors.push_back(Tensor{"a", {3}, {0.0, 0.0, 0.0}});
  flat.tensors.push_back(Tensor{"b", {2}, {0.0, 0.0}});
  for (const double s : tensor_scales(flat)) {
    require(s == 0.1, "all-zero parameters must floor every scale at 0.1");
  }

  ParameterSet update = random_params(gen, 2);
  std::vector<double> uf = update.flatten();
  double norm = 0.0;
  for (const double v : uf) norm += v * v;
  const double target = 5.0 / std::sqrt(norm);
  for (Tensor& t : update.tensors) {
    for (double& v : t.data) v *= target;  // exact norm 5
  }
  const ParameterSet clipped = clip_to_norm(update, 1.0);
  double cn = 0.0;
  for (const double v : clipped.flatten()) cn += v * v;
  require(std::sqrt(cn) <= 1.0 + 1e-12,
          "clipped norm " + fmt(std::sqrt(cn)) + " exceeds 1 + 1e-12");
}

// ---------------------------------------------------------------------------
// Criterion 6: masked aggregation is exact integer arithmetic, the
// quantizer honors its error bound, and share reconstruction thresholds
// behave.

void criterion_secagg() {
  const std::size_t length = 10000;
  for (const std::size_t n : {std::size_t{3}, std::size_t{4}}) {
    SecAggSpec spec;
    spec.clipping_range = 8.0;
    spec.quant_bits = 22;
    spec.num_shares = n;
    spec.threshold = 2;
    spec.seed = 606 + n;
    const SecAggSession session = secagg_setup(n, spec);
    rng::Stream gen(404 + n);
    std::vector<std::vector<std::uint32_t>> plain(n);
    std::vector<MaskedUpdate> masked;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(length);
      for (double& x : v) x = 20.0 * gen.next_unit() - 10.0;
      plain[i] = quantize(v, spec);
      masked.push_back(mask_update(session, i, plain[i], 1));
    }

    const AggregateOutcome full = secure_aggregate(masked, {}, session, 1);
    for (std::size_t j = 0; j < length; ++j) {
      std::uint32_t expect = 0;
      for (std::size_t i = 0; i < n; ++i) expect += plain[i][j];
      require(full.sum[j] == expect,
              "n=" + std::to_string(n) + ": masked sum mismatch at " +
                  std::to_string(j));
    }

    // One dropout: survivors' shares recover the missing masks exactly.
    std::vector<MaskedUpdate> survivors;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      survivors.push_back(mask_update(session, i, plain[i], 2));
    }
    const AggregateOutcome part =
        secure_aggregate(survivors, {n - 1}, session, 2);
    require(part.survivor_count == n - 1, "survivor count");
    for (std::size_t j = 0; j < length; ++j) {
      std::uint32_t expect = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) expect += plain[i][j];
      require(part.sum[j] == expect,
              "n=" + std::to_string(n) + ": dropout sum mismatch at " +
                  std::to_string(j));
    }
  }

  SecAggSpec qspec;
  qspec.clipping_range = 8.0;
  qspec.quant_bits = 22;
  rng::Stream gen(717);
  std::vector<double> v(length);
  for (double& x : v) x = 16.0 * gen.next_unit() - 8.0;
  const std::vector<double> round_trip = dequantize(quantize(v, qspec), qspec);
  const double bound = 8.0 / (static_cast<double>((1u << 22) - 1));
  for (std::size_t j = 0; j < length; ++j) {
    require(std::abs(round_trip[j] - v[j]) <= bound,
            "quantization error " + fmt(std::abs(round_trip[j] - v[j])) +
                " exceeds " + fmt(bound));
  }

  for (const auto& [shares_n, threshold] :
       std::vector<std::pair<std::size_t, std::size_t>>{{3, 2}, {4, 3}}) {
    const std::uint64_t secret = 0x1234567890abcdefULL % ((1ULL << 61) - 1);
    const std::vector<std::uint64_t> shares =
        share_secret(secret, shares_n, threshold, 321);
    std::vector<std::size_t> pick(threshold);
    // Every threshold-sized subset reconstructs the secret.
    std::function<void(std::size_t, std::size_t)> visit =
        [&](std::size_t start, std::size_t chosen) {
          if (chosen == threshold) {
            std::vector<std::pair<std::uint64_t, std::uint64_t>> points;
            for (std::size_t idx : pick) {
              points.emplace_back(idx + 1, shares[idx]);
            }
            require(reconstruct_secret(points, threshold) == secret,
                    "share subset failed to reconstruct");
            return;
          }
          for (std::size_t i = start; i < shares_n; ++i) {
            pick[chosen] = i;
            visit(i + 1, chosen + 1);
          }
        };
    visit(0, 0);
    bool threw = false;
    try {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> few;
      for (std::size_t i = 0; i + 1 < threshold; ++i) {
        few.emplace_back(i + 1, shares[i]);
      }
      reconstruct_secret(few, threshold);
    } catch (const ProtocolError&) {
      threw = true;
    }
    require(threw, "reconstruction below threshold must fail");
  }
}

// ---------------------------------------------------------------------------
// Criterion 7: trapezoidal area equals the pairwise concordance statistic;
// confusion-matrix goldens.

void criterion_metrics() {
  rng::Stream gen(31415);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 2 + gen.next_below(199);
    const std::size_t n_pos = 1 + gen.next_below(n - 1);
    std::vector<int> labels;
    std::vector<double> scores;
    const bool coarse = gen.next_below(2) == 0;  // force score ties
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(i < n_pos ? 1 : 0);
      scores.push_back(coarse ? 0.1 * static_cast<double>(gen.next_below(11))
                              : gen.next_unit());
    }
    const RocResult roc = roc_auc(labels, scores);
    double concordant = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] != 1) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] != 0) continue;
        ++pairs;
        if (scores[i] > scores[j]) {
          concordant += 1.0;
        } else if (scores[i] == scores[j]) {
          concordant += 0.5;
        }
      }
    }
    const double oracle = concordant / static_cast<double>(pairs);
    require(std::abs(roc.auc - oracle) <= 1e-12,
            "case " + std::to_string(c) + ": area " + fmt(roc.auc) +
                " vs concordance " + fmt(oracle));
  }

  const ConfusionMatrix cm = confusion({1, 1, 0, 0}, {1, 0, 0, 1});
  require(cm.tp == 1 && cm.fn == 1 && cm.tn == 1 && cm.fp == 1,
          "hand-counted confusion matrix mismatch");
  require(accuracy(cm) == 0.5 && f1(cm) == 0.5,
          "accuracy/F1 of the balanced hand case must both be 0.5");
  const ConfusionMatrix perfect = confusion({1, 0, 1}, {1, 0, 1});
  require(accuracy(perfect) == 1.0 && f1(perfect) == 1.0,
          "perfect predictions must score 1.0");
  bool degenerate = false;
  const ConfusionMatrix none = confusion({1, 1}, {0, 0});
  const double f = f1(none, &degenerate);
  require(f == 0.0 && degenerate,
          "no positive predictions must yield F1 = 0 with the degenerate "
          "flag set");
}

// ---------------------------------------------------------------------------
// Criterion 8: qualitative accuracy/loss trends on the synthetic
// multi-site task (4 sites x 200 records, 16 features, 5 run seeds, 100
// rounds).  "Final accuracy" is the round-100 validation accuracy;
// "non-decreasing loss" is a nonnegative least-squares slope over the
// final 20 rounds.

ExperimentConfig trend_config() {
  ExperimentConfig c;
  c.base_seed = 2026;
  c.synth.n_sites = 4;
  c.synth.per_site_counts = {200, 200, 200, 200};
  c.synth.dimension = 16;
  c.synth.class1_prob = {0.15, 0.35, 0.65, 0.85};
  c.synth.site_shift = 2.5;
  c.synth.class_separation = 3.0;
  c.synth.noise_std = 1.0;
  c.synth.seed = 424242;
  c.data_seed_set = true;
  c.partition.n_clients = 2;
  c.train.learning_rate = 0.02;
  c.train.batch_size = 32;
  c.test_size = 200;
  c.fl_rounds = 100;
  c.eval_every = 5;
  c.repetitions = 5;
  finalize(c);
  return c;
}

double final_val_accuracy(const RunResult& run) {
  require(run.rounds.size() == 100 && run.rounds.back().evaluated,
          "expected 100 rounds with the last one evaluated");
  return run.rounds.back().val_accuracy;
}

double tail_slope(const RunResult& run) {
  require(run.rounds.size() == 100, "expected 100 rounds");
  std::vector<double> y;
  for (std::size_t r = 80; r < 100; ++r) {
    y.push_back(run.rounds[r].train_loss);
  }
  const double n = static_cast<double>(y.size());
  double xb = 0.0, yb = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    xb += static_cast<double>(i);
    yb += y[i];
  }
  xb /= n;
  yb /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += (static_cast<double>(i) - xb) * (y[i] - yb);
    den += (static_cast<double>(i) - xb) * (static_cast<double>(i) - xb);
  }
  return num / den;
}

void criterion_trends() {
  const ExperimentConfig base = trend_config();
  const ExperimentData data = materialize_data(base);

  // (a) two-client weighted averaging lands close to pooled training.
  const RepetitionResults central =
      run_repetitions(base, data.dev, data.test, true);
  const RepetitionResults fed =
      run_repetitions(base, data.dev, data.test, false);
  const double gap = std::abs(central.accuracy.mean - fed.accuracy.mean);
  require(gap <= 0.03, "pooled vs federated accuracy gap " + fmt(gap) +
                           " exceeds 3 points (pooled " +
                           fmt(central.accuracy.mean) + ", federated " +
                           fmt(fed.accuracy.mean) + ")");

  // (b) adaptive budgets beat fixed noise at the same starting budget in
  // at least 4 of 5 runs, at both budgets.
  std::map<double, RepetitionResults> fixed_runs;
  std::map<double, RepetitionResults> adaptive_runs;
  for (const double eps : {100.0, 500.0}) {
    ExperimentConfig fixed = base;
    fixed.strategy.kind = StrategyKind::kLocalDp;
    fixed.privacy.epsilon0 = eps;
    finalize(fixed);
    ExperimentConfig adaptive = base;
    adaptive.strategy.kind = StrategyKind::kAldp;
    adaptive.privacy.epsilon0 = eps;
    finalize(adaptive);
    fixed_runs.emplace(eps,
                       run_repetitions(fixed, data.dev, data.test, false));
    adaptive_runs.emplace(
        eps, run_repetitions(adaptive, data.dev, data.test, false));
    int wins = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      if (final_val_accuracy(adaptive_runs.at(eps).runs[i]) >=
          final_val_accuracy(fixed_runs.at(eps).runs[i])) {
        ++wins;
      }
    }
    require(wins >= 4, "adaptive noise won only " + std::to_string(wins) +
                           "/5 runs at budget " + fmt(eps));
  }

  // (c) fixed noise at the smallest budget drifts upward late; adaptive
  // at 500 still ends below its round-10 loss in every run.
  int rising = 0;
  for (const RunResult& run : fixed_runs.at(100.0).runs) {
    if (tail_slope(run) >= 0.0) ++rising;
  }
  require(rising >= 3, "fixed-noise loss rose over the final 20 rounds in "
                       "only " + std::to_string(rising) + "/5 runs");
  for (std::size_t i = 0; i < 5; ++i) {
    const RunResult& run = adaptive_runs.at(500.0).runs[i];
    const double l10 = run.rounds[9].train_loss;
    const double l100 = run.rounds[99].train_loss;
    require(l100 < l10, "adaptive run " + std::to_string(i) +
                            ": round-100 loss " + fmt(l100) +
                            " not below round-10 loss " + fmt(l10));
  }

  // (d) no isolated client beats pooled training by more than a point,
  // across 5 run seeds on the same data (one site per client).
  ExperimentConfig solo = base;
  solo.partition.n_clients = 4;
  finalize(solo);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const AblationResult ab =
        run_ablation(solo, data.dev, data.test, solo.base_seed + i);
    for (const AblationRow& row : ab.clients) {
      require(row.test.accuracy <= ab.centralized.test.accuracy + 0.01,
              "run seed " + std::to_string(solo.base_seed + i) + ": client " +
                  std::to_string(row.client_id) + " at " +
                  fmt(row.test.accuracy) + " beats pooled " +
                  fmt(ab.centralized.test.accuracy) + " by over a point");
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 9: identically-seeded CLI reruns emit byte-identical summary
// and round logs.

#ifndef FEDSIM_CLI_PATH
#define FEDSIM_CLI_PATH "fedsim"
#endif

void run_cli(const std::string& args) {
  const std::string cmd =
      std::string(FEDSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  require(rc == 0, "command failed: " + cmd);
}

void criterion_cli_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fedsim_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = (dir / "exp.toml").string();
  textio::write_file(cfg,
                     "base_seed = 7\n"
                     "fl_rounds = 6\n"
                     "eval_every = 2\n"
                     "repetitions = 2\n"
                     "clients = 2\n"
                     "n_sites = 3\n"
                     "site_records = [40, 30, 20]\n"
                     "dimension = 4\n"
                     "class_separation = 2.5\n"
                     "site_shift = 1.0\n"
                     "test_size = 40\n"
                     "learning_rate = 0.02\n"
                     "batch_size = 8\n"
                     "strategy = \"fedavg\"\n");

  const std::vector<std::pair<std::string, std::string>> variants = {
      {"plain", "train -c " + cfg},
      {"adaptive", "train -c " + cfg + " --strategy aldp"},
      {"pooled", "centralized -c " + cfg},
  };
  for (const auto& [tag, args] : variants) {
    const std::string out_a = (dir / (tag + "_a")).string();
    const std::string out_b = (dir / (tag + "_b")).string();
    run_cli(args + " --out " + out_a);
    run_cli(args + " --out " + out_b);
    for (const std::string file : {"summary.json", "rounds.csv"}) {
      const std::string a = textio::read_file(out_a + "/" + file);
      const std::string b = textio::read_file(out_b + "/" + file);
      require(a == b, tag + ": " + file + " differs between reruns");
    }
  }
  fs::remove_all(dir);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "formula goldens", criterion_formulas},
      {2, "partition properties", criterion_partition},
      {3, "aggregation oracles", criterion_aggregation},
      {4, "gradient checks", criterion_gradients},
      {5, "privacy noise statistics", criterion_privacy_stats},
      {6, "masked aggregation exactness", criterion_secagg},
      {7, "metric identities", criterion_metrics},
      {8, "synthetic trend reproduction", criterion_trends},
      {9, "CLI determinism", criterion_cli_determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    std::string verdict = "PASS";
    std::string detail;
    try {
      c.fn();
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = e.what();
      ++failed;
    }
    std::cout << "criterion " << c.id << " (" << c.name << "): " << verdict;
    if (!detail.empty()) std::cout << " - " << detail;
    std::cout << std::endl;
  }
  std::cout << "acceptance: " << (criteria.size() - failed) << "/"
            << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
