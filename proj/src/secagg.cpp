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

#include "fedsim/secagg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "fedsim/error.hpp"
#include "fedsim/kernels.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>(
      static_cast<unsigned __int128>(a) * b % kShamirPrime);
}

std::uint64_t addmod(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;  // both < 2^61, no overflow
  return s >= kShamirPrime ? s - kShamirPrime : s;
}

std::uint64_t submod(std::uint64_t a, std::uint64_t b) {
  return a >= b ? a - b : a + kShamirPrime - b;
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t result = 1;
  while (exp > 0) {
    if (exp & 1) result = mulmod(result, base);
    base = mulmod(base, base);
    exp >>= 1;
  }
  return result;
}

// Fermat inverse; kShamirPrime is prime.
std::uint64_t invmod(std::uint64_t a) {
  if (a == 0) throw ProtocolError("modular inverse of zero");
  return powmod(a, kShamirPrime - 2);
}

// Uniform field element by 61-bit rejection sampling.
std::uint64_t next_field_element(rng::Stream& stream) {
  while (true) {
    const std::uint64_t v = stream.next_u64() & kShamirPrime;  // 61 bits
    if (v < kShamirPrime) return v;  // rejects only v == p
  }
}

}  // namespace

void validate(const SecAggSpec& spec, std::size_t n_clients) {
  if (n_clients < 3) {
    throw ConfigError("secagg requires at least 3 clients");
  }
  if (!(spec.clipping_range > 0.0)) {
    throw ConfigError("clipping_range must be positive");
  }
  if (spec.quant_bits < 1 || spec.quant_bits > kQuantBitsMax) {
    throw ConfigError("quantization_range must be 2^b with 1 <= b <= " +
                      std::to_string(kQuantBitsMax));
  }
  // Worst-case sum of n quantized values must stay below the modulus.
  const double worst = std::ldexp(static_cast<double>(n_clients),
                                  static_cast<int>(spec.quant_bits));
  if (worst >= std::ldexp(1.0, 32)) {
    throw ConfigError("2^quant_bits * n_clients must stay below 2^32");
  }
  if (spec.threshold == 0) {
    throw ConfigError("reconstruction_threshold must be >= 1");
  }
  if (spec.threshold > spec.num_shares) {
    throw ConfigError("reconstruction_threshold cannot exceed num_shares");
  }
  if (spec.num_shares > n_clients) {
    throw ConfigError("num_shares cannot exceed the client count");
  }
}

SecAggSession secagg_setup(std::size_t n_clients, const SecAggSpec& spec) {
  validate(spec, n_clients);
  SecAggSession session;
  session.n_clients = n_clients;
  session.spec = spec;
  session.personal_seeds.resize(n_clients);
  session.publics.resize(n_clients);
  for (std::size_t i = 0; i < n_clients; ++i) {
    rng::Stream stream(rng::derive(spec.seed, rng::kTagPairwise, i));
    session.personal_seeds[i] = next_field_element(stream);
    session.publics[i] = rng::mix64(session.personal_seeds[i]);
  }
  for (std::size_t i = 0; i < n_clients; ++i) {
    const std::vector<std::uint64_t> values =
        share_secret(session.personal_seeds[i], spec.num_shares,
                     spec.threshold,
                     rng::derive(spec.seed, rng::kTagShamir, i));
    for (std::size_t k = 0; k < values.size(); ++k) {
      SeedShare share;
      share.owner = i;
      share.holder = (i + k + 1) % n_clients;
      share.x = k + 1;
      share.value = values[k];
      session.shares.push_back(share);
    }
  }
  return session;
}

std::uint64_t pairwise_seed(const SecAggSession& session, std::size_t i,
                            std::size_t j) {
  if (i == j || i >= session.n_clients || j >= session.n_clients) {
    throw ProtocolError("pairwise_seed: invalid client pair");
  }
  const std::size_t lo = i < j ? i : j;
  const std::size_t hi = i < j ? j : i;
  return rng::derive(session.publics[lo], rng::kTagPairwise,
                     session.publics[hi]);
}

std::vector<std::uint32_t> quantize(const std::vector<double>& v,
                                    const SecAggSpec& spec) {
  std::vector<std::uint32_t> q(v.size());
  kernels::quantize(q.data(), v.data(), v.size(), spec.clipping_range,
                    spec.levels_minus_one());
  return q;
}

std::vector<double> dequantize(const std::vector<std::uint32_t>& q,
                               const SecAggSpec& spec) {
  std::vector<double> v(q.size());
  kernels::dequantize(v.data(), q.data(), q.size(), spec.clipping_range,
                      spec.levels_minus_one());
  return v;
}

namespace {

// PRG expansion of one pairwise seed for one round.
void pair_stream(std::uint64_t seed, std::size_t round, std::size_t length,
                 std::vector<std::uint32_t>& out) {
  rng::Stream stream(rng::derive(seed, rng::kTagMaskRound, round));
  out.resize(length);
  for (std::uint32_t& v : out) {
    v = static_cast<std::uint32_t>(stream.next_u64());
  }
}

}  // namespace

std::vector<std::uint32_t> make_mask(const SecAggSession& session,
                                     std::size_t client_id, std::size_t round,
                                     std::size_t length) {
  if (client_id >= session.n_clients) {
    throw ProtocolError("make_mask: unknown client");
  }
  std::vector<std::uint32_t> mask(length, 0);
  std::vector<std::uint32_t> buf;
  for (std::size_t j = 0; j < session.n_clients; ++j) {
    if (j == client_id) continue;
    pair_stream(pairwise_seed(session, client_id, j), round, length, buf);
    if (j > client_id) {
      kernels::add_mod32(mask.data(), buf.data(), length);
    } else {
      kernels::sub_mod32(mask.data(), buf.data(), length);
    }
  }
  return mask;
}

MaskedUpdate mask_update(const SecAggSession& session, std::size_t client_id,
                         const std::vector<std::uint32_t>& quantized,
                         std::size_t round) {
  MaskedUpdate update;
  update.client_id = client_id;
  update.values = make_mask(session, client_id, round, quantized.size());
  kernels::add_mod32(update.values.data(), quantized.data(),
                     quantized.size());
  for (std::size_t j = 0; j < session.n_clients; ++j) {
    if (j != client_id) update.peers.push_back(j);
  }
  return update;
}

std::vector<std::uint64_t> share_secret(std::uint64_t secret,
                                        std::size_t num_shares,
                                        std::size_t threshold,
                                        std::uint64_t coef_seed) {
  if (secret >= kShamirPrime) {
    throw ProtocolError("secret must lie in the share field");
  }
  if (threshold == 0 || threshold > num_shares) {
    throw ProtocolError("invalid threshold/num_shares");
  }
  // Polynomial p(x) = secret + a_1 x + ... + a_{threshold-1} x^{threshold-1}.
  std::vector<std::uint64_t> coefs(threshold);
  coefs[0] = secret;
  rng::Stream stream(coef_seed);
  for (std::size_t i = 1; i < threshold; ++i) {
    coefs[i] = next_field_element(stream);
  }
  std::vector<std::uint64_t> values(num_shares);
  for (std::size_t k = 0; k < num_shares; ++k) {
    const std::uint64_t x = k + 1;
    std::uint64_t acc = 0;  // Horner, highest coefficient first
    for (std::size_t i = threshold; i-- > 0;) {
      acc = addmod(mulmod(acc, x), coefs[i]);
    }
    values[k] = acc;
  }
  return values;
}

std::uint64_t reconstruct_secret(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& points,
    std::size_t threshold) {
  if (points.size() < threshold) {
    throw ProtocolError("reconstruction needs " + std::to_string(threshold) +
                        " shares, got " + std::to_string(points.size()));
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pts(
      points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].first == pts[i - 1].first) {
      throw ProtocolError("duplicate share index " +
                          std::to_string(pts[i].first));
    }
  }
  pts.resize(threshold);

  std::uint64_t secret = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // Lagrange basis at x=0: prod_{j != i} x_j / (x_j - x_i).
    std::uint64_t num = 1;
    std::uint64_t den = 1;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      num = mulmod(num, pts[j].first % kShamirPrime);
      den = mulmod(den, submod(pts[j].first % kShamirPrime,
                               pts[i].first % kShamirPrime));
    }
    const std::uint64_t basis = mulmod(num, invmod(den));
    secret = addmod(secret, mulmod(pts[i].second, basis));
  }
  return secret;
}

AggregateOutcome secure_aggregate(const std::vector<MaskedUpdate>& masked,
                                  const std::set<std::size_t>& dropped,
                                  const SecAggSession& session,
                                  std::size_t round) {
  if (masked.empty()) throw ProtocolError("no masked updates to aggregate");
  const std::size_t length = masked.front().values.size();

  std::set<std::size_t> survivors;
  for (const MaskedUpdate& m : masked) {
    if (m.client_id >= session.n_clients) {
      throw ProtocolError("masked update from unknown client " +
                          std::to_string(m.client_id));
    }
    if (dropped.count(m.client_id) != 0) {
      throw ProtocolError("client " + std::to_string(m.client_id) +
                          " is both dropped and present");
    }
    if (m.values.size() != length) {
      throw ProtocolError("masked update length mismatch");
    }
    if (!survivors.insert(m.client_id).second) {
      throw ProtocolError("duplicate masked update from client " +
                          std::to_string(m.client_id));
    }
  }
  if (survivors.size() + dropped.size() != session.n_clients) {
    throw ProtocolError("survivors + dropouts do not cover the session");
  }

  nlohmann::ordered_json transcript;
  transcript["round"] = round;
  transcript["n_clients"] = session.n_clients;
  transcript["survivors"] = survivors;
  transcript["dropped"] = dropped;
  nlohmann::ordered_json digests = nlohmann::ordered_json::object();
  for (const MaskedUpdate& m : masked) {
    std::uint64_t h = 0;
    for (std::uint32_t v : m.values) h = rng::mix64(h + v + 1);
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    digests[std::to_string(m.client_id)] = buf;
  }
  transcript["masked_digests"] = digests;

  AggregateOutcome outcome;
  outcome.survivor_count = survivors.size();
  outcome.sum.assign(length, 0);
  for (const MaskedUpdate& m : masked) {
    kernels::add_mod32(outcome.sum.data(), m.values.data(), length);
  }

  // Dropout recovery: rebuild each dropped client's pairwise masks from its
  // reconstructed seed and strip the survivors' unpaired halves.
  nlohmann::ordered_json reconstructions = nlohmann::ordered_json::array();
  std::vector<std::uint32_t> buf;
  for (std::size_t d : dropped) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> points;
    std::vector<std::size_t> holders;
    for (const SeedShare& share : session.shares) {
      if (share.owner != d) continue;
      if (survivors.count(share.holder) == 0) continue;
      points.emplace_back(share.x, share.value);
      holders.push_back(share.holder);
    }
    if (points.size() < session.spec.threshold) {
      throw ProtocolError(
          "cannot recover dropped client " + std::to_string(d) + ": " +
          std::to_string(points.size()) + " shares available, " +
          std::to_string(session.spec.threshold) + " required");
    }
    const std::uint64_t seed = reconstruct_secret(points,
                                                  session.spec.threshold);
    if (rng::mix64(seed) != session.publics[d]) {
      throw ProtocolError("reconstructed seed for client " +
                          std::to_string(d) +
                          " does not match its broadcast value");
    }
    nlohmann::ordered_json event;
    event["owner"] = d;
    event["holders"] = holders;
    std::vector<std::uint64_t> xs;
    for (const auto& p : points) xs.push_back(p.first);
    event["share_indices"] = xs;
    reconstructions.push_back(event);

    for (std::size_t i : survivors) {
      pair_stream(pairwise_seed(session, d, i), round, length, buf);
      if (d > i) {
        // Survivor i added this stream into its mask; remove it.
        kernels::sub_mod32(outcome.sum.data(), buf.data(), length);
      } else {
        kernels::add_mod32(outcome.sum.data(), buf.data(), length);
      }
    }
  }
  transcript["reconstructions"] = reconstructions;

  // The modular sum now equals the survivors' plaintext quantized sum;
  // invert the affine quantization map on the real-valued mean.
  const double levels =
      static_cast<double>(session.spec.levels_minus_one());
  const double two_range = 2.0 * session.spec.clipping_range;
  const double inv_count = 1.0 / static_cast<double>(survivors.size());
  outcome.mean.resize(length);
  for (std::size_t j = 0; j < length; ++j) {
    const double mean_q = static_cast<double>(outcome.sum[j]) * inv_count;
    const double u = mean_q / levels;
    outcome.mean[j] = u * two_range - session.spec.clipping_range;
  }
  outcome.transcript_json = transcript.dump(2) + "\n";
  return outcome;
}

}  // namespace fedsim
