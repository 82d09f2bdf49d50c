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

// Simulated secure aggregation round: coordinate clipping, fixed-point
// quantization, pairwise PRG masks that cancel in the modular sum, and
// Shamir-shared mask seeds for dropout recovery.
//
// SECURITY NOTE: this is a protocol-mechanics simulation.  Key agreement
// is replaced by server-mediated plaintext seed exchange, so it provides
// NO cryptographic protection; it exists to study exactness, dropout
// behavior, and overhead of the aggregation pipeline.

#ifndef FEDSIM_SECAGG_HPP_
#define FEDSIM_SECAGG_HPP_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace fedsim {

// Prime field for seed sharing.
inline constexpr std::uint64_t kShamirPrime = (1ull << 61) - 1;
// Masked values live in Z_M with M = 2^32 (natural uint32 wraparound).
inline constexpr std::uint32_t kQuantBitsMax = 30;

struct SecAggSpec {
  double clipping_range = 8.0;     // coordinates clipped to [-R, R]
  std::uint32_t quant_bits = 22;   // values quantized to [0, 2^b - 1]
  std::size_t num_shares = 3;
  std::size_t threshold = 2;       // shares needed to reconstruct a seed
  std::uint64_t seed = 0;

  std::uint32_t levels_minus_one() const {
    return (std::uint32_t{1} << quant_bits) - 1;
  }
};

// Throws ConfigError; enforces n_clients >= 3 and 2^b * n_clients < 2^32.
void validate(const SecAggSpec& spec, std::size_t n_clients);

struct SeedShare {
  std::size_t owner = 0;   // whose seed this is a share of
  std::size_t holder = 0;  // which client stores it
  std::uint64_t x = 0;     // evaluation point, 1-based
  std::uint64_t value = 0; // polynomial value in GF(kShamirPrime)
};

// Session state after the (simulated) seed-exchange phase.
struct SecAggSession {
  std::size_t n_clients = 0;
  SecAggSpec spec;
  std::vector<std::uint64_t> personal_seeds;  // < kShamirPrime, "private"
  std::vector<std::uint64_t> publics;         // broadcast values
  std::vector<SeedShare> shares;              // all distributed shares
};

// Derives per-client seeds, broadcast values, and Shamir shares (share k of
// client i is held by client (i+k) mod n).
SecAggSession secagg_setup(std::size_t n_clients, const SecAggSpec& spec);

// Symmetric pairwise mask seed for clients i and j, computable from the
// broadcast values alone.
std::uint64_t pairwise_seed(const SecAggSession& session, std::size_t i,
                            std::size_t j);

// Fixed-point map [-R, R] -> [0, 2^b - 1] (round-half-even) and its affine
// inverse.
std::vector<std::uint32_t> quantize(const std::vector<double>& v,
                                    const SecAggSpec& spec);
std::vector<double> dequantize(const std::vector<std::uint32_t>& q,
                               const SecAggSpec& spec);

// Client i's net mask for `round`: sum over j > i of PRG(s_ij) minus sum
// over j < i of PRG(s_ij), elementwise mod 2^32.  Masks of all clients sum
// to zero mod 2^32.
std::vector<std::uint32_t> make_mask(const SecAggSession& session,
                                     std::size_t client_id, std::size_t round,
                                     std::size_t length);

struct MaskedUpdate {
  std::size_t client_id = 0;
  std::vector<std::uint32_t> values;  // quantized + mask, mod 2^32
  std::vector<std::size_t> peers;     // ids masked against
};

MaskedUpdate mask_update(const SecAggSession& session, std::size_t client_id,
                         const std::vector<std::uint32_t>& quantized,
                         std::size_t round);

// Shamir split of `secret` (< kShamirPrime) into num_shares points on a
// random degree-(threshold-1) polynomial; x = 1..num_shares.
std::vector<std::uint64_t> share_secret(std::uint64_t secret,
                                        std::size_t num_shares,
                                        std::size_t threshold,
                                        std::uint64_t coef_seed);

// Lagrange interpolation at x=0 from >= threshold points with distinct x.
// Throws ProtocolError on too few or duplicate points.
std::uint64_t reconstruct_secret(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& points,
    std::size_t threshold);

struct AggregateOutcome {
  std::vector<double> mean;        // dequantized mean over survivors
  std::vector<std::uint32_t> sum;  // modular sum after unmasking
  std::size_t survivor_count = 0;
  std::string transcript_json;     // audit record of the round
};

// Sums the survivors' masked vectors, reconstructs each dropped client's
// seed from the survivors' shares, strips the unpaired residual masks, and
// returns the dequantized survivor mean.  Throws ProtocolError when any
// dropped seed cannot be reconstructed.
AggregateOutcome secure_aggregate(const std::vector<MaskedUpdate>& masked,
                                  const std::set<std::size_t>& dropped,
                                  const SecAggSession& session,
                                  std::size_t round);

}  // namespace fedsim

#endif  // FEDSIM_SECAGG_HPP_
