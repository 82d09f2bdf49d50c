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

// Counter-based deterministic random number generation.
//
// Every random decision in the simulator flows through this header so that a
// run is a pure function of its seeds.  The generator is the splitmix64
// output function applied to a counter, which gives O(1) skipping, cheap
// stream copies, and platform-independent output (no <random> distributions
// are used anywhere; their implementations are not portable across standard
// libraries).
//
// Exact definitions, for cross-implementation checks:
//
//   mix64(z):  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//              z ^= z >> 27;  z *= 0x94D049BB133111EB
//              z ^= z >> 31
//
//   stream(seed) element i (i >= 0):  mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)
//
//   unit double in [0, 1):   (x >> 11) * 2^-53
//   gaussian pair (Box-Muller, both halves consumed in order):
//       u1 = ((x1 >> 11) + 1) * 2^-53            -- in (0, 1], log-safe
//       u2 = (x2 >> 11) * 2^-53                  -- in [0, 1)
//       r = sqrt(-2 * log(u1)),  theta = 2 * pi * u2
//       z0 = r * cos(theta),  z1 = r * sin(theta)
//
// Substreams are derived, never split positionally: derive(seed, tag, a, b)
// hashes the arguments into a fresh seed.  Call sites must pass a distinct
// purpose tag (see Tag below) so that e.g. the shuffle stream of client 3
// can never collide with the noise stream of client 3.

#ifndef FEDSIM_RNG_HPP_
#define FEDSIM_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace fedsim::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Purpose tags for derived substreams.  Values are part of the on-disk
// reproducibility contract: renumbering them changes every run.
enum Tag : std::uint64_t {
  kTagSyntheticSite = 1,    // per-site offset directions
  kTagSyntheticRecord = 2,  // per-site record features/labels
  kTagSyntheticTest = 3,    // held-out test pool
  kTagPartition = 4,        // per-client train/val shuffles
  kTagInit = 5,             // model parameter initialisation
  kTagBatch = 6,            // per-epoch batch shuffles
  kTagNoise = 7,            // privacy noise per client/round
  kTagPairwise = 8,         // masking seed agreement
  kTagMaskRound = 9,        // per-round mask expansion
  kTagShamir = 10,          // share polynomial coefficients
  kTagSample = 11,          // client sampling per round
  kTagRun = 12,             // per-repetition run seeds
  kTagData = 13,            // dataset seed when not given explicitly
};

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a) {
  return mix64(seed ^ mix64(a + kGolden));
}

inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                                      std::uint64_t b) {
  return derive(derive(seed, a), b);
}

inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                                      std::uint64_t b, std::uint64_t c) {
  return derive(derive(seed, a, b), c);
}

// A deterministic stream of draws.  Copyable; copies continue independently
// from the copied position.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return mix64(seed_ + (++counter_) * kGolden); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, ..., n-1} via modulo.  The modulo bias is < n / 2^64,
  // far below anything observable here, and keeping the mapping trivial
  // makes the stream easy to reproduce in other languages.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal draws, Box-Muller, both halves of each pair used.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 0x1.921fb54442d18p+1 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// In-place Fisher-Yates shuffle driven by `stream`.  Iterates i from n-1
// down to 1 and swaps index i with stream.next_below(i + 1).
template <typename T>
void shuffle(T* data, std::size_t n, Stream& stream) {
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t j =
        static_cast<std::size_t>(stream.next_below(static_cast<std::uint64_t>(i) + 1));
    T tmp = data[i];
    data[i] = data[j];
    data[j] = tmp;
  }
}

}  // namespace fedsim::rng

#endif  // FEDSIM_RNG_HPP_
