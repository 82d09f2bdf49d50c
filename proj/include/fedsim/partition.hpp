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

// Site-aware partitioning: whole sites are assigned to clients by greedy
// load balancing, then each client's records are shuffled and split into
// train/validation.  Records never cross client boundaries, mirroring the
// institutional structure of multi-site data.

#ifndef FEDSIM_PARTITION_HPP_
#define FEDSIM_PARTITION_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"

namespace fedsim {

struct PartitionSpec {
  std::size_t n_clients = 1;
  double train_ratio = 0.8;  // in (0,1)
  std::uint64_t seed = 0;
};

void validate(const PartitionSpec& spec);

struct ClientPartition {
  std::size_t client_id = 0;
  std::vector<std::string> sites;  // sorted by assignment order
  SiteDataset train;
  SiteDataset val;
};

// Greedy assignment: sites sorted by count descending (ties by site_id
// ascending), each assigned to the client with the fewest records so far
// (ties by lowest client index).  Zero-count sites are dropped first.
// Throws ConfigError("insufficient sites") when fewer nonempty sites than
// clients.
std::vector<std::vector<std::string>> assign_sites(
    const std::map<std::string, std::size_t>& site_counts,
    std::size_t n_clients);

// Full partition: assign sites, filter records per client, shuffle with a
// per-client derived seed, split at floor(count * train_ratio).  Warnings
// (e.g. a client with an empty train or val split) are appended to
// `warnings` when given.
std::vector<ClientPartition> partition(const SiteDataset& ds,
                                       const PartitionSpec& spec,
                                       std::vector<std::string>* warnings =
                                           nullptr);

}  // namespace fedsim

#endif  // FEDSIM_PARTITION_HPP_
