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

#include "fedsim/partition.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

void validate(const PartitionSpec& spec) {
  if (spec.n_clients == 0) throw ConfigError("clients must be >= 1");
  if (!(spec.train_ratio > 0.0 && spec.train_ratio < 1.0)) {
    throw ConfigError("train_ratio must lie strictly between 0 and 1");
  }
}

std::vector<std::vector<std::string>> assign_sites(
    const std::map<std::string, std::size_t>& site_counts,
    std::size_t n_clients) {
  if (n_clients == 0) throw ConfigError("clients must be >= 1");

  std::vector<std::pair<std::string, std::size_t>> sites;
  for (const auto& [id, count] : site_counts) {
    if (count > 0) sites.emplace_back(id, count);
  }
  if (sites.size() < n_clients) {
    throw ConfigError("insufficient sites: " + std::to_string(sites.size()) +
                      " nonempty sites for " + std::to_string(n_clients) +
                      " clients");
  }
  // Largest sites first; equal counts ordered by site_id.
  std::sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::vector<std::string>> assignment(n_clients);
  std::vector<std::size_t> totals(n_clients, 0);
  for (const auto& [id, count] : sites) {
    std::size_t smallest = 0;
    for (std::size_t k = 1; k < n_clients; ++k) {
      if (totals[k] < totals[smallest]) smallest = k;
    }
    assignment[smallest].push_back(id);
    totals[smallest] += count;
  }
  return assignment;
}

std::vector<ClientPartition> partition(const SiteDataset& ds,
                                       const PartitionSpec& spec,
                                       std::vector<std::string>* warnings) {
  validate(spec);

  std::map<std::string, std::size_t> site_counts;
  for (const SiteRecord& rec : ds.records) ++site_counts[rec.site_id];
  const std::vector<std::vector<std::string>> assignment =
      assign_sites(site_counts, spec.n_clients);

  std::vector<ClientPartition> clients(spec.n_clients);
  for (std::size_t k = 0; k < spec.n_clients; ++k) {
    ClientPartition& client = clients[k];
    client.client_id = k;
    client.sites = assignment[k];

    // Filter records by owned sites, preserving dataset order.
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      const std::string& sid = ds.records[i].site_id;
      if (std::find(client.sites.begin(), client.sites.end(), sid) !=
          client.sites.end()) {
        indices.push_back(i);
      }
    }

    // Independent permutation per client.
    rng::Stream stream(rng::derive(spec.seed, rng::kTagPartition, k));
    rng::shuffle(indices.data(), indices.size(), stream);

    const std::size_t split_idx = static_cast<std::size_t>(std::floor(
        static_cast<double>(indices.size()) * spec.train_ratio));
    client.train.dimension = ds.dimension;
    client.train.num_classes = ds.num_classes;
    client.val.dimension = ds.dimension;
    client.val.num_classes = ds.num_classes;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      (i < split_idx ? client.train : client.val)
          .records.push_back(ds.records[indices[i]]);
    }
    if (warnings != nullptr) {
      if (client.train.empty()) {
        warnings->push_back("client " + std::to_string(k) +
                            " has an empty train split");
      }
      if (client.val.empty()) {
        warnings->push_back("client " + std::to_string(k) +
                            " has an empty validation split");
      }
    }
  }
  return clients;
}

}  // namespace fedsim
