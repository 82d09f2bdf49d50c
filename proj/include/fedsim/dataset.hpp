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

// Multi-site labeled datasets: synthetic generation with controllable
// cross-site shift and label imbalance, plus the CSV record format.

#ifndef FEDSIM_DATASET_HPP_
#define FEDSIM_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace fedsim {

struct SiteRecord {
  std::string site_id;
  int label = 0;  // class index in {0..L-1}
  std::vector<double> features;
};

struct SiteDataset {
  std::vector<SiteRecord> records;
  std::size_t dimension = 0;
  int num_classes = 2;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Synthetic data model: site s, record with label y has features
//   x = (class_separation * y) * u + site_shift * v_s + noise_std * g
// where u is the first canonical basis vector, v_s is a unit direction
// hashed from the site index, and g is i.i.d. standard normal.  Labels are
// Bernoulli(class1_prob[s]).
struct SynthSpec {
  std::size_t n_sites = 0;
  std::vector<std::size_t> per_site_counts;
  std::size_t dimension = 0;
  std::vector<double> class1_prob;  // one per site
  double site_shift = 0.0;
  double class_separation = 0.0;
  double noise_std = 1.0;
  std::uint64_t seed = 0;
};

// Throws ConfigError naming the offending field.
void validate(const SynthSpec& spec);

SiteDataset generate(const SynthSpec& spec);

// Balanced holdout of n records (n even, alternating labels so each class
// gets exactly n/2), sites assigned round-robin, features drawn from the
// same per-site distributions as generate() but from an independent
// stream.  per_site_counts is ignored.
SiteDataset generate_balanced_test(const SynthSpec& spec, std::size_t n);

// CSV with header `site_id,label,f0,...,f{d-1}`, LF endings, floats at 17
// significant digits.  load_csv throws ParseError with a line number.
SiteDataset load_csv(const std::string& path);
void save_csv(const SiteDataset& ds, const std::string& path);

// Per-class counts of ds.records; length ds.num_classes.
std::vector<std::size_t> class_counts(const SiteDataset& ds);

// Inverse-frequency weights w_c = n_total / (L * n_c).  Throws ConfigError
// if any class is absent (n_c = 0).
std::vector<double> class_weights(const SiteDataset& ds);

// Concatenation preserving record order of `a` then `b`; dimensions and
// class counts must agree.
SiteDataset concat(const SiteDataset& a, const SiteDataset& b);

}  // namespace fedsim

#endif  // FEDSIM_DATASET_HPP_
