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

#include "fedsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/textio.hpp"

namespace fedsim {

void validate(const SynthSpec& spec) {
  if (spec.n_sites == 0) throw ConfigError("n_sites must be positive");
  if (spec.per_site_counts.size() != spec.n_sites) {
    throw ConfigError("site_records has " +
                      std::to_string(spec.per_site_counts.size()) +
                      " entries for n_sites=" + std::to_string(spec.n_sites));
  }
  for (std::size_t c : spec.per_site_counts) {
    if (c == 0) throw ConfigError("site_records entries must be positive");
  }
  if (spec.dimension == 0) throw ConfigError("dimension must be positive");
  if (spec.class1_prob.size() != spec.n_sites) {
    throw ConfigError("class_priors has " +
                      std::to_string(spec.class1_prob.size()) +
                      " entries for n_sites=" + std::to_string(spec.n_sites));
  }
  for (double p : spec.class1_prob) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("class_priors entries must lie in [0,1]");
    }
  }
  if (!(spec.site_shift >= 0.0)) {
    throw ConfigError("site_shift must be nonnegative");
  }
  if (!(spec.class_separation >= 0.0)) {
    throw ConfigError("class_separation must be nonnegative");
  }
  if (!(spec.noise_std > 0.0)) throw ConfigError("noise_std must be positive");
}

namespace {

// Unit direction for site s, hashed from the site index.
std::vector<double> site_direction(const SynthSpec& spec, std::size_t s) {
  rng::Stream stream(rng::derive(spec.seed, rng::kTagSyntheticSite, s));
  std::vector<double> v(spec.dimension);
  double norm_sq = 0.0;
  for (double& x : v) {
    x = stream.next_gaussian();
    norm_sq += x * x;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  } else {
    v[0] = 1.0;
  }
  return v;
}

}  // namespace

SiteDataset generate(const SynthSpec& spec) {
  validate(spec);
  SiteDataset ds;
  ds.dimension = spec.dimension;
  ds.num_classes = 2;
  for (std::size_t s = 0; s < spec.n_sites; ++s) {
    const std::vector<double> v = site_direction(spec, s);
    rng::Stream stream(rng::derive(spec.seed, rng::kTagSyntheticRecord, s));
    const std::string site_id = "site_" + std::to_string(s);
    for (std::size_t r = 0; r < spec.per_site_counts[s]; ++r) {
      SiteRecord rec;
      rec.site_id = site_id;
      rec.label = stream.next_unit() < spec.class1_prob[s] ? 1 : 0;
      rec.features.resize(spec.dimension);
      for (std::size_t j = 0; j < spec.dimension; ++j) {
        double x = spec.noise_std * stream.next_gaussian();
        x += spec.site_shift * v[j];
        if (j == 0) x += spec.class_separation * rec.label;
        rec.features[j] = x;
      }
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

SiteDataset generate_balanced_test(const SynthSpec& spec, std::size_t n) {
  validate(spec);
  if (n < 2 || n % 2 != 0) {
    throw ConfigError("balanced test size must be even and at least 2");
  }
  std::vector<std::vector<double>> directions(spec.n_sites);
  for (std::size_t s = 0; s < spec.n_sites; ++s) {
    directions[s] = site_direction(spec, s);
  }
  SiteDataset ds;
  ds.dimension = spec.dimension;
  ds.num_classes = 2;
  rng::Stream stream(rng::derive(spec.seed, rng::kTagSyntheticTest));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = i % spec.n_sites;
    SiteRecord rec;
    rec.site_id = "site_" + std::to_string(s);
    rec.label = static_cast<int>(i % 2);
    rec.features.resize(spec.dimension);
    for (std::size_t j = 0; j < spec.dimension; ++j) {
      double x = spec.noise_std * stream.next_gaussian();
      x += spec.site_shift * directions[s][j];
      if (j == 0) x += spec.class_separation * rec.label;
      rec.features[j] = x;
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

SiteDataset load_csv(const std::string& path) {
  const std::string content = textio::read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = textio::split(line, ',');
  if (header.size() < 3 || header[0] != "site_id" || header[1] != "label") {
    throw ParseError(path + ": header must be site_id,label,f0,...");
  }
  for (std::size_t j = 2; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j - 2)) {
      throw ParseError(path + ": unexpected header column '" + header[j] +
                       "'");
    }
  }
  SiteDataset ds;
  ds.dimension = header.size() - 2;
  int max_label = 1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = textio::split(line, ',');
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    SiteRecord rec;
    rec.site_id = fields[0];
    if (rec.site_id.empty()) throw ParseError(where + ": empty site_id");
    const long long label = textio::parse_int(fields[1], where);
    if (label < 0) throw ParseError(where + ": negative label");
    rec.label = static_cast<int>(label);
    max_label = std::max(max_label, rec.label);
    rec.features.reserve(ds.dimension);
    for (std::size_t j = 2; j < fields.size(); ++j) {
      rec.features.push_back(textio::parse_double(fields[j], where));
    }
    ds.records.push_back(std::move(rec));
  }
  if (ds.records.empty()) throw ParseError(path + ": no records");
  ds.num_classes = max_label + 1;
  return ds;
}

void save_csv(const SiteDataset& ds, const std::string& path) {
  std::string out = "site_id,label";
  for (std::size_t j = 0; j < ds.dimension; ++j) {
    out += ",f" + std::to_string(j);
  }
  out.push_back('\n');
  for (const SiteRecord& rec : ds.records) {
    out += rec.site_id;
    out.push_back(',');
    out += std::to_string(rec.label);
    for (double f : rec.features) {
      out.push_back(',');
      out += textio::format_double(f);
    }
    out.push_back('\n');
  }
  textio::write_file(path, out);
}

std::vector<std::size_t> class_counts(const SiteDataset& ds) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(ds.num_classes),
                                  0);
  for (const SiteRecord& rec : ds.records) {
    if (rec.label >= ds.num_classes) {
      throw ConformanceError("record label " + std::to_string(rec.label) +
                             " outside class range");
    }
    ++counts[static_cast<std::size_t>(rec.label)];
  }
  return counts;
}

std::vector<double> class_weights(const SiteDataset& ds) {
  const std::vector<std::size_t> counts = class_counts(ds);
  const double n_total = static_cast<double>(ds.records.size());
  const double num_classes = static_cast<double>(ds.num_classes);
  std::vector<double> weights(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw ConfigError("class " + std::to_string(c) +
                        " has no records; inverse-frequency weight undefined");
    }
    weights[c] = n_total / (num_classes * static_cast<double>(counts[c]));
  }
  return weights;
}

SiteDataset concat(const SiteDataset& a, const SiteDataset& b) {
  if (a.records.empty()) return b;
  if (b.records.empty()) return a;
  if (a.dimension != b.dimension) {
    throw ConformanceError("concat: dimension mismatch");
  }
  if (a.num_classes != b.num_classes) {
    throw ConformanceError("concat: class count mismatch");
  }
  SiteDataset out = a;
  out.records.insert(out.records.end(), b.records.begin(), b.records.end());
  return out;
}

}  // namespace fedsim
