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

#include "fedsim/tensor.hpp"

#include <cstring>

#include "fedsim/error.hpp"
#include "fedsim/kernels.hpp"

namespace fedsim {

Tensor make_tensor(std::string name, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  Tensor t;
  t.name = std::move(name);
  t.shape = std::move(shape);
  t.data.assign(n, 0.0);
  return t;
}

std::size_t ParameterSet::total_size() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors) n += t.size();
  return n;
}

bool ParameterSet::conformant_with(const ParameterSet& other) const {
  if (tensors.size() != other.tensors.size()) return false;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].name != other.tensors[i].name) return false;
    if (tensors[i].shape != other.tensors[i].shape) return false;
  }
  return true;
}

void ParameterSet::require_conformant(const ParameterSet& other) const {
  if (tensors.size() != other.tensors.size()) {
    throw ConformanceError("parameter sets have " +
                           std::to_string(tensors.size()) + " vs " +
                           std::to_string(other.tensors.size()) + " tensors");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].name != other.tensors[i].name) {
      throw ConformanceError("tensor " + std::to_string(i) + " is '" +
                             tensors[i].name + "' vs '" +
                             other.tensors[i].name + "'");
    }
    if (tensors[i].shape != other.tensors[i].shape) {
      throw ConformanceError("tensor '" + tensors[i].name +
                             "' has mismatched shapes");
    }
  }
}

Tensor& ParameterSet::at(const std::string& name) {
  for (Tensor& t : tensors) {
    if (t.name == name) return t;
  }
  throw ConformanceError("no tensor named '" + name + "'");
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const Tensor& t : tensors) {
    if (t.name == name) return t;
  }
  throw ConformanceError("no tensor named '" + name + "'");
}

std::vector<double> ParameterSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(total_size());
  for (const Tensor& t : tensors) {
    flat.insert(flat.end(), t.data.begin(), t.data.end());
  }
  return flat;
}

ParameterSet ParameterSet::unflatten(const std::vector<double>& flat) const {
  if (flat.size() != total_size()) {
    throw ConformanceError("flat vector has " + std::to_string(flat.size()) +
                           " elements, structure needs " +
                           std::to_string(total_size()));
  }
  ParameterSet out = *this;
  std::size_t offset = 0;
  for (Tensor& t : out.tensors) {
    std::memcpy(t.data.data(), flat.data() + offset,
                t.size() * sizeof(double));
    offset += t.size();
  }
  return out;
}

ParameterSet ParameterSet::zeros_like(const ParameterSet& other) {
  ParameterSet out = other;
  for (Tensor& t : out.tensors) t.data.assign(t.size(), 0.0);
  return out;
}

ParameterSet add(const ParameterSet& a, const ParameterSet& b) {
  a.require_conformant(b);
  ParameterSet out = a;
  for (std::size_t i = 0; i < out.tensors.size(); ++i) {
    kernels::add(out.tensors[i].data.data(), a.tensors[i].data.data(),
                 b.tensors[i].data.data(), out.tensors[i].size());
  }
  return out;
}

ParameterSet sub(const ParameterSet& a, const ParameterSet& b) {
  a.require_conformant(b);
  ParameterSet out = a;
  for (std::size_t i = 0; i < out.tensors.size(); ++i) {
    kernels::sub(out.tensors[i].data.data(), a.tensors[i].data.data(),
                 b.tensors[i].data.data(), out.tensors[i].size());
  }
  return out;
}

ParameterSet scale(const ParameterSet& a, double s) {
  ParameterSet out = a;
  for (std::size_t i = 0; i < out.tensors.size(); ++i) {
    kernels::scale(out.tensors[i].data.data(), a.tensors[i].data.data(), s,
                   out.tensors[i].size());
  }
  return out;
}

void axpy_inplace(ParameterSet& y, double a, const ParameterSet& x) {
  y.require_conformant(x);
  for (std::size_t i = 0; i < y.tensors.size(); ++i) {
    kernels::axpy(y.tensors[i].data.data(), a, x.tensors[i].data.data(),
                  y.tensors[i].size());
  }
}

double squared_norm(const ParameterSet& a) {
  // Norms are defined over the flattened concatenation; computing per
  // tensor and combining would change the reduction order.
  std::vector<double> flat = a.flatten();
  return kernels::squared_norm(flat.data(), flat.size());
}

}  // namespace fedsim
