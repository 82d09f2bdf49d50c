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

#ifndef FEDSIM_TENSOR_HPP_
#define FEDSIM_TENSOR_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace fedsim {

// A named dense array of doubles, row-major.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t size() const { return data.size(); }
};

Tensor make_tensor(std::string name, std::vector<std::size_t> shape);

// An ordered collection of named tensors: model parameters, updates,
// gradients.  Order is part of the identity; flatten/unflatten concatenate
// tensors in stored order.
struct ParameterSet {
  std::vector<Tensor> tensors;

  std::size_t total_size() const;
  // True if `other` has the same tensor names, order and shapes.
  bool conformant_with(const ParameterSet& other) const;
  // Throws ConformanceError naming the first mismatch.
  void require_conformant(const ParameterSet& other) const;

  Tensor& at(const std::string& name);              // throws ConformanceError
  const Tensor& at(const std::string& name) const;  // throws ConformanceError

  std::vector<double> flatten() const;
  // Rebuilds a set with this set's structure from `flat`.  Throws
  // ConformanceError if the length does not match total_size().
  ParameterSet unflatten(const std::vector<double>& flat) const;

  static ParameterSet zeros_like(const ParameterSet& other);
};

// Elementwise arithmetic over whole sets (kernel-backed).  Shapes must
// conform; results have the structure of the left operand.
ParameterSet add(const ParameterSet& a, const ParameterSet& b);
ParameterSet sub(const ParameterSet& a, const ParameterSet& b);
ParameterSet scale(const ParameterSet& a, double s);
void axpy_inplace(ParameterSet& y, double a, const ParameterSet& x);
double squared_norm(const ParameterSet& a);

}  // namespace fedsim

#endif  // FEDSIM_TENSOR_HPP_
