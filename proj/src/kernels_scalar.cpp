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

// Scalar reference backend.  This file is the definition of correct output;
// the AVX2 backend must match it bit for bit.

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "fedsim/kernels.hpp"

namespace fedsim::kernels {
namespace {

void add_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void scale_scalar(double* dst, const double* a, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = s * a[i];
}

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void clamp_scalar(double* dst, const double* a, double lo, double hi,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = a[i];
    v = v < lo ? lo : v;
    v = v > hi ? hi : v;
    dst[i] = v;
  }
}

double sum_scalar(const double* x, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    l0 += x[i];
    l1 += x[i + 1];
    l2 += x[i + 2];
    l3 += x[i + 3];
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) tail += x[i];
  return ((l0 + l1) + (l2 + l3)) + tail;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    l0 += x[i] * y[i];
    l1 += x[i + 1] * y[i + 1];
    l2 += x[i + 2] * y[i + 2];
    l3 += x[i + 3] * y[i + 3];
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) tail += x[i] * y[i];
  return ((l0 + l1) + (l2 + l3)) + tail;
}

double squared_norm_scalar(const double* x, std::size_t n) {
  return dot_scalar(x, x, n);
}

void matvec_rows_scalar(double* z, const double* x, const double* w,
                        std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = x[i];
    const double* row = w + i * cols;
    for (std::size_t c = 0; c < cols; ++c) z[c] = z[c] + xi * row[c];
  }
}

void outer_accumulate_scalar(double* dw, const double* x, const double* dz,
                             std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = x[i];
    double* row = dw + i * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] = row[c] + xi * dz[c];
  }
}

void quantize_scalar(std::uint32_t* q, const double* v, std::size_t n,
                     double range, std::uint32_t levels_minus_one) {
  const double two_range = 2.0 * range;
  const double levels = static_cast<double>(levels_minus_one);
  for (std::size_t i = 0; i < n; ++i) {
    double c = v[i];
    c = c < -range ? -range : c;
    c = c > range ? range : c;
    const double u = (c + range) / two_range;
    const double scaled = u * levels;
    q[i] = static_cast<std::uint32_t>(std::nearbyint(scaled));
  }
}

void dequantize_scalar(double* v, const std::uint32_t* q, std::size_t n,
                       double range, std::uint32_t levels_minus_one) {
  const double two_range = 2.0 * range;
  const double levels = static_cast<double>(levels_minus_one);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(q[i]) / levels;
    v[i] = u * two_range - range;
  }
}

void add_mod32_scalar(std::uint32_t* acc, const std::uint32_t* x,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void sub_mod32_scalar(std::uint32_t* acc, const std::uint32_t* x,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] -= x[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      add_scalar,          sub_scalar,
      scale_scalar,        axpy_scalar,
      clamp_scalar,        sum_scalar,
      dot_scalar,          squared_norm_scalar,
      matvec_rows_scalar,  outer_accumulate_scalar,
      quantize_scalar,     dequantize_scalar,
      add_mod32_scalar,    sub_mod32_scalar,
  };
  return table;
}

}  // namespace fedsim::kernels
