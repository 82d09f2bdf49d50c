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

// Numeric kernels with a scalar reference implementation and an AVX2
// variant selected at runtime.  Both backends are required to produce
// bit-identical results so that backend choice can never affect a run:
//
//  * Elementwise ops perform the same IEEE-754 operations per element in
//    the same order; the build disables FMA contraction.
//  * Reductions (sum, dot, squared_norm) are defined as a fixed four-lane
//    blocked algorithm: lane j accumulates elements j, j+4, j+8, ... over
//    the largest multiple-of-four prefix; the remaining tail is summed
//    sequentially into its own accumulator; the result is
//    ((lane0 + lane1) + (lane2 + lane3)) + tail.  The scalar backend
//    executes this with four scalar accumulators, the AVX2 backend with one
//    256-bit register, element-for-element the same additions.
//  * Rounding in quantize uses round-half-to-even in both backends
//    (std::nearbyint in round-to-nearest mode vs. _mm256_round_pd).
//  * Modular integer ops are exact by construction.
//
// The matvec/outer kernels cover the two dense-layer access patterns used
// by the models; their accumulation order (row-major, row index outermost)
// is likewise part of the contract.

#ifndef FEDSIM_KERNELS_HPP_
#define FEDSIM_KERNELS_HPP_

#include <cstddef>
#include <cstdint>

namespace fedsim::kernels {

enum class Backend { kScalar = 0, kAvx2 = 1 };

const char* backend_name(Backend b);
bool backend_supported(Backend b);
Backend best_supported_backend();

// Process-wide active backend.  Defaults to best_supported_backend().
// set_backend throws ConfigError if the backend is not supported on this
// machine.
Backend active_backend();
void set_backend(Backend b);

// dst[i] = a[i] + b[i].  dst may alias a or b.
void add(double* dst, const double* a, const double* b, std::size_t n);
// dst[i] = a[i] - b[i].
void sub(double* dst, const double* a, const double* b, std::size_t n);
// dst[i] = s * a[i].
void scale(double* dst, const double* a, double s, std::size_t n);
// y[i] += a * x[i].
void axpy(double* y, double a, const double* x, std::size_t n);
// dst[i] = min(max(a[i], lo), hi) evaluated in exactly that order.
void clamp(double* dst, const double* a, double lo, double hi, std::size_t n);

// Four-lane blocked reductions; see file comment for the exact order.
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double squared_norm(const double* x, std::size_t n);

// z[c] += sum_i x[i] * w[i*cols + c]; accumulation runs i outermost in
// increasing order, so each z[c] sees the additions in row order.
void matvec_rows(double* z, const double* x, const double* w,
                 std::size_t rows, std::size_t cols);
// dw[i*cols + c] += x[i] * dz[c].
void outer_accumulate(double* dw, const double* x, const double* dz,
                      std::size_t rows, std::size_t cols);

// q[i] = round_half_even((min(max(v[i], -range), range) + range)
//                        / (2*range) * levels_minus_one)
// with the divisions/multiplications performed in exactly that order.
void quantize(std::uint32_t* q, const double* v, std::size_t n, double range,
              std::uint32_t levels_minus_one);
// v[i] = q[i] / levels_minus_one * (2*range) - range, same order.
void dequantize(double* v, const std::uint32_t* q, std::size_t n, double range,
                std::uint32_t levels_minus_one);

// acc[i] = (acc[i] + x[i]) mod 2^32  /  (acc[i] - x[i]) mod 2^32.
void add_mod32(std::uint32_t* acc, const std::uint32_t* x, std::size_t n);
void sub_mod32(std::uint32_t* acc, const std::uint32_t* x, std::size_t n);

// Internal: full kernel tables per backend, used by the equivalence tests
// to compare both implementations directly regardless of the active one.
struct KernelTable {
  void (*add)(double*, const double*, const double*, std::size_t);
  void (*sub)(double*, const double*, const double*, std::size_t);
  void (*scale)(double*, const double*, double, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*clamp)(double*, const double*, double, double, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  void (*matvec_rows)(double*, const double*, const double*, std::size_t,
                      std::size_t);
  void (*outer_accumulate)(double*, const double*, const double*, std::size_t,
                           std::size_t);
  void (*quantize)(std::uint32_t*, const double*, std::size_t, double,
                   std::uint32_t);
  void (*dequantize)(double*, const std::uint32_t*, std::size_t, double,
                     std::uint32_t);
  void (*add_mod32)(std::uint32_t*, const std::uint32_t*, std::size_t);
  void (*sub_mod32)(std::uint32_t*, const std::uint32_t*, std::size_t);
};

const KernelTable& table_for(Backend b);

}  // namespace fedsim::kernels

#endif  // FEDSIM_KERNELS_HPP_
