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

// AVX2 backend.  Compiled with -mavx2; only ever executed after a runtime
// CPU check.  Each kernel performs the same IEEE-754 operations as the
// scalar reference in the same order (one 256-bit lane = one iteration of
// the scalar blocked loop), so outputs are bit-identical.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "fedsim/kernels.hpp"

namespace fedsim::kernels {
namespace {

void add_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(
        dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (std::size_t i = n4; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(
        dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (std::size_t i = n4; i < n; ++i) dst[i] = a[i] - b[i];
}

void scale_avx2(double* dst, const double* a, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(vs, _mm256_loadu_pd(a + i)));
  }
  for (std::size_t i = n4; i < n; ++i) dst[i] = s * a[i];
}

void axpy_avx2(double* y, double a, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] = y[i] + a * x[i];
}

void clamp_avx2(double* dst, const double* a, double lo, double hi,
                std::size_t n) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    v = _mm256_max_pd(v, vlo);
    v = _mm256_min_pd(v, vhi);
    _mm256_storeu_pd(dst + i, v);
  }
  for (std::size_t i = n4; i < n; ++i) {
    double v = a[i];
    v = v < lo ? lo : v;
    v = v > hi ? hi : v;
    dst[i] = v;
  }
}

double reduce_lanes(__m256d acc, double tail) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + tail;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) tail += x[i];
  return reduce_lanes(acc, tail);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) tail += x[i] * y[i];
  return reduce_lanes(acc, tail);
}

double squared_norm_avx2(const double* x, std::size_t n) {
  return dot_avx2(x, x, n);
}

void matvec_rows_avx2(double* z, const double* x, const double* w,
                      std::size_t rows, std::size_t cols) {
  const std::size_t c4 = cols & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = x[i];
    const __m256d vxi = _mm256_set1_pd(xi);
    const double* row = w + i * cols;
    for (std::size_t c = 0; c < c4; c += 4) {
      const __m256d prod = _mm256_mul_pd(vxi, _mm256_loadu_pd(row + c));
      _mm256_storeu_pd(z + c, _mm256_add_pd(_mm256_loadu_pd(z + c), prod));
    }
    for (std::size_t c = c4; c < cols; ++c) z[c] = z[c] + xi * row[c];
  }
}

void outer_accumulate_avx2(double* dw, const double* x, const double* dz,
                           std::size_t rows, std::size_t cols) {
  const std::size_t c4 = cols & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = x[i];
    const __m256d vxi = _mm256_set1_pd(xi);
    double* row = dw + i * cols;
    for (std::size_t c = 0; c < c4; c += 4) {
      const __m256d prod = _mm256_mul_pd(vxi, _mm256_loadu_pd(dz + c));
      _mm256_storeu_pd(row + c, _mm256_add_pd(_mm256_loadu_pd(row + c), prod));
    }
    for (std::size_t c = c4; c < cols; ++c) row[c] = row[c] + xi * dz[c];
  }
}

void quantize_avx2(std::uint32_t* q, const double* v, std::size_t n,
                   double range, std::uint32_t levels_minus_one) {
  const double two_range = 2.0 * range;
  const double levels = static_cast<double>(levels_minus_one);
  const __m256d vneg = _mm256_set1_pd(-range);
  const __m256d vpos = _mm256_set1_pd(range);
  const __m256d vtwo = _mm256_set1_pd(two_range);
  const __m256d vlevels = _mm256_set1_pd(levels);
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d c = _mm256_loadu_pd(v + i);
    c = _mm256_max_pd(c, vneg);
    c = _mm256_min_pd(c, vpos);
    const __m256d u = _mm256_div_pd(_mm256_add_pd(c, vpos), vtwo);
    const __m256d scaled = _mm256_mul_pd(u, vlevels);
    const __m256d rounded =
        _mm256_round_pd(scaled, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m128i vi = _mm256_cvtpd_epi32(rounded);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(q + i), vi);
  }
  for (std::size_t i = n4; i < n; ++i) {
    double c = v[i];
    c = c < -range ? -range : c;
    c = c > range ? range : c;
    const double u = (c + range) / two_range;
    const double scaled = u * levels;
    q[i] = static_cast<std::uint32_t>(std::nearbyint(scaled));
  }
}

void dequantize_avx2(double* v, const std::uint32_t* q, std::size_t n,
                     double range, std::uint32_t levels_minus_one) {
  const double two_range = 2.0 * range;
  const double levels = static_cast<double>(levels_minus_one);
  const __m256d vtwo = _mm256_set1_pd(two_range);
  const __m256d vlevels = _mm256_set1_pd(levels);
  const __m256d vrange = _mm256_set1_pd(range);
  const std::size_t n4 = n & ~static_cast<std::size_t>(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m128i vi =
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(q + i));
    const __m256d d = _mm256_cvtepi32_pd(vi);
    const __m256d u = _mm256_div_pd(d, vlevels);
    _mm256_storeu_pd(v + i, _mm256_sub_pd(_mm256_mul_pd(u, vtwo), vrange));
  }
  for (std::size_t i = n4; i < n; ++i) {
    const double u = static_cast<double>(q[i]) / levels;
    v[i] = u * two_range - range;
  }
}

void add_mod32_avx2(std::uint32_t* acc, const std::uint32_t* x,
                    std::size_t n) {
  const std::size_t n8 = n & ~static_cast<std::size_t>(7);
  for (std::size_t i = 0; i < n8; i += 8) {
    const __m256i va =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(acc + i));
    const __m256i vx =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(acc + i),
                        _mm256_add_epi32(va, vx));
  }
  for (std::size_t i = n8; i < n; ++i) acc[i] += x[i];
}

void sub_mod32_avx2(std::uint32_t* acc, const std::uint32_t* x,
                    std::size_t n) {
  const std::size_t n8 = n & ~static_cast<std::size_t>(7);
  for (std::size_t i = 0; i < n8; i += 8) {
    const __m256i va =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(acc + i));
    const __m256i vx =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(acc + i),
                        _mm256_sub_epi32(va, vx));
  }
  for (std::size_t i = n8; i < n; ++i) acc[i] -= x[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table = {
      add_avx2,          sub_avx2,
      scale_avx2,        axpy_avx2,
      clamp_avx2,        sum_avx2,
      dot_avx2,          squared_norm_avx2,
      matvec_rows_avx2,  outer_accumulate_avx2,
      quantize_avx2,     dequantize_avx2,
      add_mod32_avx2,    sub_mod32_avx2,
  };
  return table;
}

}  // namespace fedsim::kernels
