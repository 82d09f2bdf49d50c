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

#include <atomic>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/kernels.hpp"

namespace fedsim::kernels {

const KernelTable& scalar_table();
#if FEDSIM_HAVE_AVX2
const KernelTable& avx2_table();
#endif

namespace {

bool cpu_has_avx2() {
#if FEDSIM_HAVE_AVX2
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Backend> g_active_backend{Backend::kScalar};

const KernelTable* table_ptr(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &scalar_table();
    case Backend::kAvx2:
#if FEDSIM_HAVE_AVX2
      return &avx2_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const Backend best = best_supported_backend();
    t = table_ptr(best);
    g_active.store(t, std::memory_order_release);
    g_active_backend.store(best, std::memory_order_release);
  }
  return *t;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_supported(Backend b) {
  if (b == Backend::kScalar) return true;
  return cpu_has_avx2();
}

Backend best_supported_backend() {
  return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

Backend active_backend() {
  active();  // force initialisation
  return g_active_backend.load(std::memory_order_acquire);
}

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw ConfigError(std::string("kernel backend '") + backend_name(b) +
                      "' is not supported on this machine");
  }
  g_active.store(table_ptr(b), std::memory_order_release);
  g_active_backend.store(b, std::memory_order_release);
}

const KernelTable& table_for(Backend b) {
  const KernelTable* t = table_ptr(b);
  if (t == nullptr) {
    throw ConfigError(std::string("kernel backend '") + backend_name(b) +
                      "' is not compiled into this binary");
  }
  return *t;
}

void add(double* dst, const double* a, const double* b, std::size_t n) {
  active().add(dst, a, b, n);
}
void sub(double* dst, const double* a, const double* b, std::size_t n) {
  active().sub(dst, a, b, n);
}
void scale(double* dst, const double* a, double s, std::size_t n) {
  active().scale(dst, a, s, n);
}
void axpy(double* y, double a, const double* x, std::size_t n) {
  active().axpy(y, a, x, n);
}
void clamp(double* dst, const double* a, double lo, double hi, std::size_t n) {
  active().clamp(dst, a, lo, hi, n);
}
double sum(const double* x, std::size_t n) { return active().sum(x, n); }
double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
double squared_norm(const double* x, std::size_t n) {
  return active().squared_norm(x, n);
}
void matvec_rows(double* z, const double* x, const double* w, std::size_t rows,
                 std::size_t cols) {
  active().matvec_rows(z, x, w, rows, cols);
}
void outer_accumulate(double* dw, const double* x, const double* dz,
                      std::size_t rows, std::size_t cols) {
  active().outer_accumulate(dw, x, dz, rows, cols);
}
void quantize(std::uint32_t* q, const double* v, std::size_t n, double range,
              std::uint32_t levels_minus_one) {
  active().quantize(q, v, n, range, levels_minus_one);
}
void dequantize(double* v, const std::uint32_t* q, std::size_t n, double range,
                std::uint32_t levels_minus_one) {
  active().dequantize(v, q, n, range, levels_minus_one);
}
void add_mod32(std::uint32_t* acc, const std::uint32_t* x, std::size_t n) {
  active().add_mod32(acc, x, n);
}
void sub_mod32(std::uint32_t* acc, const std::uint32_t* x, std::size_t n) {
  active().sub_mod32(acc, x, n);
}

}  // namespace fedsim::kernels
