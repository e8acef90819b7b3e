// Copyright 2026 The DRLM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drlm/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define DRLM_HAVE_AVX2_PATH 1
#include <immintrin.h>
#else
#define DRLM_HAVE_AVX2_PATH 0
#endif

namespace drlm::simd {

#if DRLM_HAVE_AVX2_PATH

// Only the functions below are compiled for AVX2 (no -mavx2 on the TU), so
// no inline library code instantiated here can leak AVX2 into scalar callers.
// FMA is deliberately not enabled: mul+add keeps elementwise results
// identical to the scalar reference.
#define DRLM_AVX2 __attribute__((target("avx2")))

namespace {

DRLM_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

DRLM_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  if (i + 4 <= n) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

DRLM_AVX2 void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x,
                    double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

DRLM_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

DRLM_AVX2 void gemv_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x,
                          double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], a + r * cols, y, cols);
}

DRLM_AVX2 void ger_acc(double* a, std::size_t rows, std::size_t cols, const double* x,
                       const double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], y, a + r * cols, cols);
}

DRLM_AVX2 void mul_acc(const double* a, const double* b, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

DRLM_AVX2 double sum_sq(const double* x, std::size_t n) { return dot(x, x, n); }

DRLM_AVX2 void adagrad_update(double* param, double* accum, const double* grad, std::size_t n,
                              double lr, double eps) {
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d acc = _mm256_loadu_pd(accum + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(g, g));
    _mm256_storeu_pd(accum + i, acc);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(acc), veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, g), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    accum[i] += grad[i] * grad[i];
    param[i] -= lr * grad[i] / (__builtin_sqrt(accum[i]) + eps);
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool supported = __builtin_cpu_supports("avx2");
  static const KernelTable table{"avx2", dot,     gemv,   gemv_t_acc,    ger_acc,
                                 axpy,   mul_acc, sum_sq, adagrad_update};
  return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_kernels() { return nullptr; }

#endif

}  // namespace drlm::simd
