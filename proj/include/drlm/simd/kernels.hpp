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

#pragma once

#include <cstddef>
#include <string_view>

namespace drlm::simd {

// Dense double-precision kernels backing the autodiff tape and the optimizer.
// Matrices are row-major. Every entry point exists in a scalar reference form
// and, on x86-64, an AVX2 form; elementwise kernels agree bit-for-bit across
// the two, reductions agree to rounding.
struct KernelTable {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y = A x
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y += A^T x
  void (*gemv_t_acc)(const double* a, std::size_t rows, std::size_t cols, const double* x,
                     double* y);
  // A += x y^T
  void (*ger_acc)(double* a, std::size_t rows, std::size_t cols, const double* x, const double* y);
  // y += alpha x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += a * b (elementwise)
  void (*mul_acc)(const double* a, const double* b, double* y, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  // accum += g^2; param -= lr * g / (sqrt(accum) + eps)
  void (*adagrad_update)(double* param, double* accum, const double* grad, std::size_t n,
                         double lr, double eps);
};

const KernelTable& scalar_kernels();

// nullptr when the build or the running CPU lacks AVX2.
const KernelTable* avx2_kernels();

// Kernel table selected once per process. The DRLM_SIMD environment variable
// ("scalar" or "avx2") overrides CPU detection.
const KernelTable& kernels();

// Replaces the process-wide selection; intended for tests and benchmarks.
void force_kernels(std::string_view name);

}  // namespace drlm::simd
