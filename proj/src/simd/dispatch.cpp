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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "drlm/simd/kernels.hpp"

namespace drlm::simd {
namespace {

const KernelTable* lookup(std::string_view name) {
  if (name == "scalar") return &scalar_kernels();
  if (name == "avx2") return avx2_kernels();
  return nullptr;
}

const KernelTable* detect() {
  if (const char* env = std::getenv("DRLM_SIMD")) {
    if (const KernelTable* t = lookup(env)) return t;
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

void force_kernels(std::string_view name) {
  const KernelTable* t = lookup(name);
  if (t == nullptr) {
    throw std::invalid_argument("kernel set '" + std::string(name) +
                                "' is unknown or unsupported on this CPU");
  }
  active().store(t, std::memory_order_relaxed);
}

}  // namespace drlm::simd
