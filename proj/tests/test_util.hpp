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

#include <cmath>
#include <random>
#include <vector>

#include "drlm/document.hpp"
#include "drlm/model.hpp"

namespace drlm::testutil {

inline void fill_uniform(autodiff::Tensor& t, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& x : t.values()) x = u(rng);
}

inline autodiff::Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                      double scale = 1.0) {
  autodiff::Tensor t(rows, cols);
  fill_uniform(t, rng, scale);
  return t;
}

// Allocates `variant` and draws every tensor uniformly in ±scale.
inline DrlmParams random_params(const ModelDims& dims, Variant variant, std::uint64_t seed,
                                double scale = 0.5) {
  DrlmParams p = allocate_params(dims, variant);
  std::mt19937_64 rng(seed);
  for (autodiff::Parameter* param : p.all()) fill_uniform(param->value, rng, scale);
  return p;
}

// Sentences of non-reserved tokens, each terminated by the end token.
inline Document random_document(std::size_t V, std::size_t Z, std::size_t T, std::size_t max_len,
                                std::mt19937_64& rng) {
  std::uniform_int_distribution<int> word(kReservedTokens, static_cast<int>(V) - 1);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> rel(0, static_cast<int>(Z) - 1);
  Document doc;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<int> s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s.push_back(word(rng));
    s.push_back(kEosId);
    doc.sentences.push_back(std::move(s));
    doc.relations.push_back(rel(rng));
    doc.observed.push_back(true);
  }
  return doc;
}

inline double logsumexp(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace drlm::testutil
