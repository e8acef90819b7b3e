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

#include <cmath>
#include <stdexcept>

#include "drlm/simd/kernels.hpp"
#include "drlm/training.hpp"

namespace drlm {

double clip_gradients(std::span<Tensor* const> grads, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("clip threshold must be positive");
  const auto& k = simd::kernels();
  double sq = 0.0;
  for (const Tensor* g : grads) sq += k.sum_sq(g->data(), g->size());
  const double norm = std::sqrt(sq);
  if (norm > tau) {
    const double factor = tau / norm;
    for (Tensor* g : grads) {
      for (double& v : g->values()) v *= factor;
    }
  }
  return norm;
}

double clip_gradients(DrlmParams& params, double tau) {
  std::vector<Tensor*> grads;
  for (Parameter* p : params.all()) {
    if (!p->grad.same_shape(p->value)) p->zero_grad();
    grads.push_back(&p->grad);
  }
  return clip_gradients(grads, tau);
}

AdagradState::AdagradState(const DrlmParams& params, double epsilon) : epsilon_(epsilon) {
  for (const Parameter* p : params.all()) accum_.emplace_back(p->value.rows(), p->value.cols());
}

void AdagradState::step(DrlmParams& params, double learning_rate) {
  const auto all = params.all();
  if (all.size() != accum_.size()) {
    throw std::invalid_argument("AdaGrad state was built for a different parameter set");
  }
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < all.size(); ++i) {
    Parameter& p = *all[i];
    if (!p.grad.same_shape(p.value) || !accum_[i].same_shape(p.value)) {
      throw std::invalid_argument("AdaGrad shape mismatch for " + p.name);
    }
    k.adagrad_update(p.value.data(), accum_[i].data(), p.grad.data(), p.value.size(),
                     learning_rate, epsilon_);
  }
}

}  // namespace drlm
