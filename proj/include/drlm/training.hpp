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

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "drlm/model.hpp"

namespace drlm {

enum class Objective { kJoint, kConditional };

std::string_view objective_name(Objective o);
std::optional<Objective> objective_from_name(std::string_view name);

struct TrainConfig {
  Objective objective = Objective::kJoint;
  double learning_rate = 0.1;
  double clip = 5.0;
  double dropout = 0.5;
  int max_epochs = 5;
  std::uint64_t seed = 1;
  // Whether slots labeled with the dummy relation enter the conditional objective.
  bool conditional_includes_dummy = true;
  double adagrad_epsilon = 1e-8;

  void validate() const;
};

// Uniform in ±sqrt(6 / (fan_in + fan_out)) for every tensor except the
// relation prior: U in ±1e-5, b = 0. c_0 starts at zero.
DrlmParams init_params(const ModelDims& dims, Variant variant, std::uint64_t seed);

// -ℓ(θ): negated joint log-likelihood of words and observed relations.
Var joint_objective(ModelGraph& graph, const Document& doc, Dropout* dropout);

// -ℓ_r(θ): negated sum over slots of log p(z_t | y_t, y_{t-1}). For
// drlm-model2 the whole sequence posterior is used (exact enumeration).
Var conditional_objective(ModelGraph& graph, const Document& doc, Dropout* dropout,
                          bool include_dummy = true);

Var objective(ModelGraph& graph, const Document& doc, Dropout* dropout, const TrainConfig& config);

// Global L2 rescaling to norm <= tau. Returns the norm before clipping.
double clip_gradients(std::span<Tensor* const> grads, double tau);
double clip_gradients(DrlmParams& params, double tau);

class AdagradState {
 public:
  explicit AdagradState(const DrlmParams& params, double epsilon = 1e-8);

  // accum += g^2; θ -= lr * g / (sqrt(accum) + ε), over params.all() in order.
  void step(DrlmParams& params, double learning_rate);

  const std::vector<Tensor>& accumulators() const { return accum_; }
  double epsilon() const { return epsilon_; }

 private:
  std::vector<Tensor> accum_;
  double epsilon_;
};

double corpus_perplexity(const DrlmParams& params, std::span<const Document> docs);
// Fraction of scored slots tagged correctly. Slots with unobserved gold are
// skipped; with include_dummy false, dummy-labeled slots are skipped too.
double tagging_accuracy(const DrlmParams& params, std::span<const Document> docs,
                        bool include_dummy = true);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean objective per document
  double dev_metric = 0.0;
  double seconds = 0.0;
};

struct FitResult {
  DrlmParams params;  // parameters of the best dev epoch
  std::string metric_name;  // "dev_ppl" or "dev_acc"
  double initial_dev_metric = 0.0;
  int best_epoch = 0;
  std::vector<EpochStats> history;
};

// Online (per-document) AdaGrad over a seeded shuffle each epoch; evaluates
// the dev metric after every epoch with dropout off and keeps the best
// parameters. Writes one key=value line per epoch to `log` when given.
FitResult fit(std::span<const Document> train, std::span<const Document> dev, DrlmParams params,
              const TrainConfig& config, std::ostream* log = nullptr);

}  // namespace drlm
