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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "drlm/inference.hpp"
#include "drlm/metrics.hpp"
#include "drlm/training.hpp"

namespace drlm {

double corpus_perplexity(const DrlmParams& params, std::span<const Document> docs) {
  double ll = 0.0;
  std::size_t tokens = 0;
  for (const Document& doc : docs) {
    ll += marginal_log_likelihood(params, doc);
    tokens += doc.token_count();
  }
  return perplexity(ll, tokens);
}

double tagging_accuracy(const DrlmParams& params, std::span<const Document> docs,
                        bool include_dummy) {
  std::vector<int> gold;
  std::vector<int> predicted;
  for (const Document& doc : docs) {
    const std::vector<int> tags = tag_document(params, doc);
    for (std::size_t t = 0; t < tags.size(); ++t) {
      if (doc.relations[t] == kNoLabel || !doc.observed[t]) continue;
      if (!include_dummy && doc.relations[t] == kDummyLabel) continue;
      gold.push_back(doc.relations[t]);
      predicted.push_back(tags[t]);
    }
  }
  return accuracy(gold, predicted);
}

FitResult fit(std::span<const Document> train, std::span<const Document> dev, DrlmParams params,
              const TrainConfig& config, std::ostream* log) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("training corpus is empty");
  if (dev.empty()) throw std::invalid_argument("development corpus is empty");

  const bool by_accuracy =
      config.objective == Objective::kConditional && has_relations(params.variant);
  auto dev_metric = [&](const DrlmParams& p) {
    return by_accuracy ? tagging_accuracy(p, dev, config.conditional_includes_dummy)
                       : corpus_perplexity(p, dev);
  };
  auto better = [&](double candidate, double incumbent) {
    return by_accuracy ? candidate > incumbent : candidate < incumbent;
  };

  FitResult result;
  result.metric_name = by_accuracy ? "dev_acc" : "dev_ppl";
  result.initial_dev_metric = dev_metric(params);
  double best_metric = result.initial_dev_metric;

  AdagradState adagrad(params, config.adagrad_epsilon);
  std::mt19937_64 order_rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), order_rng);
    Dropout dropout(config.dropout, config.seed * 0x9E3779B97F4A7C15ULL + epoch);
    Dropout* active = dropout.active() ? &dropout : nullptr;

    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      params.zero_grad();
      Tape tape;
      ModelGraph graph(tape, params);
      const Var loss = objective(graph, train[idx], active, config);
      loss_sum += tape.scalar(loss);
      tape.backward(loss);
      clip_gradients(params, config.clip);
      adagrad.step(params, config.learning_rate);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.dev_metric = dev_metric(params);
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.history.push_back(stats);
    // Ties keep the earlier epoch.
    if (result.best_epoch == 0 || better(stats.dev_metric, best_metric)) {
      best_metric = stats.dev_metric;
      result.best_epoch = epoch;
      result.params = params;
    }
    if (log != nullptr) {
      *log << "epoch=" << epoch << " objective=" << objective_name(config.objective)
           << " train_loss=" << stats.train_loss << ' ' << result.metric_name << '='
           << stats.dev_metric << " seconds=" << stats.seconds << '\n';
    }
  }
  result.params.zero_grad();
  return result;
}

}  // namespace drlm
