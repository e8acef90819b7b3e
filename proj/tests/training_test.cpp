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
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "drlm/corpus.hpp"
#include "drlm/inference.hpp"
#include "drlm/training.hpp"
#include "test_util.hpp"

namespace drlm {
namespace {

using testutil::random_document;
using testutil::random_params;

double neg(Tape& tape, Var v) { return -tape.scalar(v); }

TEST(Objectives, ConditionalIsSumOfLogPosteriors) {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DrlmParams p = random_params({12, 3, 4, 3}, Variant::kDrlm, seed, 1.0);
    const Document doc = random_document(12, 3, 4, 5, rng);
    const auto post = slot_posteriors(p, doc);
    double expected = 0.0;
    for (std::size_t t = 0; t < doc.size(); ++t) expected += std::log(post[t].probs[doc.relations[t]]);
    Tape tape;
    ModelGraph g(tape, p);
    const double value = neg(tape, conditional_objective(g, doc, nullptr));
    EXPECT_NEAR(value, expected, 1e-10);
    EXPECT_LE(value, 0.0);
  }
}

TEST(Objectives, JointIsConditionalPlusMarginal) {
  std::mt19937_64 rng(2);
  for (Variant v : {Variant::kDrlm, Variant::kModel2}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const DrlmParams p = random_params({12, 3, 4, 3}, v, seed, 1.0);
      const Document doc = random_document(12, 3, 3, 5, rng);
      Tape tape;
      ModelGraph g(tape, p);
      const double joint = neg(tape, joint_objective(g, doc, nullptr));
      const double conditional = neg(tape, conditional_objective(g, doc, nullptr));
      EXPECT_NEAR(joint, document_joint_log_prob(p, doc), 1e-10);
      EXPECT_NEAR(joint, conditional + marginal_log_likelihood(p, doc), 1e-10);
    }
  }
}

TEST(Objectives, ConditionalReachesZeroOnlyWithCertainPosterior) {
  // Slot probabilities that put all mass on the gold label make the objective vanish.
  DrlmParams p = allocate_params({10, 3, 4, 2}, Variant::kDrlm);
  p.b.value = Tensor::vector({800.0, 0.0});
  Document doc{{{5, kEosId}, {6, kEosId}}, {0, 0}, {true, true}};
  Tape tape;
  ModelGraph g(tape, p);
  EXPECT_EQ(tape.scalar(conditional_objective(g, doc, nullptr)), 0.0);
  doc.relations = {0, 1};
  Tape t2;
  ModelGraph g2(t2, p);
  EXPECT_GT(t2.scalar(conditional_objective(g2, doc, nullptr)), 0.0);
}

TEST(Objectives, DummySlotsCanBeExcluded) {
  std::mt19937_64 rng(3);
  const DrlmParams p = random_params({12, 3, 4, 3}, Variant::kDrlm, 3, 1.0);
  Document doc = random_document(12, 3, 4, 4, rng);
  doc.relations = {0, 1, 0, 2};
  const auto post = slot_posteriors(p, doc);
  Tape tape;
  ModelGraph g(tape, p);
  const double value = neg(tape, conditional_objective(g, doc, nullptr, false));
  EXPECT_NEAR(value, std::log(post[1].probs[1]) + std::log(post[3].probs[2]), 1e-10);
}

TEST(Objectives, UnlabeledSlotRejected) {
  std::mt19937_64 rng(4);
  const DrlmParams p = random_params({12, 3, 4, 3}, Variant::kDrlm, 4);
  Document doc = random_document(12, 3, 2, 4, rng);
  doc.relations[1] = kNoLabel;
  Tape tape;
  ModelGraph g(tape, p);
  EXPECT_THROW(joint_objective(g, doc, nullptr), std::invalid_argument);
  EXPECT_THROW(conditional_objective(g, doc, nullptr), std::invalid_argument);
}

TEST(Clip, Examples) {
  Tensor a = Tensor::vector({6.0, 8.0});
  std::vector<Tensor*> grads{&a};
  EXPECT_DOUBLE_EQ(clip_gradients(grads, 5.0), 10.0);
  EXPECT_DOUBLE_EQ(a[0], 3.0);
  EXPECT_DOUBLE_EQ(a[1], 4.0);

  Tensor b = Tensor::vector({1.8, 2.4});
  std::vector<Tensor*> small{&b};
  EXPECT_NEAR(clip_gradients(small, 5.0), 3.0, 1e-15);
  EXPECT_EQ(b, Tensor::vector({1.8, 2.4}));
}

TEST(Clip, BoundAndDirectionAcrossTensors) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const double scale = std::pow(10.0, trial % 5 - 1);
    Tensor a = testutil::random_tensor(3, 4, rng, scale), b = testutil::random_tensor(5, 1, rng, scale);
    const Tensor a0 = a, b0 = b;
    std::vector<Tensor*> grads{&a, &b};
    clip_gradients(grads, 5.0);
    double norm = 0.0, dot = 0.0, n0 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      norm += a[i] * a[i];
      dot += a[i] * a0[i];
      n0 += a0[i] * a0[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      norm += b[i] * b[i];
      dot += b[i] * b0[i];
      n0 += b0[i] * b0[i];
    }
    EXPECT_LE(std::sqrt(norm), 5.0 + 1e-12);
    EXPECT_NEAR(dot / std::sqrt(norm * n0), 1.0, 1e-12);
  }
}

TEST(Adagrad, FirstStepZeroGradientAndShrinkingSteps) {
  DrlmParams p = allocate_params({6, 2, 2, 2}, Variant::kDrlm);
  AdagradState state(p);
  p.zero_grad();
  p.W_o.grad.fill(0.5);
  state.step(p, 0.1);
  for (double v : p.W_o.value.values()) EXPECT_NEAR(v, -0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  for (double v : p.X.value.values()) EXPECT_EQ(v, 0.0);

  double previous = 0.1 + 1e-12;
  for (int step = 0; step < 10; ++step) {
    const double before = p.W_o.value[0];
    state.step(p, 0.1);
    const double magnitude = std::abs(p.W_o.value[0] - before);
    EXPECT_LE(magnitude, previous);
    previous = magnitude;
  }
  for (const Tensor& acc : state.accumulators()) {
    for (double v : acc.values()) EXPECT_GE(v, 0.0);
  }
}

TEST(Init, RangesFollowFanInFanOut) {
  const ModelDims d{50, 8, 6, 3};
  const DrlmParams p = init_params(d, Variant::kDrlm, 11);
  for (double v : p.U.value.values()) {
    EXPECT_LE(std::abs(v), 1e-5);
  }
  for (double v : p.b.value.values()) EXPECT_EQ(v, 0.0);
  for (double v : p.c_0.value.values()) EXPECT_EQ(v, 0.0);
  const double bound = std::sqrt(6.0 / (50 + 6));
  double largest = 0.0;
  for (double v : p.W_o.value.values()) largest = std::max(largest, std::abs(v));
  EXPECT_LE(largest, bound);
  EXPECT_GT(largest, 0.5 * bound);
  bool u_nonzero = false;
  for (double v : p.U.value.values()) u_nonzero |= v != 0.0;
  EXPECT_TRUE(u_nonzero);

  const DrlmParams again = init_params(d, Variant::kDrlm, 11);
  EXPECT_EQ(again.W_o.value, p.W_o.value);
  EXPECT_NE(init_params(d, Variant::kDrlm, 12).W_o.value, p.W_o.value);
}

TEST(Training, RepeatedDocumentLossDecreases) {
  std::mt19937_64 rng(6);
  const Document doc = random_document(15, 3, 3, 6, rng);
  for (Objective kind : {Objective::kJoint, Objective::kConditional}) {
    DrlmParams p = init_params({15, 6, 6, 3}, Variant::kDrlm, 6);
    AdagradState state(p);
    TrainConfig config;
    config.objective = kind;
    double first = 0.0, last = 0.0;
    for (int step = 0; step < 50; ++step) {
      p.zero_grad();
      Tape tape;
      ModelGraph g(tape, p);
      const Var loss = objective(g, doc, nullptr, config);
      const double value = tape.scalar(loss);
      if (step == 0) first = value;
      last = value;
      tape.backward(loss);
      clip_gradients(p, config.clip);
      state.step(p, config.learning_rate);
    }
    EXPECT_LT(last, first) << objective_name(kind);
  }
}

TEST(TrainConfigTest, Validation) {
  TrainConfig ok;
  EXPECT_NO_THROW(ok.validate());
  for (auto mutate : std::vector<void (*)(TrainConfig&)>{
           [](TrainConfig& c) { c.learning_rate = 0.0; }, [](TrainConfig& c) { c.clip = -1.0; },
           [](TrainConfig& c) { c.dropout = 1.0; }, [](TrainConfig& c) { c.dropout = -0.1; },
           [](TrainConfig& c) { c.max_epochs = 0; }}) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), std::invalid_argument);
  }
  EXPECT_EQ(objective_from_name("joint"), Objective::kJoint);
  EXPECT_EQ(objective_from_name("conditional"), Objective::kConditional);
  EXPECT_FALSE(objective_from_name("mle").has_value());
}

struct SmallCorpus {
  std::vector<Document> train, dev;
  std::size_t V = 0, Z = 0;
};

SmallCorpus small_corpus() {
  SynthConfig sc;
  sc.seed = 3;
  sc.vocab_per_relation = 20;
  sc.train_docs = 40;
  sc.dev_docs = 10;
  sc.test_docs = 1;
  sc.sentences_per_doc = 4;
  const SynthCorpus corpus = generate_synthetic(sc);
  const Vocabulary vocab = Vocabulary::build(corpus.train, kDefaultVocabCap);
  const LabelTable labels(corpus.label_names);
  return {encode(corpus.train, vocab, labels), encode(corpus.dev, vocab, labels), vocab.size(),
          labels.size()};
}

TEST(Fit, DeterministicAndImprovesDevPerplexity) {
  const SmallCorpus c = small_corpus();
  for (double dropout : {0.0, 0.5}) {
    TrainConfig config;
    config.max_epochs = 2;
    config.dropout = dropout;
    config.seed = 9;
    const ModelDims d{c.V, 8, 8, c.Z};
    std::ostringstream log_a, log_b;
    const FitResult a = fit(c.train, c.dev, init_params(d, Variant::kDrlm, 9), config, &log_a);
    const FitResult b = fit(c.train, c.dev, init_params(d, Variant::kDrlm, 9), config, &log_b);
    const DrlmParams& fa = a.params;
    const DrlmParams& fb = b.params;
    const auto pa = fa.all(), pb = fb.all();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value) << pa[i]->name;
    EXPECT_EQ(a.metric_name, "dev_ppl");
    ASSERT_EQ(a.history.size(), 2u);
    EXPECT_LT(a.history[0].dev_metric, a.initial_dev_metric);
    EXPECT_GE(a.best_epoch, 1);
    EXPECT_NEAR(corpus_perplexity(a.params, c.dev), a.history[a.best_epoch - 1].dev_metric, 1e-9);
    std::size_t lines = 0;
    std::istringstream in(log_a.str());
    for (std::string line; std::getline(in, line);) {
      EXPECT_EQ(line.rfind("epoch=", 0), 0u) << line;
      ++lines;
    }
    EXPECT_EQ(lines, 2u);
  }
}

TEST(Fit, ConditionalSelectsByAccuracy) {
  const SmallCorpus c = small_corpus();
  TrainConfig config;
  config.objective = Objective::kConditional;
  config.max_epochs = 2;
  const FitResult r = fit(c.train, c.dev, init_params({c.V, 8, 8, c.Z}, Variant::kDrlm, 4), config);
  EXPECT_EQ(r.metric_name, "dev_acc");
  for (const auto& e : r.history) EXPECT_GE(r.history[r.best_epoch - 1].dev_metric, e.dev_metric);
  EXPECT_NEAR(tagging_accuracy(r.params, c.dev), r.history[r.best_epoch - 1].dev_metric, 1e-12);
}

}  // namespace
}  // namespace drlm
