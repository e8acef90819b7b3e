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

#include "drlm/metrics.hpp"

namespace drlm {
namespace {

TEST(Perplexity, UniformModelEqualsVocabularySize) {
  for (std::size_t tokens : {1u, 7u, 1000u}) {
    EXPECT_NEAR(perplexity(-static_cast<double>(tokens) * std::log(10.0), tokens), 10.0, 1e-12);
  }
  EXPECT_THROW(perplexity(-1.0, 0), std::invalid_argument);
}

TEST(Perplexity, MonotoneInAverageLogLikelihood) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ll(-5000.0, -1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = ll(rng), b = ll(rng);
    if (a == b) continue;
    EXPECT_EQ(a > b, perplexity(a, 1000) < perplexity(b, 1000));
  }
}

TEST(Perplexity, SegmentationInvariant) {
  // Same totals split across documents give the same number.
  const double whole = perplexity(-120.0 - 80.0, 40 + 30);
  EXPECT_DOUBLE_EQ(whole, perplexity(-200.0, 70));
}

TEST(Accuracy, Examples) {
  const std::vector<int> gold{0, 1, 2, 1};
  EXPECT_DOUBLE_EQ(accuracy(gold, gold), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(gold, std::vector<int>{0, 1, 0, 0}), 0.5);
  EXPECT_THROW(accuracy(gold, std::vector<int>{0}), std::invalid_argument);
  EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
}

TEST(Accuracy, RandomLabelsNearChance) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> z(0, 3);
  std::vector<int> gold(10000), pred(10000);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    gold[i] = z(rng);
    pred[i] = z(rng);
  }
  EXPECT_NEAR(accuracy(gold, pred), 0.25, 0.02);
}

TEST(Confusion, TraceMatchesAccuracy) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> z(0, 4);
  std::vector<int> gold(500), pred(500);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    gold[i] = z(rng);
    pred[i] = (i % 3 == 0) ? gold[i] : z(rng);
  }
  const auto counts = ConfusionCounts::from_labels(gold, pred, 5);
  EXPECT_EQ(counts.total(), 500u);
  std::uint64_t sum = 0;
  for (int g = 0; g < 5; ++g) {
    for (int p = 0; p < 5; ++p) sum += counts.at(g, p);
  }
  EXPECT_EQ(sum, counts.total());
  EXPECT_DOUBLE_EQ(counts.accuracy(), static_cast<double>(counts.trace()) / 500.0);
  EXPECT_DOUBLE_EQ(counts.accuracy(), accuracy(gold, pred));
  ConfusionCounts c(2);
  EXPECT_THROW(c.add(2, 0), std::out_of_range);
}

TEST(MacroF1, HandComputedCases) {
  const std::vector<int> gold{0, 0, 1, 1};
  const std::vector<int> all_a{0, 0, 0, 0};
  EXPECT_NEAR(macro_f1(ConfusionCounts::from_labels(gold, all_a, 2)), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(macro_f1(ConfusionCounts::from_labels(gold, gold, 2)), 1.0);
  // A class absent from gold and predictions still counts.
  EXPECT_DOUBLE_EQ(macro_f1(ConfusionCounts::from_labels(gold, gold, 3)), 2.0 / 3.0);
  // Restricting to a subset of classes.
  const std::vector<int> only_b{1};
  EXPECT_DOUBLE_EQ(macro_f1(ConfusionCounts::from_labels(gold, all_a, 2), only_b), 0.0);
}

TEST(MacroF1, BoundedAndOneOnlyWhenDiagonal) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> z(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> gold(12), pred(12);
    for (std::size_t i = 0; i < gold.size(); ++i) {
      gold[i] = z(rng);
      pred[i] = trial % 2 ? gold[i] : z(rng);
    }
    const auto counts = ConfusionCounts::from_labels(gold, pred, 3);
    const double f = macro_f1(counts);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    bool present[3] = {false, false, false};
    for (int g : gold) present[g] = true;
    const bool diagonal = counts.trace() == counts.total() && present[0] && present[1] && present[2];
    EXPECT_EQ(f == 1.0, diagonal);
  }
}

TEST(Binomial, ExactTails) {
  // Exact summation oracle: sum_{k=60}^{100} C(100, k) / 2^100.
  double tail = 0.0;
  for (int k = 60; k <= 100; ++k) tail += std::exp(std::lgamma(101.0) - std::lgamma(k + 1.0) - std::lgamma(101.0 - k) - 100.0 * std::log(2.0));
  EXPECT_NEAR(binomial_test(60, 40, 100), 0.0284, 1e-4);
  EXPECT_NEAR(binomial_test(60, 40, 100), tail, 1e-12);
  EXPECT_NEAR(binomial_test(10, 0, 10), std::pow(2.0, -10), 1e-15);
  EXPECT_GT(binomial_test(50, 50, 100), 0.4);
  EXPECT_DOUBLE_EQ(binomial_test(0, 0, 5), 1.0);
  EXPECT_THROW(binomial_test(0, 0, 0), std::invalid_argument);
  EXPECT_THROW(binomial_test(6, 5, 10), std::invalid_argument);
}

TEST(Binomial, MonotoneInWins) {
  for (std::uint64_t n : {10u, 101u, 1000u}) {
    double previous = 1.0 + 1e-15;
    for (std::uint64_t wins = 0; wins <= n; ++wins) {
      const double p = binomial_test(wins, n - wins, n);
      EXPECT_LE(p, previous);
      EXPECT_GE(p, 0.0);
      previous = p;
    }
  }
}

TEST(Binomial, PairedOutcomeCountsDisagreements) {
  const std::vector<int> gold{0, 1, 2, 0, 1};
  const std::vector<int> a{0, 1, 0, 1, 1};
  const std::vector<int> b{0, 0, 2, 2, 1};
  const auto out = paired_outcome(gold, a, b);
  EXPECT_EQ(out.wins_a, 1u);
  EXPECT_EQ(out.wins_b, 1u);
  EXPECT_EQ(out.trials, 5u);
}

TEST(Predictions, RoundTrip) {
  const std::vector<PredictionRecord> records{{0, 0, "rel0", "rel1"}, {0, 1, "rel2", "rel2"}, {4, 3, "a", "b"}};
  std::stringstream buf;
  write_predictions(buf, records);
  EXPECT_EQ(read_predictions(buf), records);
  std::istringstream bad("0\t1\tx\n");
  EXPECT_THROW(read_predictions(bad), std::runtime_error);
}

}  // namespace
}  // namespace drlm
