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

namespace drlm {

// exp(-LL / tokens); LL in nats and including end-of-sentence tokens.
double perplexity(double total_log_likelihood, std::size_t tokens);

double accuracy(std::span<const int> gold, std::span<const int> predicted);

// Rows are gold labels, columns predictions.
class ConfusionCounts {
 public:
  explicit ConfusionCounts(std::size_t classes);
  static ConfusionCounts from_labels(std::span<const int> gold, std::span<const int> predicted,
                                     std::size_t classes);

  void add(int gold, int predicted);
  std::uint64_t at(int gold, int predicted) const;
  std::size_t classes() const { return classes_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t trace() const;
  double accuracy() const;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Unweighted mean of per-class F1 over `classes` (all classes when empty).
// Classes with P + R = 0 contribute 0.
double macro_f1(const ConfusionCounts& counts, std::span<const int> classes = {});

// One-sided exact sign test. wins_a / wins_b count the items where only A /
// only B is correct; `trials` is the number of paired items. Returns
// P[X >= wins_a] for X ~ Binomial(wins_a + wins_b, 1/2).
double binomial_test(std::uint64_t wins_a, std::uint64_t wins_b, std::uint64_t trials);

struct PairedOutcome {
  std::uint64_t wins_a = 0;
  std::uint64_t wins_b = 0;
  std::uint64_t trials = 0;
};
PairedOutcome paired_outcome(std::span<const int> gold, std::span<const int> predicted_a,
                             std::span<const int> predicted_b);

// One line per scored slot: document id, slot index, gold label, predicted label.
struct PredictionRecord {
  std::size_t document = 0;
  std::size_t slot = 0;
  std::string gold;
  std::string predicted;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

void write_predictions(std::ostream& out, std::span<const PredictionRecord> records);
std::vector<PredictionRecord> read_predictions(std::istream& in);

}  // namespace drlm
