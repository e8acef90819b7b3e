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

#include "drlm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace drlm {

double perplexity(double total_log_likelihood, std::size_t tokens) {
  if (tokens == 0) throw std::invalid_argument("perplexity needs at least one token");
  return std::exp(-total_log_likelihood / static_cast<double>(tokens));
}

double accuracy(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("accuracy: " + std::to_string(gold.size()) + " gold labels vs " +
                                std::to_string(predicted.size()) + " predictions");
  }
  if (gold.empty()) throw std::invalid_argument("accuracy: no labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

ConfusionCounts::ConfusionCounts(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw std::invalid_argument("confusion matrix needs at least one class");
}

ConfusionCounts ConfusionCounts::from_labels(std::span<const int> gold,
                                             std::span<const int> predicted,
                                             std::size_t classes) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("confusion counts: label sequences differ in length");
  }
  ConfusionCounts c(classes);
  for (std::size_t i = 0; i < gold.size(); ++i) c.add(gold[i], predicted[i]);
  return c;
}

void ConfusionCounts::add(int gold, int predicted) {
  if (gold < 0 || predicted < 0 || static_cast<std::size_t>(gold) >= classes_ ||
      static_cast<std::size_t>(predicted) >= classes_) {
    throw std::out_of_range("confusion counts: label outside [0, " + std::to_string(classes_) +
                            ")");
  }
  ++counts_[static_cast<std::size_t>(gold) * classes_ + static_cast<std::size_t>(predicted)];
  ++total_;
}

std::uint64_t ConfusionCounts::at(int gold, int predicted) const {
  return counts_.at(static_cast<std::size_t>(gold) * classes_ + static_cast<std::size_t>(predicted));
}

std::uint64_t ConfusionCounts::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < classes_; ++i) t += counts_[i * classes_ + i];
  return t;
}

double ConfusionCounts::accuracy() const {
  if (total_ == 0) throw std::invalid_argument("accuracy of an empty confusion matrix");
  return static_cast<double>(trace()) / static_cast<double>(total_);
}

double macro_f1(const ConfusionCounts& counts, std::span<const int> classes) {
  std::vector<int> all;
  if (classes.empty()) {
    for (std::size_t c = 0; c < counts.classes(); ++c) all.push_back(static_cast<int>(c));
    classes = all;
  }
  double sum = 0.0;
  for (int c : classes) {
    std::uint64_t tp = counts.at(c, c);
    std::uint64_t predicted = 0;
    std::uint64_t gold = 0;
    for (std::size_t o = 0; o < counts.classes(); ++o) {
      predicted += counts.at(static_cast<int>(o), c);
      gold += counts.at(c, static_cast<int>(o));
    }
    const double p = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double r = gold > 0 ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
    sum += (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

double binomial_test(std::uint64_t wins_a, std::uint64_t wins_b, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("binomial test needs at least one trial");
  if (wins_a > trials || wins_b > trials || wins_a + wins_b > trials) {
    throw std::invalid_argument("binomial test: win counts exceed the number of trials");
  }
  const std::uint64_t n = wins_a + wins_b;
  if (n == 0) return 1.0;
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  // Terms are summed from the largest exponent down in log space.
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(n - wins_a + 1);
  for (std::uint64_t k = wins_a; k <= n; ++k) {
    const double lt = lg_n1 - std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(n - k) + 1.0) + log_half_n;
    terms.push_back(lt);
    m = std::max(m, lt);
  }
  double s = 0.0;
  for (double lt : terms) s += std::exp(lt - m);
  return std::min(1.0, std::exp(m + std::log(s)));
}

PairedOutcome paired_outcome(std::span<const int> gold, std::span<const int> predicted_a,
                             std::span<const int> predicted_b) {
  if (gold.size() != predicted_a.size() || gold.size() != predicted_b.size()) {
    throw std::invalid_argument("paired outcome: label sequences differ in length");
  }
  PairedOutcome out;
  out.trials = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool a = predicted_a[i] == gold[i];
    const bool b = predicted_b[i] == gold[i];
    if (a && !b) ++out.wins_a;
    if (b && !a) ++out.wins_b;
  }
  return out;
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> records) {
  for (const auto& r : records) {
    out << r.document << '\t' << r.slot << '\t' << r.gold << '\t' << r.predicted << '\n';
  }
}

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    PredictionRecord r;
    if (!(fields >> r.document >> r.slot >> r.gold >> r.predicted)) {
      throw std::runtime_error("malformed prediction line " + std::to_string(lineno));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace drlm
