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
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "drlm/corpus.hpp"

namespace drlm {

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("synth: " + msg); };
  if (relations < 2) fail("relations must be at least 2");
  if (vocab_per_relation == 0) fail("vocab_per_relation must be positive");
  if (overlap >= vocab_per_relation) fail("overlap must be smaller than vocab_per_relation");
  if (!(shared_mass >= 0.0 && shared_mass < 1.0)) fail("shared_mass must lie in [0, 1)");
  if (shared_vocab == 0 && shared_mass > 0.0) fail("shared_mass needs shared_vocab > 0");
  if (!(zipf_exponent >= 0.0)) fail("zipf_exponent must be non-negative");
  if (!(successor_prob >= 0.0 && successor_prob <= 1.0)) fail("successor_prob must lie in [0, 1]");
  if (sentences_per_doc == 0) fail("sentences_per_doc must be positive");
  if (min_length == 0 || min_length > max_length) fail("need 0 < min_length <= max_length");
  if (train_docs == 0) fail("train_docs must be positive");
}

std::map<std::string, double> SynthCorpus::unigram(std::size_t z) const {
  std::map<std::string, double> dist;
  const double block_mass = shared_words.empty() ? 1.0 : 1.0 - config.shared_mass;
  for (std::size_t i = 0; i < relation_words.at(z).size(); ++i) {
    dist[relation_words[z][i]] += block_mass * relation_probs[z][i];
  }
  for (const auto& w : shared_words) {
    dist[w] += config.shared_mass / static_cast<double>(shared_words.size());
  }
  return dist;
}

std::size_t SynthCorpus::dominant_block(std::span<const std::string> sentence) const {
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t z = 0; z < relation_words.size(); ++z) {
    std::size_t count = 0;
    for (const auto& tok : sentence) {
      if (std::find(relation_words[z].begin(), relation_words[z].end(), tok) != relation_words[z].end()) {
        ++count;
      }
    }
    if (count > best_count) {
      best = z;
      best_count = count;
    }
  }
  return best;
}

std::string SynthCorpus::manifest_json() const {
  nlohmann::ordered_json j;
  j["seed"] = config.seed;
  j["relations"] = config.relations;
  j["vocab_per_relation"] = config.vocab_per_relation;
  j["overlap"] = config.overlap;
  j["shared_vocab"] = config.shared_vocab;
  j["shared_mass"] = config.shared_mass;
  j["zipf_exponent"] = config.zipf_exponent;
  j["successor_prob"] = config.successor_prob;
  j["sentences_per_doc"] = config.sentences_per_doc;
  j["min_length"] = config.min_length;
  j["max_length"] = config.max_length;
  j["label_names"] = label_names;
  j["dummy_label"] = label_names.front();
  j["initial_prior"] = initial_prior;
  j["transition"] = transition;
  j["splits"] = {{"train", train.size()}, {"dev", dev.size()}, {"test", test.size()}};
  return j.dump(2);
}

SynthCorpus generate_synthetic(const SynthConfig& config) {
  config.validate();
  const std::size_t Z = config.relations;
  SynthCorpus out;
  out.config = config;
  std::mt19937_64 rng(config.seed);

  for (std::size_t z = 0; z < Z; ++z) out.label_names.push_back("rel" + std::to_string(z));
  const std::size_t stride = config.vocab_per_relation - config.overlap;
  for (std::size_t z = 0; z < Z; ++z) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < config.vocab_per_relation; ++i) {
      words.push_back("w" + std::to_string(z * stride + i));
    }
    std::vector<double> probs(words.size());
    double total = 0.0;
    for (std::size_t r = 0; r < probs.size(); ++r) {
      probs[r] = 1.0 / std::pow(static_cast<double>(r + 1), config.zipf_exponent);
      total += probs[r];
    }
    for (double& p : probs) p /= total;
    std::shuffle(probs.begin(), probs.end(), rng);  // which word gets which rank
    out.relation_words.push_back(std::move(words));
    out.relation_probs.push_back(std::move(probs));
  }
  for (std::size_t i = 0; i < config.shared_vocab; ++i) out.shared_words.push_back("s" + std::to_string(i));

  out.initial_prior.assign(Z, 1.0 / static_cast<double>(Z));
  out.transition.assign(Z, std::vector<double>(Z, (1.0 - config.successor_prob) / static_cast<double>(Z - 1)));
  for (std::size_t b = 0; b < Z; ++b) out.transition[b][(b + 1) % Z] = config.successor_prob;

  std::vector<std::discrete_distribution<std::size_t>> word_dist;
  for (const auto& p : out.relation_probs) word_dist.emplace_back(p.begin(), p.end());
  std::vector<std::discrete_distribution<std::size_t>> next_relation;
  for (const auto& row : out.transition) next_relation.emplace_back(row.begin(), row.end());
  std::discrete_distribution<std::size_t> first_relation(out.initial_prior.begin(), out.initial_prior.end());
  std::uniform_int_distribution<std::size_t> length(config.min_length, config.max_length);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> shared_pick(0, std::max<std::size_t>(config.shared_vocab, 1) - 1);

  auto make_doc = [&] {
    RawDocument doc;
    for (std::size_t t = 0; t < config.sentences_per_doc; ++t) {
      const std::size_t z = t == 0 ? first_relation(rng) : next_relation[out.dominant_block(doc.sentences.back())](rng);
      std::vector<std::string> sentence;
      const std::size_t n = length(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (!out.shared_words.empty() && unit(rng) < config.shared_mass) {
          sentence.push_back(out.shared_words[shared_pick(rng)]);
        } else {
          sentence.push_back(out.relation_words[z][word_dist[z](rng)]);
        }
      }
      doc.sentences.push_back(std::move(sentence));
      doc.relations.emplace_back(out.label_names[z]);
    }
    return doc;
  };
  for (std::size_t i = 0; i < config.train_docs; ++i) out.train.push_back(make_doc());
  for (std::size_t i = 0; i < config.dev_docs; ++i) out.dev.push_back(make_doc());
  for (std::size_t i = 0; i < config.test_docs; ++i) out.test.push_back(make_doc());
  return out;
}

}  // namespace drlm
