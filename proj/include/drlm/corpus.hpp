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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drlm/document.hpp"

namespace drlm {

inline constexpr std::string_view kUnkToken = "UNK";
inline constexpr std::string_view kNumToken = "NUM";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";
inline constexpr std::size_t kDefaultVocabCap = 10000;

// Pre-tokenized document. relations[t] labels the transition into sentence t
// (t = 0 pairs with the document start); null means no annotated relation.
struct RawDocument {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::optional<std::string>> relations;

  friend bool operator==(const RawDocument&, const RawDocument&) = default;
};

// Optional sign, digits with optional comma grouping, optional decimal part.
bool is_number(std::string_view token);
// Lowercases; numbers become NUM; reserved tokens pass through unchanged.
std::string normalize_token(std::string_view token);
std::vector<std::string> preprocess(std::span<const std::string> tokens);

class Vocabulary {
 public:
  Vocabulary();  // reserved tokens only

  // The `cap` most frequent normalized training tokens (ties in lexicographic
  // order) after the four reserved ids.
  static Vocabulary build(std::span<const RawDocument> training, std::size_t cap);

  int id(std::string_view token) const;  // UNK when absent
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  void append(std::string token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Relation label names; id 0 is the dummy label that null relations map to.
class LabelTable {
 public:
  explicit LabelTable(std::vector<std::string> names);

  int id(std::string_view name) const;  // throws std::invalid_argument if unknown
  const std::string& name(int id) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  void write(std::ostream& out) const;
  static LabelTable read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static LabelTable load(const std::filesystem::path& path);

 private:
  std::vector<std::string> names_;
};

// Normalizes, maps out-of-vocabulary tokens to UNK, null relations to the
// dummy label (observed = false), and appends the end-of-sentence id.
Document encode(const RawDocument& raw, const Vocabulary& vocab, const LabelTable& labels);
std::vector<Document> encode(std::span<const RawDocument> raw, const Vocabulary& vocab,
                             const LabelTable& labels);
// Token strings of an encoded sentence, without the end-of-sentence token.
std::vector<std::string> decode_sentence(std::span<const int> ids, const Vocabulary& vocab);

// One JSON object per line: {"sentences": [[tok, ...], ...], "relations": [name-or-null, ...]}.
std::vector<RawDocument> parse_corpus(std::istream& in);
void write_corpus(std::ostream& out, std::span<const RawDocument> docs);
std::vector<RawDocument> read_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, std::span<const RawDocument> docs);

RawDocument strip_labels(const RawDocument& doc);

// ---- synthetic corpora ----------------------------------------------------

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t relations = 3;
  std::size_t vocab_per_relation = 98;
  // Consecutive relation blocks share this many words (0 = disjoint).
  std::size_t overlap = 0;
  // Words available to every relation, drawn with total probability shared_mass.
  std::size_t shared_vocab = 2;
  double shared_mass = 0.05;
  double zipf_exponent = 1.0;
  // Probability that relation (b + 1) mod Z follows a sentence dominated by block b.
  double successor_prob = 0.8;
  std::size_t train_docs = 400;
  std::size_t dev_docs = 50;
  std::size_t test_docs = 50;
  std::size_t sentences_per_doc = 6;
  std::size_t min_length = 4;
  std::size_t max_length = 8;

  void validate() const;
};

struct SynthCorpus {
  SynthConfig config;
  std::vector<std::string> label_names;                    // "rel0", ...
  std::vector<std::vector<std::string>> relation_words;    // support of each relation block
  std::vector<std::vector<double>> relation_probs;         // unigram over that support
  std::vector<std::string> shared_words;
  std::vector<double> initial_prior;                       // slot 0
  std::vector<std::vector<double>> transition;             // [dominant block][relation]
  std::vector<RawDocument> train, dev, test;

  // Distribution of relation z over the whole vocabulary (shared words included).
  std::map<std::string, double> unigram(std::size_t z) const;
  // Dominant relation block of a sentence (ties to the lowest index).
  std::size_t dominant_block(std::span<const std::string> sentence) const;
  std::string manifest_json() const;
};

SynthCorpus generate_synthetic(const SynthConfig& config);

}  // namespace drlm
