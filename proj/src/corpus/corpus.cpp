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
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "drlm/corpus.hpp"

namespace drlm {
namespace {

bool is_reserved(std::string_view token) {
  return token == kUnkToken || token == kNumToken || token == kBosToken || token == kEosToken;
}

}  // namespace

bool is_number(std::string_view token) {
  static const std::regex pattern(R"(^[+-]?(\d{1,3}(,\d{3})+|\d+)(\.\d+)?$)");
  return std::regex_match(token.begin(), token.end(), pattern);
}

std::string normalize_token(std::string_view token) {
  if (is_reserved(token)) return std::string(token);
  if (is_number(token)) return std::string(kNumToken);
  std::string out(token);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> preprocess(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(normalize_token(t));
  return out;
}

// ---- Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary() {
  for (std::string_view r : {kUnkToken, kNumToken, kBosToken, kEosToken}) append(std::string(r));
}

void Vocabulary::append(std::string token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const RawDocument> training, std::size_t cap) {
  if (cap == 0) throw std::invalid_argument("vocabulary cap must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : training) {
    for (const auto& sentence : doc.sentences) {
      for (const auto& raw : sentence) {
        std::string tok = normalize_token(raw);
        if (!is_reserved(tok)) ++counts[tok];
      }
    }
  }
  if (counts.empty()) throw std::invalid_argument("cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is ordered lexicographically, so a stable sort by count keeps ties in that order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (std::size_t i = 0; i < ranked.size() && i < cap; ++i) vocab.append(ranked[i].first);
  return vocab;
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

void Vocabulary::write(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno <= static_cast<std::size_t>(kReservedTokens)) {
      if (line != vocab.tokens_[lineno - 1]) {
        throw std::runtime_error("vocabulary line " + std::to_string(lineno) + " must be '" +
                                 vocab.tokens_[lineno - 1] + "', found '" + line + "'");
      }
      continue;
    }
    if (line.empty()) throw std::runtime_error("empty token on vocabulary line " + std::to_string(lineno));
    if (vocab.contains(line)) {
      throw std::runtime_error("duplicate token '" + line + "' on vocabulary line " +
                               std::to_string(lineno));
    }
    vocab.append(line);
  }
  if (lineno < static_cast<std::size_t>(kReservedTokens)) {
    throw std::runtime_error("vocabulary file lacks the reserved tokens");
  }
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary " + path.string());
  return read(in);
}

// ---- LabelTable -------------------------------------------------------------

LabelTable::LabelTable(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw std::invalid_argument("label table needs at least the dummy label");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw std::invalid_argument("empty label name at line " + std::to_string(i + 1));
    if (std::find(names_.begin(), names_.begin() + static_cast<std::ptrdiff_t>(i), names_[i]) !=
        names_.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw std::invalid_argument("duplicate label '" + names_[i] + "'");
    }
  }
}

int LabelTable::id(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::invalid_argument("unknown relation label '" + std::string(name) + "'");
  return static_cast<int>(it - names_.begin());
}

const std::string& LabelTable::name(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
    throw std::out_of_range("label id " + std::to_string(id) + " outside label table");
  }
  return names_[static_cast<std::size_t>(id)];
}

void LabelTable::write(std::ostream& out) const {
  for (const auto& n : names_) out << n << '\n';
}

LabelTable LabelTable::read(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) names.push_back(line);
  }
  return LabelTable(std::move(names));
}

void LabelTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
}

LabelTable LabelTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label table " + path.string());
  return read(in);
}

// ---- encoding -----------------------------------------------------------------

Document encode(const RawDocument& raw, const Vocabulary& vocab, const LabelTable& labels) {
  if (raw.relations.size() != raw.sentences.size()) {
    throw std::invalid_argument("document has " + std::to_string(raw.sentences.size()) +
                                " sentences but " + std::to_string(raw.relations.size()) +
                                " relations");
  }
  Document doc;
  for (std::size_t t = 0; t < raw.sentences.size(); ++t) {
    std::vector<int> ids;
    ids.reserve(raw.sentences[t].size() + 1);
    for (const auto& tok : raw.sentences[t]) ids.push_back(vocab.id(normalize_token(tok)));
    ids.push_back(kEosId);
    doc.sentences.push_back(std::move(ids));
    if (raw.relations[t]) {
      doc.relations.push_back(labels.id(*raw.relations[t]));
      doc.observed.push_back(true);
    } else {
      doc.relations.push_back(kDummyLabel);
      doc.observed.push_back(false);
    }
  }
  return doc;
}

std::vector<Document> encode(std::span<const RawDocument> raw, const Vocabulary& vocab,
                             const LabelTable& labels) {
  std::vector<Document> out;
  out.reserve(raw.size());
  for (const auto& d : raw) out.push_back(encode(d, vocab, labels));
  return out;
}

std::vector<std::string> decode_sentence(std::span<const int> ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == kEosId) break;
    out.push_back(vocab.token(id));
  }
  return out;
}

// ---- corpus files ---------------------------------------------------------------

std::vector<RawDocument> parse_corpus(std::istream& in) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RawDocument doc;
      for (const auto& s : j.at("sentences")) {
        doc.sentences.push_back(s.get<std::vector<std::string>>());
      }
      for (const auto& r : j.at("relations")) {
        if (r.is_null()) {
          doc.relations.emplace_back(std::nullopt);
        } else {
          doc.relations.emplace_back(r.get<std::string>());
        }
      }
      if (doc.relations.size() != doc.sentences.size()) {
        throw std::invalid_argument(std::to_string(doc.sentences.size()) + " sentences but " +
                                    std::to_string(doc.relations.size()) + " relations");
      }
      for (const auto& s : doc.sentences) {
        if (s.empty()) throw std::invalid_argument("empty sentence");
      }
      docs.push_back(std::move(doc));
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

void write_corpus(std::ostream& out, std::span<const RawDocument> docs) {
  for (const auto& doc : docs) {
    nlohmann::ordered_json j;
    j["sentences"] = doc.sentences;
    auto rel = nlohmann::ordered_json::array();
    for (const auto& r : doc.relations) {
      if (r) {
        rel.push_back(*r);
      } else {
        rel.push_back(nullptr);
      }
    }
    j["relations"] = std::move(rel);
    out << j.dump() << '\n';
  }
}

std::vector<RawDocument> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus " + path.string());
  try {
    return parse_corpus(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void save_corpus(const std::filesystem::path& path, std::span<const RawDocument> docs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_corpus(out, docs);
}

RawDocument strip_labels(const RawDocument& doc) {
  RawDocument out = doc;
  for (auto& r : out.relations) r.reset();
  return out;
}

}  // namespace drlm
