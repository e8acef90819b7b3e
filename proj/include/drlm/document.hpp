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

#include <cstddef>
#include <vector>

namespace drlm {

// Reserved vocabulary ids, fixed in this order in every vocabulary file.
inline constexpr int kUnkId = 0;
inline constexpr int kNumId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr int kReservedTokens = 4;

// Label id used for slots whose relation was null in the raw corpus.
inline constexpr int kDummyLabel = 0;
// Marks a slot with no label at all (only produced by callers that strip labels).
inline constexpr int kNoLabel = -1;

// A document after encoding. Slot t labels the transition into sentence t;
// slot 0 pairs the first sentence with the default context.
struct Document {
  std::vector<std::vector<int>> sentences;  // each ends with kEosId
  std::vector<int> relations;               // one per sentence
  std::vector<bool> observed;               // false where the raw label was null

  std::size_t size() const { return sentences.size(); }
  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
};

}  // namespace drlm
