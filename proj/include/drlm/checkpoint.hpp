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

#include <filesystem>
#include <iosfwd>

#include "drlm/model.hpp"

namespace drlm {

// Binary layout, all integers little-endian:
//   "DRLM1"
//   u64 V, u64 K, u64 H, u64 Z, u64 variant-tag
//   repeated until EOF:
//     u32 name length, name bytes, u64 rows, u64 cols, rows*cols f64 (row-major)
void write_checkpoint(std::ostream& out, const DrlmParams& params);
DrlmParams read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const DrlmParams& params);
DrlmParams load_checkpoint(const std::filesystem::path& path);

}  // namespace drlm
