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
#include <stdexcept>
#include <string>
#include <vector>

#include "drlm/autodiff/gradcheck.hpp"
#include "drlm/corpus.hpp"
#include "drlm/model.hpp"
#include "drlm/training.hpp"

namespace drlm::cli {

// Bad input from the user: unreadable files, unknown keys, malformed values.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

// Flat key=value pairs with dotted keys. Blank lines and lines starting with
// '#' are ignored; whitespace around keys and values is trimmed.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::istream& in, const std::string& source = "config");
ConfigMap load_config(const std::filesystem::path& path);
// "key=value" from --set.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

struct RunConfig {
  std::uint64_t seed = 1;
  Variant variant = Variant::kDrlm;

  std::filesystem::path train_path, dev_path, test_path;
  std::filesystem::path vocab_path;   // default: <checkpoint>.vocab
  std::filesystem::path labels_path;
  std::filesystem::path checkpoint_path = "model.ckpt";
  std::filesystem::path predictions_path;  // default: <checkpoint>.pred.tsv
  std::filesystem::path log_path;          // default: <checkpoint>.log
  std::filesystem::path compare_path;      // optional second prediction file for the sign test
  std::size_t vocab_cap = kDefaultVocabCap;

  std::size_t K = 32;
  std::size_t H = 32;
  TrainConfig train;
  bool tag_include_dummy = true;

  std::size_t gc_V = 12, gc_K = 6, gc_H = 6, gc_Z = 3, gc_T = 3;
  double gc_step = 1e-3;
  autodiff::Stencil gc_stencil = autodiff::Stencil::kFivePoint;
  double gc_threshold = 1e-4;
  // Parameters are drawn uniformly in ±gc_init_scale; 0 keeps the training init.
  double gc_init_scale = 0.5;
  std::string gc_corrupt;  // op name whose backward rule is broken on purpose

  SynthConfig synth;
  std::filesystem::path synth_dir = "synth";

  std::vector<std::size_t> grid_K{32, 48, 64, 96, 128};
  std::vector<std::size_t> grid_H{32, 48, 64, 96, 128};
  std::filesystem::path grid_dir = "grid";

  static RunConfig from_map(const ConfigMap& map);

  std::filesystem::path vocab_file() const;
  std::filesystem::path predictions_file() const;
  std::filesystem::path log_file() const;
};

int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval_lm(const RunConfig& config, std::ostream& out);
int cmd_tag(const RunConfig& config, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);
int cmd_synth(const RunConfig& config, std::ostream& out);
int cmd_grid(const RunConfig& config, std::ostream& out);

// Parses argv, runs the command and maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace drlm::cli
