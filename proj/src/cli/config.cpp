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

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "drlm/cli.hpp"

namespace drlm::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw UserError("invalid value '" + value + "' for key " + key);
  }
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return parse_number<std::size_t>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UserError("invalid boolean '" + value + "' for key " + key);
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_size(key, trim(item)));
  if (out.empty()) throw UserError("empty list for key " + key);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto path = [](std::filesystem::path RunConfig::*field) {
      return [field](RunConfig& c, const std::string&, const std::string& v) { c.*field = v; };
    };
    auto size = [](std::size_t RunConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_size(k, v); };
    };
    auto real = [](double RunConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.*field = parse_number<double>(k, v);
      };
    };
    auto synth_size = [](std::size_t SynthConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.synth.*field = parse_size(k, v);
      };
    };
    auto synth_real = [](double SynthConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.synth.*field = parse_number<double>(k, v);
      };
    };

    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seed = parse_number<std::uint64_t>(k, v);
    };
    t["variant"] = [](RunConfig& c, const std::string&, const std::string& v) {
      auto parsed = variant_from_name(v);
      if (!parsed) throw UserError("unknown variant '" + v + "' (rnnlm, dclm, drlm, drlm-model2)");
      c.variant = *parsed;
    };
    t["objective"] = [](RunConfig& c, const std::string&, const std::string& v) {
      auto parsed = objective_from_name(v);
      if (!parsed) throw UserError("unknown objective '" + v + "' (joint, conditional)");
      c.train.objective = *parsed;
    };
    t["checkpoint"] = path(&RunConfig::checkpoint_path);
    t["data.train"] = path(&RunConfig::train_path);
    t["data.dev"] = path(&RunConfig::dev_path);
    t["data.test"] = path(&RunConfig::test_path);
    t["data.vocab"] = path(&RunConfig::vocab_path);
    t["data.labels"] = path(&RunConfig::labels_path);
    t["data.vocab_cap"] = size(&RunConfig::vocab_cap);
    t["output.predictions"] = path(&RunConfig::predictions_path);
    t["output.log"] = path(&RunConfig::log_path);
    t["tag.compare"] = path(&RunConfig::compare_path);
    t["tag.include_dummy"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.tag_include_dummy = parse_bool(k, v);
    };
    t["model.K"] = size(&RunConfig::K);
    t["model.H"] = size(&RunConfig::H);
    t["train.learning_rate"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.learning_rate = parse_number<double>(k, v);
    };
    t["train.clip"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.clip = parse_number<double>(k, v);
    };
    t["train.dropout"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.dropout = parse_number<double>(k, v);
    };
    t["train.max_epochs"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.max_epochs = parse_number<int>(k, v);
    };
    t["train.include_dummy"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.conditional_includes_dummy = parse_bool(k, v);
    };
    t["gradcheck.V"] = size(&RunConfig::gc_V);
    t["gradcheck.K"] = size(&RunConfig::gc_K);
    t["gradcheck.H"] = size(&RunConfig::gc_H);
    t["gradcheck.Z"] = size(&RunConfig::gc_Z);
    t["gradcheck.T"] = size(&RunConfig::gc_T);
    t["gradcheck.step"] = real(&RunConfig::gc_step);
    t["gradcheck.threshold"] = real(&RunConfig::gc_threshold);
    t["gradcheck.stencil"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "3") {
        c.gc_stencil = autodiff::Stencil::kThreePoint;
      } else if (v == "5") {
        c.gc_stencil = autodiff::Stencil::kFivePoint;
      } else {
        throw UserError("invalid value '" + v + "' for key " + k + " (3 or 5)");
      }
    };
    t["gradcheck.init_scale"] = real(&RunConfig::gc_init_scale);
    t["gradcheck.corrupt"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.gc_corrupt = v;
    };
    t["synth.dir"] = path(&RunConfig::synth_dir);
    t["synth.relations"] = synth_size(&SynthConfig::relations);
    t["synth.vocab_per_relation"] = synth_size(&SynthConfig::vocab_per_relation);
    t["synth.overlap"] = synth_size(&SynthConfig::overlap);
    t["synth.shared_vocab"] = synth_size(&SynthConfig::shared_vocab);
    t["synth.shared_mass"] = synth_real(&SynthConfig::shared_mass);
    t["synth.zipf_exponent"] = synth_real(&SynthConfig::zipf_exponent);
    t["synth.successor_prob"] = synth_real(&SynthConfig::successor_prob);
    t["synth.train_docs"] = synth_size(&SynthConfig::train_docs);
    t["synth.dev_docs"] = synth_size(&SynthConfig::dev_docs);
    t["synth.test_docs"] = synth_size(&SynthConfig::test_docs);
    t["synth.sentences_per_doc"] = synth_size(&SynthConfig::sentences_per_doc);
    t["synth.min_length"] = synth_size(&SynthConfig::min_length);
    t["synth.max_length"] = synth_size(&SynthConfig::max_length);
    t["grid.K"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.grid_K = parse_list(k, v); };
    t["grid.H"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.grid_H = parse_list(k, v); };
    t["grid.dir"] = path(&RunConfig::grid_dir);
    return t;
  }();
  return table;
}

std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix) {
  return std::filesystem::path(p.string() + suffix);
}

}  // namespace

ConfigMap parse_config(std::istream& in, const std::string& source) {
  ConfigMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw UserError(source + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(std::string_view(text).substr(0, eq));
    if (key.empty()) throw UserError(source + ":" + std::to_string(lineno) + ": empty key");
    map[key] = trim(std::string_view(text).substr(eq + 1));
  }
  return map;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UserError("expected key=value, got '" + text + "'");
  return {trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1))};
}

RunConfig RunConfig::from_map(const ConfigMap& map) {
  RunConfig config;
  bool synth_seed_set = false;
  for (const auto& [key, value] : map) {
    if (key == "synth.seed") {
      config.synth.seed = parse_number<std::uint64_t>(key, value);
      synth_seed_set = true;
      continue;
    }
    auto it = setters().find(key);
    if (it == setters().end()) throw UserError("unknown config key '" + key + "'");
    it->second(config, key, value);
  }
  if (!synth_seed_set) config.synth.seed = config.seed;
  config.train.seed = config.seed;
  try {
    config.train.validate();
    config.synth.validate();
  } catch (const std::invalid_argument& e) {
    throw UserError(e.what());
  }
  if (config.K == 0 || config.H == 0) throw UserError("model.K and model.H must be positive");
  return config;
}

std::filesystem::path RunConfig::vocab_file() const {
  return vocab_path.empty() ? with_suffix(checkpoint_path, ".vocab") : vocab_path;
}

std::filesystem::path RunConfig::predictions_file() const {
  return predictions_path.empty() ? with_suffix(checkpoint_path, ".pred.tsv") : predictions_path;
}

std::filesystem::path RunConfig::log_file() const {
  return log_path.empty() ? with_suffix(checkpoint_path, ".log") : log_path;
}

}  // namespace drlm::cli
