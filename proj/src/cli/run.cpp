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

#include <functional>

#include <CLI11.hpp>

#include "drlm/cli.hpp"
#include "drlm/errors.hpp"

namespace drlm::cli {
namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;
  std::string variant;
  std::string objective;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "key=value config file");
  cmd->add_option("--seed", flags.seed, "random seed");
  cmd->add_option("--checkpoint", flags.checkpoint, "checkpoint path");
  cmd->add_option("--variant", flags.variant, "rnnlm, dclm, drlm or drlm-model2");
  cmd->add_option("--objective", flags.objective, "joint or conditional")
      ->check(CLI::IsMember({"joint", "conditional"}));
  cmd->add_option("--set", flags.sets, "override a config key (key=value)");
}

RunConfig resolve(const Flags& flags) {
  ConfigMap map;
  if (!flags.config.empty()) map = load_config(flags.config);
  for (const auto& s : flags.sets) {
    auto [key, value] = parse_assignment(s);
    map[key] = value;
  }
  if (flags.seed) map["seed"] = std::to_string(*flags.seed);
  if (!flags.checkpoint.empty()) map["checkpoint"] = flags.checkpoint;
  if (!flags.variant.empty()) map["variant"] = flags.variant;
  if (!flags.objective.empty()) map["objective"] = flags.objective;
  return RunConfig::from_map(map);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discourse relation language models"};
  app.require_subcommand(1);
  Flags flags;
  using Command = std::function<int(const RunConfig&, std::ostream&)>;
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"train", "train a model and write the best dev-epoch checkpoint", cmd_train},
      {"eval-lm", "perplexity of the test corpus with relations marginalized", cmd_eval_lm},
      {"tag", "predict relations for the test corpus", cmd_tag},
      {"gradcheck", "compare gradients against finite differences", cmd_gradcheck},
      {"synth", "write a synthetic corpus", cmd_synth},
      {"grid", "train over a K x H grid and keep the best dev model", cmd_grid},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) {
    subs.push_back(app.add_subcommand(name, help));
    add_common(subs.back(), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUser;
  }
  try {
    const RunConfig config = resolve(flags);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return std::get<2>(commands[i])(config, out);
    }
    err << "error: no command given\n";
    return kExitUser;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  }
}

}  // namespace drlm::cli
