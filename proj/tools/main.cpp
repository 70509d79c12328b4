/**
 * Copyright (c) The introspect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "introspect/app/commands.hpp"
#include "introspect/app/config.hpp"

namespace {

namespace app = introspect::app;
namespace fs = std::filesystem;

struct CommonFlags {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<double> noise;
  std::optional<fs::path> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "INI run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Override run.seed");
  cmd->add_option("--variant", flags.variant, "Override run.variant");
  cmd->add_option("--noise", flags.noise, "Override run.noise_level");
  cmd->add_option("--out", flags.out, "Override run.output_dir");
}

app::RunConfig resolve(const CommonFlags& flags) {
  app::RunConfig config = flags.config ? app::load_config(*flags.config) : app::RunConfig{};
  if (flags.seed) config.seed = *flags.seed;
  if (flags.variant) config.variant = introspect::introspection::variant_from_string(*flags.variant);
  if (flags.noise) config.noise_level = *flags.noise;
  if (flags.out) config.output_dir = *flags.out;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Behaviour-based RL with VAE introspection of feature-extractor activations"};
  cli.require_subcommand(1);
  CommonFlags flags;

  auto* stages = cli.add_subcommand("train-stages", "Train the feature extractor and reactive heads");
  add_common(stages, flags);

  fs::path checkpoint;
  auto* collect = cli.add_subcommand("collect", "Collect a dataset of feature-extractor activations");
  add_common(collect, flags);
  collect->add_option("--checkpoint", checkpoint, "Checkpoint written by train-stages")->required();

  fs::path dataset;
  auto* vae = cli.add_subcommand("train-vae", "Train the VAE on an activation dataset");
  add_common(vae, flags);
  vae->add_option("--dataset", dataset, "JSONL dataset written by collect")->required();

  std::optional<fs::path> vae_checkpoint;
  auto* ac = cli.add_subcommand("train-ac", "Train the actor-critic for one wiring variant");
  add_common(ac, flags);
  ac->add_option("--checkpoint", checkpoint, "Checkpoint written by train-stages")->required();
  ac->add_option("--vae", vae_checkpoint, "Checkpoint written by train-vae");

  std::string suite;
  std::optional<std::vector<std::uint64_t>> seeds;
  auto* experiment = cli.add_subcommand("experiment", "Run an experiment suite (exp1, exp2, exp3)");
  add_common(experiment, flags);
  experiment->add_option("suite", suite, "exp1, exp2 or exp3")->required();
  experiment->add_option("--seeds", seeds, "Actor-critic seeds")->delimiter(',');

  std::vector<fs::path> logs;
  auto* report = cli.add_subcommand("report", "Summarise training logs into a comparison table");
  add_common(report, flags);
  report->add_option("logs", logs, "training_log.csv files")->required()->check(CLI::ExistingFile);

  auto* show = cli.add_subcommand("show-config", "Print the resolved configuration as INI");
  add_common(show, flags);

  CLI11_PARSE(cli, argc, argv);

  try {
    const app::RunConfig config = resolve(flags);
    if (*stages) {
      app::cmd_train_stages(config);
    } else if (*collect) {
      app::cmd_collect(config, checkpoint);
    } else if (*vae) {
      app::cmd_train_vae(config, dataset);
    } else if (*ac) {
      app::cmd_train_ac(config, checkpoint, vae_checkpoint);
    } else if (*experiment) {
      const int failed = app::cmd_experiment(config, app::suite_from_string(suite), seeds);
      if (failed > 0) {
        fmt::print(stderr, "{} run(s) failed\n", failed);
        return 3;
      }
    } else if (*report) {
      app::cmd_report(config, logs);
    } else if (*show) {
      fmt::print("{}", app::to_ini(config));
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
