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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "introspect/app/config.hpp"

namespace introspect::app {

namespace fs = std::filesystem;

/// Each command writes into config.output_dir (created if needed) and throws
/// on failure; tools/ maps exceptions to a nonzero exit status.
///
/// Output files:
///   train-stages  stages.ckpt, stage_loss.csv
///   collect       activations.jsonl
///   train-vae     vae.ckpt, vae_loss.csv, embedding.csv, latent_structure.csv
///   train-ac      training_log.csv, success_curve.csv, actor_critic.ckpt
///   report        reports.csv, comparison.csv
void cmd_train_stages(const RunConfig& config);
void cmd_collect(const RunConfig& config, const fs::path& stages_checkpoint);
void cmd_train_vae(const RunConfig& config, const fs::path& dataset);
void cmd_train_ac(const RunConfig& config, const fs::path& stages_checkpoint,
                  const std::optional<fs::path>& vae_checkpoint);
void cmd_report(const RunConfig& config, const std::vector<fs::path>& training_logs);

enum class Suite { Exp1, Exp2, Exp3 };

std::string_view to_string(Suite suite);
Suite suite_from_string(std::string_view name);

/// Runs a whole suite under config.output_dir/<suite>, which must not exist
/// yet. Feature extractor, reactive heads and VAEs are trained once from
/// config.seed; `seeds` (defaulting to the config's list for the suite)
/// seed the actor-critic runs. exp1 trains one VAE per seed instead.
/// A run that throws is recorded as failed and the suite carries on.
/// Returns the number of failed runs.
int cmd_experiment(const RunConfig& config, Suite suite, const std::optional<std::vector<std::uint64_t>>& seeds);

}  // namespace introspect::app
