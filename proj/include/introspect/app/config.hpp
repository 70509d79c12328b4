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
#include <stdexcept>
#include <string>
#include <vector>

#include "introspect/bbrl/training.hpp"
#include "introspect/env/pick_place.hpp"
#include "introspect/introspection/vae.hpp"
#include "introspect/introspection/vae_training.hpp"
#include "introspect/introspection/wiring.hpp"

namespace introspect::app {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything one command needs. Loaded from an INI file whose sections and
/// keys are listed in README.md; missing keys keep the defaults below.
struct RunConfig {
  std::uint64_t seed = 1;
  introspection::WiringVariant variant = introspection::WiringVariant::Baseline;
  double noise_level = 0.0;
  std::filesystem::path output_dir = "runs";

  env::EnvConfig env;
  bbrl::NetworkSizes network;
  introspection::VaeDims vae;

  bbrl::StageConfig stages;
  int collect_episodes = 2000;
  introspection::VaeTrainConfig vae_training;
  bbrl::ActorCriticConfig actor_critic;
  nn::AdamConfig adam;

  std::vector<std::uint64_t> exp2_seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::uint64_t> exp3_seeds{1, 2, 3, 4, 5};
  std::vector<double> exp3_noise_levels{0.05, 0.10};

  /// Throws ConfigError on the first inconsistency.
  void validate() const;

  /// Copies of the per-stage configs with the shared Adam settings and
  /// noise level filled in.
  bbrl::StageConfig stage_config() const;
  introspection::VaeTrainConfig vae_config() const;
  bbrl::ActorCriticConfig ac_config() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical INI rendering; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& config);

}  // namespace introspect::app
