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

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "introspect/bbrl/networks.hpp"
#include "introspect/introspection/vae.hpp"
#include "introspect/introspection/wiring.hpp"
#include "introspect/nn/adam.hpp"

namespace introspect::bbrl {

using introspection::WiringVariant;

/// FE and reactive heads together with how far staged training has got.
struct BbrlNetworks {
  FeatureExtractor fe;
  ReactiveNetwork rn;
  int stages_completed = 0;

  BbrlNetworks() = default;
  BbrlNetworks(const NetworkSizes& sizes, double max_step, std::uint64_t seed);
};

struct StageConfig {
  int episodes = 500;
  int updates_per_episode = 4;
  int batch_size = 64;
  double noise_level = 0.0;
  nn::AdamConfig adam;
};

/// Mean behaviour-cloning loss of each episode's updates.
struct StageResult {
  BehaviourId behaviour = BehaviourId::Approach;
  std::vector<double> loss_curve;
};

/// Regresses the `behaviour` head onto expert actions gathered from scripted
/// episodes executed entirely by the expert. The FE is trained alongside the
/// Approach head and frozen afterwards. Stages must run Approach, Grasp,
/// Retract in that order; anything else throws std::logic_error.
StageResult train_behaviour_stage(BbrlNetworks& nets, BehaviourId behaviour, const env::PickPlaceEnv& env,
                                  const StageConfig& config, std::uint64_t seed);

struct RolloutStats {
  int episodes = 0;
  int successes = 0;
  double success_rate() const { return episodes == 0 ? 0.0 : static_cast<double>(successes) / episodes; }
};

/// Scripted schedule choosing behaviours, reactive heads choosing actions.
RolloutStats evaluate_reactive(const env::PickPlaceEnv& env, const BbrlNetworks& nets, int episodes,
                               std::uint64_t seed, double noise_level = 0.0);

struct ActorCriticConfig {
  int episodes = 2000;
  double gamma = 0.99;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  /// A chosen behaviour runs until it completes or for this many steps,
  /// whichever comes first. 1 means a new choice every timestep.
  int behaviour_timeout = 10;
  double noise_level = 0.0;
  nn::AdamConfig adam;
};

struct EpisodeRecord {
  int episode = 0;
  bool success = false;
  double episode_return = 0.0;
  int steps = 0;
  int decisions = 0;
  /// Mean critic value over the decisions that chose each behaviour.
  std::array<std::optional<double>, env::kNumBehaviours> mean_value{};
  std::array<int, env::kNumBehaviours> behaviour_counts{};
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  std::int64_t update_count = 0;
};

struct TrainingLog {
  std::uint64_t seed = 0;
  WiringVariant variant = WiringVariant::Baseline;
  double noise_level = 0.0;
  std::vector<EpisodeRecord> episodes;
};

/// Episodic advantage actor-critic over behaviour choices with frozen FE,
/// reactive heads and VAE: one update per episode. Each decision's return is
/// discounted by gamma^k over the k steps its behaviour ran.
TrainingLog train_actor_critic(const env::PickPlaceEnv& env, const BbrlNetworks& nets, ActorCritic& ac,
                               WiringVariant variant, const introspection::VaeModel* vae,
                               const ActorCriticConfig& config, std::uint64_t seed);

}  // namespace introspect::bbrl
