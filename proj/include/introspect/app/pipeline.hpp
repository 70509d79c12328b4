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

#include <vector>

#include "introspect/app/checkpoint.hpp"
#include "introspect/app/config.hpp"
#include "introspect/bbrl/training.hpp"
#include "introspect/introspection/vae.hpp"

namespace introspect::app {

/// In-memory steps shared by the commands, the experiment suites and the
/// acceptance checks.

struct StageOutcome {
  bbrl::BbrlNetworks nets;
  std::vector<bbrl::StageResult> stages;
};

/// Approach, Grasp, Retract in order, seeded by config.seed.
StageOutcome run_stages(const RunConfig& config);

env::PickPlaceEnv make_env(const RunConfig& config);

/// Actor-critic sized for `variant`, initialised from (seed, stream 60).
bbrl::ActorCritic make_actor_critic(const RunConfig& config, introspection::WiringVariant variant,
                                    std::uint64_t seed);

Checkpoint networks_checkpoint(const RunConfig& config, const bbrl::BbrlNetworks& nets);
/// Throws CheckpointError when a block is missing or has the wrong shape.
bbrl::BbrlNetworks networks_from_checkpoint(const RunConfig& config, const Checkpoint& checkpoint);

Checkpoint vae_checkpoint(const RunConfig& config, const introspection::VaeModel& vae);
introspection::VaeModel vae_from_checkpoint(const RunConfig& config, const Checkpoint& checkpoint);

Checkpoint actor_critic_checkpoint(const RunConfig& config, const bbrl::ActorCritic& ac);

}  // namespace introspect::app
