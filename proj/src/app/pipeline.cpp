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

#include "introspect/app/pipeline.hpp"

namespace introspect::app {

using nn::Rng;

namespace {

constexpr const char* kNormOffset = "vae.normalizer.offset";
constexpr const char* kNormScale = "vae.normalizer.scale";

}  // namespace

env::PickPlaceEnv make_env(const RunConfig& config) { return env::PickPlaceEnv(config.env); }

StageOutcome run_stages(const RunConfig& config) {
  const env::PickPlaceEnv env = make_env(config);
  StageOutcome out{bbrl::BbrlNetworks(config.network, config.env.max_step, config.seed), {}};
  for (auto b : env::kAllBehaviours)
    out.stages.push_back(bbrl::train_behaviour_stage(out.nets, b, env, config.stage_config(), config.seed));
  return out;
}

bbrl::ActorCritic make_actor_critic(const RunConfig& config, introspection::WiringVariant variant,
                                    std::uint64_t seed) {
  Rng rng = nn::make_rng(seed, 60);
  const auto dim = introspection::input_dim(variant, config.network.fe_hidden2, config.vae.latent);
  return bbrl::ActorCritic(dim, config.network.ac_hidden, rng);
}

Checkpoint networks_checkpoint(const RunConfig& config, const bbrl::BbrlNetworks& nets) {
  Checkpoint cp;
  cp.config = to_ini(config);
  cp.add(nets.fe.params());
  cp.add(nets.rn.params());
  return cp;
}

bbrl::BbrlNetworks networks_from_checkpoint(const RunConfig& config, const Checkpoint& checkpoint) {
  bbrl::BbrlNetworks nets(config.network, config.env.max_step, 0);
  checkpoint.restore(nets.fe.params());
  checkpoint.restore(nets.rn.params());
  nets.stages_completed = env::kNumBehaviours;
  return nets;
}

Checkpoint vae_checkpoint(const RunConfig& config, const introspection::VaeModel& vae) {
  Checkpoint cp;
  cp.config = to_ini(config);
  cp.add(vae.params());
  cp.add(kNormOffset, vae.normalizer().offset);
  cp.add(kNormScale, vae.normalizer().scale);
  return cp;
}

introspection::VaeModel vae_from_checkpoint(const RunConfig& config, const Checkpoint& checkpoint) {
  Rng rng = nn::make_rng(0, 0);
  introspection::VaeModel vae(config.vae, rng);
  checkpoint.restore(vae.params());
  introspection::InputNormalizer n{checkpoint.get(kNormOffset), checkpoint.get(kNormScale)};
  if (n.offset.size() != config.vae.input || n.scale.size() != config.vae.input) {
    throw CheckpointError("checkpoint: normalizer does not match the VAE input width");
  }
  vae.set_normalizer(std::move(n));
  return vae;
}

Checkpoint actor_critic_checkpoint(const RunConfig& config, const bbrl::ActorCritic& ac) {
  Checkpoint cp;
  cp.config = to_ini(config);
  cp.add(ac.params());
  return cp;
}

}  // namespace introspect::app
