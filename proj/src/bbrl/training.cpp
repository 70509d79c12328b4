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

#include "introspect/bbrl/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace introspect::bbrl {

BbrlNetworks::BbrlNetworks(const NetworkSizes& sizes, double max_step, std::uint64_t seed) {
  Rng rng = nn::make_rng(seed, 1);
  fe = FeatureExtractor(sizes, rng);
  rn = ReactiveNetwork(sizes, max_step, rng);
}

StageResult train_behaviour_stage(BbrlNetworks& nets, BehaviourId behaviour, const env::PickPlaceEnv& env,
                                  const StageConfig& config, std::uint64_t seed) {
  if (env::index_of(behaviour) != nets.stages_completed) {
    throw std::logic_error(fmt::format("stage '{}' out of order: {} stage(s) completed, expected '{}' next",
                                       env::to_string(behaviour), nets.stages_completed,
                                       nets.stages_completed < env::kNumBehaviours
                                           ? env::to_string(env::behaviour_at(nets.stages_completed))
                                           : "none"));
  }
  if (config.episodes <= 0 || config.updates_per_episode <= 0 || config.batch_size <= 0) {
    throw std::invalid_argument("train_behaviour_stage: episodes, updates and batch size must be positive");
  }

  const auto stream = static_cast<std::uint64_t>(100 + env::index_of(behaviour));
  Rng reset_rng = nn::make_rng(seed, stream);
  Rng noise_rng = nn::make_rng(seed, stream + 10);
  Rng batch_rng = nn::make_rng(seed, stream + 20);

  const bool train_fe = behaviour == BehaviourId::Approach;
  std::vector<Param*> params = nets.rn.params(behaviour);
  if (train_fe) {
    auto fe_params = nets.fe.params();
    params.insert(params.end(), fe_params.begin(), fe_params.end());
  }
  nn::AdamState adam(config.adam, params);

  const double max_step = env.config().max_step;
  std::vector<Vector> inputs;
  std::vector<Vector> targets;
  StageResult result{behaviour, {}};

  for (int e = 0; e < config.episodes; ++e) {
    auto [state, obs] = env.reset(reset_rng);
    while (!state.done) {
      const BehaviourId b = env.scripted_behaviour_schedule(state);
      const auto expert = env.expert_action(state, b);
      if (b == behaviour) {
        inputs.push_back(env::inject_noise(obs, config.noise_level, env.config().noise_std, noise_rng).values());
        targets.push_back(normalized_expert(expert, behaviour, max_step));
      }
      auto next = env.step(state, b, expert);
      state = next.state;
      obs = next.observation;
    }
    if (inputs.empty()) {
      result.loss_curve.push_back(result.loss_curve.empty() ? 0.0 : result.loss_curve.back());
      continue;
    }

    std::uniform_int_distribution<std::size_t> pick(0, inputs.size() - 1);
    const auto n = static_cast<Index>(std::min<std::size_t>(inputs.size(), static_cast<std::size_t>(config.batch_size)));
    double episode_loss = 0.0;
    for (int u = 0; u < config.updates_per_episode; ++u) {
      Matrix x(inputs.front().size(), n);
      Matrix y(targets.front().size(), n);
      for (Index j = 0; j < n; ++j) {
        const std::size_t i = pick(batch_rng);
        x.col(j) = inputs[i];
        y.col(j) = targets[i];
      }
      nn::zero_grad(params);
      Tape tape;
      Var features = train_fe ? nets.fe.forward(tape, tape.constant(std::move(x)))
                              : tape.constant(nets.fe.features(x));
      Var out = nets.rn.normalized_output(tape, features, behaviour);
      Var loss = tape.mse(out, tape.constant(std::move(y)));
      episode_loss += tape.scalar(loss);
      tape.backward(loss);
      nn::adam_step(params, adam);
    }
    result.loss_curve.push_back(episode_loss / config.updates_per_episode);
  }
  nets.stages_completed += 1;
  return result;
}

RolloutStats evaluate_reactive(const env::PickPlaceEnv& env, const BbrlNetworks& nets, int episodes,
                               std::uint64_t seed, double noise_level) {
  Rng reset_rng = nn::make_rng(seed, 41);
  Rng noise_rng = nn::make_rng(seed, 42);
  RolloutStats stats;
  for (int e = 0; e < episodes; ++e) {
    auto [state, obs] = env.reset(reset_rng);
    while (!state.done) {
      const BehaviourId b = env.scripted_behaviour_schedule(state);
      const auto seen = env::inject_noise(obs, noise_level, env.config().noise_std, noise_rng);
      const auto action = nets.rn.forward(nets.fe.forward(seen).features, b);
      auto next = env.step(state, b, action);
      state = next.state;
      obs = next.observation;
    }
    stats.episodes += 1;
    if (env.success(state)) stats.successes += 1;
  }
  return stats;
}

TrainingLog train_actor_critic(const env::PickPlaceEnv& env, const BbrlNetworks& nets, ActorCritic& ac,
                               WiringVariant variant, const introspection::VaeModel* vae,
                               const ActorCriticConfig& config, std::uint64_t seed) {
  if (introspection::requires_vae(variant) && vae == nullptr) {
    throw std::invalid_argument(
        fmt::format("wiring variant '{}' needs a trained VAE", introspection::to_string(variant)));
  }
  if (config.episodes < 0) throw std::invalid_argument("train_actor_critic: negative episode count");
  if (config.behaviour_timeout < 1) throw std::invalid_argument("train_actor_critic: behaviour timeout must be >= 1");
  const Index expected = introspection::input_dim(variant, nets.fe.feature_dim(), vae ? vae->latent_dim() : 0);
  if (ac.input_dim() != expected) {
    throw nn::DimensionError(fmt::format("actor-critic for variant '{}' needs input {}, has {}",
                                         introspection::to_string(variant), expected, ac.input_dim()));
  }

  Rng reset_rng = nn::make_rng(seed, 51);
  Rng noise_rng = nn::make_rng(seed, 52);
  Rng policy_rng = nn::make_rng(seed, 53);
  Rng latent_rng = nn::make_rng(seed, 54);

  auto params = ac.params();
  nn::AdamState adam(config.adam, params);
  const std::string_view variant_name = introspection::to_string(variant);

  TrainingLog log;
  log.seed = seed;
  log.variant = variant;
  log.noise_level = config.noise_level;
  log.episodes.reserve(static_cast<std::size_t>(config.episodes));

  std::vector<Vector> inputs;
  std::vector<int> chosen;
  std::vector<double> rewards;
  std::vector<double> discounts;
  std::vector<double> values;

  for (int e = 0; e < config.episodes; ++e) {
    inputs.clear();
    chosen.clear();
    rewards.clear();
    discounts.clear();
    values.clear();

    auto [state, obs] = env.reset(reset_rng);
    int env_steps = 0;
    double episode_return = 0.0;
    while (!state.done) {
      const auto seen = env::inject_noise(obs, config.noise_level, env.config().noise_std, noise_rng);
      FeOutput fe_out = nets.fe.forward(seen);
      std::optional<nn::GaussianLatent> latent;
      if (vae != nullptr && introspection::requires_vae(variant)) latent = vae->encode(fe_out.activations);
      auto input = introspection::build_ac_input(variant, fe_out.features, latent, latent_rng);
      const AcOutput out = ac.forward(input.values, variant_name);
      const BehaviourId b = select_behaviour(out.logits, SelectMode::Sample, policy_rng);

      double reward = 0.0;
      double discount = 1.0;
      for (int k = 0;;) {
        auto next = env.step(state, b, nets.rn.forward(fe_out.features, b));
        reward += discount * next.reward;
        episode_return += next.reward;
        discount *= config.gamma;
        state = next.state;
        obs = next.observation;
        ++env_steps;
        if (state.done || ++k >= config.behaviour_timeout || env.behaviour_complete(state, b)) break;
        fe_out = nets.fe.forward(env::inject_noise(obs, config.noise_level, env.config().noise_std, noise_rng));
      }

      inputs.push_back(std::move(input.values));
      chosen.push_back(env::index_of(b));
      rewards.push_back(reward);
      discounts.push_back(discount);
      values.push_back(out.value);
    }

    const auto steps = static_cast<Index>(rewards.size());
    Matrix returns(1, steps);
    double running = 0.0;
    for (Index t = steps; t-- > 0;) {
      const auto i = static_cast<std::size_t>(t);
      running = rewards[i] + discounts[i] * running;
      returns(0, t) = running;
    }

    Matrix x(ac.input_dim(), steps);
    for (Index t = 0; t < steps; ++t) x.col(t) = inputs[static_cast<std::size_t>(t)];

    nn::zero_grad(params);
    Tape tape;
    auto rec = ac.forward(tape, tape.constant(std::move(x)));
    Var log_probs = tape.log_softmax(rec.logits);
    const Matrix advantage = returns - tape.value(rec.values);
    Var actor_loss = tape.scale(tape.mean(tape.mul_const(tape.pick(log_probs, chosen), advantage)), -1.0);
    Var critic_loss = tape.mse(rec.values, tape.constant(returns));
    Var entropy = tape.scale(tape.sum(tape.mul(tape.exp(log_probs), log_probs)), -1.0 / static_cast<double>(steps));
    Var total = tape.sub(tape.add(actor_loss, tape.scale(critic_loss, config.value_coef)),
                         tape.scale(entropy, config.entropy_coef));
    tape.backward(total);
    nn::adam_step(params, adam);

    EpisodeRecord rec_out;
    rec_out.episode = e;
    rec_out.success = env.success(state);
    rec_out.steps = env_steps;
    rec_out.decisions = static_cast<int>(steps);
    rec_out.episode_return = episode_return;
    std::array<double, env::kNumBehaviours> value_sum{};
    for (std::size_t t = 0; t < chosen.size(); ++t) {
      rec_out.behaviour_counts[static_cast<std::size_t>(chosen[t])] += 1;
      value_sum[static_cast<std::size_t>(chosen[t])] += values[t];
    }
    for (std::size_t b = 0; b < value_sum.size(); ++b) {
      if (rec_out.behaviour_counts[b] > 0) rec_out.mean_value[b] = value_sum[b] / rec_out.behaviour_counts[b];
    }
    rec_out.actor_loss = tape.scalar(actor_loss);
    rec_out.critic_loss = tape.scalar(critic_loss);
    rec_out.update_count = adam.step_count;
    log.episodes.push_back(rec_out);
  }
  return log;
}

}  // namespace introspect::bbrl
