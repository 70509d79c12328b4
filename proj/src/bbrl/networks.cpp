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

#include "introspect/bbrl/networks.hpp"

#include <fmt/format.h>

#include "introspect/nn/functional.hpp"

namespace introspect::bbrl {

FeatureExtractor::FeatureExtractor(const NetworkSizes& sizes, Rng& rng)
    : layer1_(nn::DenseLayer::glorot("fe.layer1", sizes.obs_dim, sizes.fe_hidden1, rng)),
      layer2_(nn::DenseLayer::glorot("fe.layer2", sizes.fe_hidden1, sizes.fe_hidden2, rng)) {}

FeOutput FeatureExtractor::forward(const Observation& obs) const { return forward(obs.values()); }

FeOutput FeatureExtractor::forward(const Vector& obs) const {
  const Vector h1 = nn::elu(layer1_.forward(obs));
  Vector h2 = nn::elu(layer2_.forward(h1));
  Vector activations(h1.size() + h2.size());
  activations << h1, h2;
  return FeOutput{std::move(h2), std::move(activations)};
}

Matrix FeatureExtractor::features(const Matrix& obs_batch) const {
  return nn::elu(layer2_.forward(nn::elu(layer1_.forward(obs_batch))));
}

Var FeatureExtractor::forward(Tape& tape, Var obs_batch) {
  Var h1 = tape.elu(layer1_.forward(tape, obs_batch));
  return tape.elu(layer2_.forward(tape, h1));
}

std::vector<Param*> FeatureExtractor::params() {
  auto a = layer1_.params();
  auto b = layer2_.params();
  return {a[0], a[1], b[0], b[1]};
}

std::vector<const Param*> FeatureExtractor::params() const {
  return {&layer1_.weights(), &layer1_.biases(), &layer2_.weights(), &layer2_.biases()};
}

Index head_outputs(BehaviourId b) { return b == BehaviourId::Grasp ? 5 : 3; }

ReactiveNetwork::ReactiveNetwork(const NetworkSizes& sizes, double max_step, Rng& rng) : max_step_(max_step) {
  for (BehaviourId b : env::kAllBehaviours) {
    const std::string prefix = fmt::format("reactive.{}", env::to_string(b));
    head(b).hidden = nn::DenseLayer::glorot(prefix + ".hidden", sizes.fe_hidden2, sizes.reactive_hidden, rng);
    head(b).out = nn::DenseLayer::glorot(prefix + ".out", sizes.reactive_hidden, head_outputs(b), rng);
  }
}

Vector ReactiveNetwork::normalized_output(const Vector& features, BehaviourId behaviour) const {
  const Head& h = head(behaviour);
  Vector out = h.out.forward(nn::elu(h.hidden.forward(features))).array().tanh().matrix();
  if (behaviour == BehaviourId::Grasp) out[4] = 0.5 * (out[4] + 1.0);
  return out;
}

Var ReactiveNetwork::normalized_output(Tape& tape, Var features, BehaviourId behaviour) {
  Head& h = head(behaviour);
  Var squashed = tape.tanh(h.out.forward(tape, tape.elu(h.hidden.forward(tape, features))));
  if (behaviour != BehaviourId::Grasp) return squashed;
  const Var parts[] = {tape.rows(squashed, 0, 4), tape.add_scalar(tape.scale(tape.rows(squashed, 4, 1), 0.5), 0.5)};
  return tape.concat_rows(parts);
}

LowLevelAction ReactiveNetwork::forward(const Vector& features, BehaviourId behaviour) const {
  const Vector n = normalized_output(features, behaviour);
  LowLevelAction a;
  a.delta_pos = max_step_ * n.head<3>();
  switch (behaviour) {
    case BehaviourId::Approach:
      a.gripper_cmd = 1.0;
      break;
    case BehaviourId::Grasp:
      a.rotation = n[3];
      a.gripper_cmd = n[4];
      break;
    case BehaviourId::Retract:
      a.gripper_cmd = 0.0;
      break;
  }
  return a.clamped(max_step_);
}

std::vector<Param*> ReactiveNetwork::params(BehaviourId behaviour) {
  Head& h = head(behaviour);
  auto a = h.hidden.params();
  auto b = h.out.params();
  return {a[0], a[1], b[0], b[1]};
}

std::vector<Param*> ReactiveNetwork::params() {
  std::vector<Param*> all;
  for (BehaviourId b : env::kAllBehaviours) {
    auto p = params(b);
    all.insert(all.end(), p.begin(), p.end());
  }
  return all;
}

std::vector<const Param*> ReactiveNetwork::params() const {
  std::vector<const Param*> all;
  for (const Head& h : heads_) {
    all.insert(all.end(), {&h.hidden.weights(), &h.hidden.biases(), &h.out.weights(), &h.out.biases()});
  }
  return all;
}

Vector normalized_expert(const LowLevelAction& expert, BehaviourId behaviour, double max_step) {
  Vector n(head_outputs(behaviour));
  n.head<3>() = expert.delta_pos / max_step;
  if (behaviour == BehaviourId::Grasp) {
    n[3] = expert.rotation;
    n[4] = expert.gripper_cmd;
  }
  return n;
}

ActorCritic::ActorCritic(Index input_dim, Index hidden, Rng& rng)
    : trunk_(nn::DenseLayer::glorot("ac.trunk", input_dim, hidden, rng)),
      actor_(nn::DenseLayer::glorot("ac.actor", hidden, env::kNumBehaviours, rng)),
      critic_(nn::DenseLayer::glorot("ac.critic", hidden, 1, rng)) {}

AcOutput ActorCritic::forward(const Vector& input, std::string_view context) const {
  if (input.size() != input_dim()) {
    throw nn::DimensionError(fmt::format("actor-critic input for variant '{}': expected {} values, got {}",
                                         context, input_dim(), input.size()));
  }
  const Vector h = nn::elu(trunk_.forward(input));
  return AcOutput{actor_.forward(h), critic_.forward(h)[0]};
}

ActorCritic::Recorded ActorCritic::forward(Tape& tape, Var inputs) {
  Var h = tape.elu(trunk_.forward(tape, inputs));
  return Recorded{actor_.forward(tape, h), critic_.forward(tape, h)};
}

std::vector<Param*> ActorCritic::params() {
  std::vector<Param*> all;
  for (nn::DenseLayer* l : {&trunk_, &actor_, &critic_}) {
    auto p = l->params();
    all.insert(all.end(), p.begin(), p.end());
  }
  return all;
}

std::vector<const Param*> ActorCritic::params() const {
  return {&trunk_.weights(), &trunk_.biases(), &actor_.weights(), &actor_.biases(), &critic_.weights(),
          &critic_.biases()};
}

BehaviourId select_behaviour(const Vector& logits, SelectMode mode, Rng& rng) {
  nn::require_dim(logits.size(), env::kNumBehaviours, "select_behaviour logits");
  if (!logits.allFinite()) throw nn::NumericError("select_behaviour: non-finite logits");
  if (mode == SelectMode::Greedy) {
    Index best = 0;
    for (Index i = 1; i < logits.size(); ++i)
      if (logits[i] > logits[best]) best = i;
    return env::behaviour_at(static_cast<int>(best));
  }
  const Vector p = nn::softmax(logits);
  std::discrete_distribution<int> dist(p.data(), p.data() + p.size());
  return env::behaviour_at(dist(rng));
}

}  // namespace introspect::bbrl
