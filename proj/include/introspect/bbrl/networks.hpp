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
#include <string>
#include <vector>

#include "introspect/env/pick_place.hpp"
#include "introspect/nn/dense.hpp"

namespace introspect::bbrl {

using env::BehaviourId;
using env::LowLevelAction;
using env::Observation;
using nn::Index;
using nn::Matrix;
using nn::Param;
using nn::Rng;
using nn::Tape;
using nn::Var;
using nn::Vector;

struct NetworkSizes {
  Index obs_dim = env::kObsDim;
  Index fe_hidden1 = 128;
  Index fe_hidden2 = 128;
  Index reactive_hidden = 64;
  Index ac_hidden = 64;

  Index activation_dim() const { return fe_hidden1 + fe_hidden2; }
};

struct FeOutput {
  Vector features;     // layer-2 output after ELU
  Vector activations;  // layer-1 ++ layer-2 outputs after ELU
};

/// Two ELU layers shared by the reactive heads and the actor-critic. Their
/// concatenated outputs are the activations the VAE introspects.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  FeatureExtractor(const NetworkSizes& sizes, Rng& rng);

  FeOutput forward(const Observation& obs) const;
  FeOutput forward(const Vector& obs) const;
  /// Batched forward; returns features with samples in columns.
  Matrix features(const Matrix& obs_batch) const;
  /// Recorded forward producing the layer-2 features.
  Var forward(Tape& tape, Var obs_batch);

  Index obs_dim() const { return layer1_.in_features(); }
  Index feature_dim() const { return layer2_.out_features(); }
  Index activation_dim() const { return layer1_.out_features() + layer2_.out_features(); }

  std::vector<Param*> params();
  std::vector<const Param*> params() const;

 private:
  nn::DenseLayer layer1_;
  nn::DenseLayer layer2_;
};

/// Width of each reactive head's raw output.
Index head_outputs(BehaviourId b);

/// One head per behaviour, each feature -> hidden (ELU) -> outputs. Outputs
/// are tanh-squashed; translation is then scaled by max_step and the grasp
/// gripper command mapped to [0, 1].
class ReactiveNetwork {
 public:
  ReactiveNetwork() = default;
  ReactiveNetwork(const NetworkSizes& sizes, double max_step, Rng& rng);

  LowLevelAction forward(const Vector& features, BehaviourId behaviour) const;
  /// Squashed outputs in normalized units (translation / max_step).
  Vector normalized_output(const Vector& features, BehaviourId behaviour) const;
  Var normalized_output(Tape& tape, Var features, BehaviourId behaviour);

  double max_step() const { return max_step_; }
  std::vector<Param*> params(BehaviourId behaviour);
  std::vector<Param*> params();
  std::vector<const Param*> params() const;

 private:
  struct Head {
    nn::DenseLayer hidden;
    nn::DenseLayer out;
  };
  Head& head(BehaviourId b) { return heads_[static_cast<std::size_t>(env::index_of(b))]; }
  const Head& head(BehaviourId b) const { return heads_[static_cast<std::size_t>(env::index_of(b))]; }

  std::array<Head, env::kNumBehaviours> heads_;
  double max_step_ = 0.05;
};

/// Expert action in the reactive head's normalized output units.
Vector normalized_expert(const LowLevelAction& expert, BehaviourId behaviour, double max_step);

struct AcOutput {
  Vector logits;
  double value = 0.0;
};

/// Shared ELU trunk with an actor head (behaviour logits) and a critic head
/// (state value).
class ActorCritic {
 public:
  ActorCritic() = default;
  ActorCritic(Index input_dim, Index hidden, Rng& rng);

  Index input_dim() const { return trunk_.in_features(); }
  /// Throws DimensionError mentioning `context` (the wiring variant) on a
  /// length mismatch.
  AcOutput forward(const Vector& input, std::string_view context = "") const;

  struct Recorded {
    Var logits;
    Var values;
  };
  Recorded forward(Tape& tape, Var inputs);

  std::vector<Param*> params();
  std::vector<const Param*> params() const;

 private:
  nn::DenseLayer trunk_;
  nn::DenseLayer actor_;
  nn::DenseLayer critic_;
};

enum class SelectMode { Sample, Greedy };

/// Sample draws from softmax(logits); Greedy is argmax with lowest-index ties.
BehaviourId select_behaviour(const Vector& logits, SelectMode mode, Rng& rng);

}  // namespace introspect::bbrl
