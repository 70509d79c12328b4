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
#include <string_view>

#include "introspect/nn/types.hpp"

namespace introspect::env {

using nn::Index;
using nn::Rng;
using nn::Vector;
using Vec3 = Eigen::Vector3d;

enum class BehaviourId : int { Approach = 0, Grasp = 1, Retract = 2 };

inline constexpr int kNumBehaviours = 3;
inline constexpr std::array<BehaviourId, kNumBehaviours> kAllBehaviours = {
    BehaviourId::Approach, BehaviourId::Grasp, BehaviourId::Retract};

std::string_view to_string(BehaviourId b);
/// Accepts the lowercase names produced by to_string.
BehaviourId behaviour_from_string(std::string_view name);
inline int index_of(BehaviourId b) { return static_cast<int>(b); }
BehaviourId behaviour_at(int index);

/// Observation layout: gripper(3) object(3) object-gripper(3) aperture(1) target(3).
inline constexpr Index kObsDim = 13;

struct EnvConfig {
  int horizon = 50;
  double max_step = 0.05;
  double contact_eps = 0.05;
  double grasp_threshold = 0.3;
  double align_rate = 0.2;
  double align_threshold = 0.9;
  double success_eps = 0.05;
  /// Largest change in aperture per step when following gripper_cmd.
  double gripper_rate = 0.2;
  /// Object and target spawn in [-spawn_extent, spawn_extent]^3.
  double spawn_extent = 0.5;
  double min_separation = 0.3;
  double step_reward = -0.01;
  double success_reward = 1.0;
  /// Standard deviation of the observation noise sample.
  double noise_std = 0.1;
  Vec3 home{0.0, 0.0, 0.5};

  /// Throws std::invalid_argument on inconsistent constants.
  void validate() const;
};

struct WorldState {
  Vec3 gripper_pos = Vec3::Zero();
  Vec3 object_pos = Vec3::Zero();
  Vec3 target_pos = Vec3::Zero();
  double aperture = 1.0;
  double grasp_alignment = 0.0;
  bool object_held = false;
  int step_index = 0;
  bool done = false;
};

class Observation {
 public:
  Observation() : values_(Vector::Zero(kObsDim)) {}
  explicit Observation(Vector values);

  const Vector& values() const { return values_; }
  double operator[](Index i) const { return values_[i]; }
  Vec3 gripper_pos() const { return values_.segment<3>(0); }
  Vec3 object_pos() const { return values_.segment<3>(3); }
  Vec3 relative_pos() const { return values_.segment<3>(6); }
  double aperture() const { return values_[9]; }
  Vec3 target_pos() const { return values_.segment<3>(10); }

 private:
  Vector values_;
};

struct LowLevelAction {
  Vec3 delta_pos = Vec3::Zero();
  double rotation = 0.0;
  double gripper_cmd = 0.0;

  /// Components clipped to their legal ranges.
  LowLevelAction clamped(double max_step) const;
};

struct StepResult {
  WorldState state;
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

/// Deterministic kinematic pick-and-place world. All state lives in the
/// WorldState values passed in and out, so one PickPlaceEnv can serve any
/// number of independent episodes.
class PickPlaceEnv {
 public:
  explicit PickPlaceEnv(EnvConfig config = {});

  const EnvConfig& config() const { return config_; }

  std::pair<WorldState, Observation> reset(Rng& rng) const;
  StepResult step(const WorldState& state, BehaviourId behaviour, const LowLevelAction& action) const;
  Observation observe(const WorldState& state) const;

  LowLevelAction expert_action(const WorldState& state, BehaviourId behaviour) const;
  BehaviourId scripted_behaviour_schedule(const WorldState& state) const;
  bool success(const WorldState& state) const;
  bool in_contact(const WorldState& state) const;
  /// Termination condition of a behaviour: Approach ends on contact, Grasp
  /// once the object is held, Retract on success.
  bool behaviour_complete(const WorldState& state, BehaviourId behaviour) const;

 private:
  EnvConfig config_;
};

/// obs + level * eps with eps_i ~ N(0, noise_std). Level 0 returns `obs`
/// untouched and draws nothing from `rng`.
Observation inject_noise(const Observation& obs, double level, double noise_std, Rng& rng);

}  // namespace introspect::env
