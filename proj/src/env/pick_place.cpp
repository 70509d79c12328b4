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

#include "introspect/env/pick_place.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace introspect::env {

std::string_view to_string(BehaviourId b) {
  switch (b) {
    case BehaviourId::Approach: return "approach";
    case BehaviourId::Grasp: return "grasp";
    case BehaviourId::Retract: return "retract";
  }
  throw std::invalid_argument("unknown behaviour id");
}

BehaviourId behaviour_from_string(std::string_view name) {
  for (BehaviourId b : kAllBehaviours)
    if (to_string(b) == name) return b;
  throw std::invalid_argument(fmt::format("unknown behaviour '{}'", name));
}

BehaviourId behaviour_at(int index) {
  if (index < 0 || index >= kNumBehaviours) throw std::out_of_range(fmt::format("behaviour index {}", index));
  return static_cast<BehaviourId>(index);
}

void EnvConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("env config: " + msg); };
  if (horizon <= 0) fail("horizon must be positive");
  if (!(max_step > 0.0)) fail("max_step must be positive");
  if (!(contact_eps > 0.0) || !(success_eps > 0.0)) fail("eps values must be positive");
  if (!(grasp_threshold > 0.0 && grasp_threshold <= 1.0)) fail("grasp_threshold must lie in (0, 1]");
  if (!(align_rate > 0.0)) fail("align_rate must be positive");
  if (!(align_threshold > 0.0 && align_threshold < 1.0)) fail("align_threshold must lie in (0, 1)");
  if (!(gripper_rate > 0.0)) fail("gripper_rate must be positive");
  if (!(spawn_extent > 0.0 && spawn_extent <= 1.0)) fail("spawn_extent must lie in (0, 1]");
  if (!(min_separation >= 0.0) || min_separation >= 2.0 * std::sqrt(3.0) * spawn_extent) {
    fail("min_separation is unreachable inside the spawn region");
  }
  if (!(noise_std >= 0.0)) fail("noise_std must be non-negative");
  if ((home.array().abs() > 1.0).any()) fail("home position outside the workspace");
}

Observation::Observation(Vector values) : values_(std::move(values)) {
  nn::require_dim(values_.size(), kObsDim, "Observation");
}

LowLevelAction LowLevelAction::clamped(double max_step) const {
  LowLevelAction out;
  out.delta_pos = delta_pos.cwiseMax(-max_step).cwiseMin(max_step);
  out.rotation = std::clamp(rotation, -1.0, 1.0);
  out.gripper_cmd = std::clamp(gripper_cmd, 0.0, 1.0);
  return out;
}

PickPlaceEnv::PickPlaceEnv(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

std::pair<WorldState, Observation> PickPlaceEnv::reset(Rng& rng) const {
  std::uniform_real_distribution<double> uniform(-config_.spawn_extent, config_.spawn_extent);
  auto sample = [&] { return Vec3(uniform(rng), uniform(rng), uniform(rng)); };
  WorldState s;
  s.gripper_pos = config_.home;
  s.object_pos = sample();
  do {
    s.target_pos = sample();
  } while ((s.target_pos - s.object_pos).norm() < config_.min_separation);
  s.aperture = 1.0;
  return {s, observe(s)};
}

Observation PickPlaceEnv::observe(const WorldState& s) const {
  Vector v(kObsDim);
  v << s.gripper_pos, s.object_pos, s.object_pos - s.gripper_pos, s.aperture, s.target_pos;
  return Observation(std::move(v));
}

bool PickPlaceEnv::in_contact(const WorldState& s) const {
  return (s.gripper_pos - s.object_pos).norm() < config_.contact_eps;
}

bool PickPlaceEnv::success(const WorldState& s) const {
  return (s.object_pos - s.target_pos).norm() <= config_.success_eps;
}

bool PickPlaceEnv::behaviour_complete(const WorldState& s, BehaviourId behaviour) const {
  switch (behaviour) {
    case BehaviourId::Approach: return in_contact(s);
    case BehaviourId::Grasp: return s.object_held;
    case BehaviourId::Retract: return success(s);
  }
  return false;
}

StepResult PickPlaceEnv::step(const WorldState& state, BehaviourId behaviour, const LowLevelAction& action) const {
  if (state.done) throw std::logic_error("PickPlaceEnv::step: episode already finished");
  if (state.step_index >= config_.horizon) throw std::logic_error("PickPlaceEnv::step: horizon exceeded");

  const LowLevelAction a = action.clamped(config_.max_step);
  WorldState s = state;

  s.gripper_pos = (s.gripper_pos + a.delta_pos).cwiseMax(-1.0).cwiseMin(1.0);

  const double gap = a.gripper_cmd - s.aperture;
  s.aperture = std::abs(gap) <= config_.gripper_rate ? a.gripper_cmd
                                                      : s.aperture + std::copysign(config_.gripper_rate, gap);

  if (behaviour == BehaviourId::Grasp) {
    s.grasp_alignment = std::min(1.0, s.grasp_alignment + std::abs(a.rotation) * config_.align_rate);
  }

  if (s.object_held) {
    if (s.aperture >= config_.grasp_threshold) {
      s.object_held = false;
      s.grasp_alignment = 0.0;
    } else {
      s.object_pos = s.gripper_pos;
    }
  } else if (in_contact(s) && s.aperture < config_.grasp_threshold && s.grasp_alignment > config_.align_threshold) {
    s.object_held = true;
    s.object_pos = s.gripper_pos;
  }

  s.step_index += 1;
  double reward = config_.step_reward;
  const bool succeeded = success(s);
  if (succeeded) reward += config_.success_reward;
  s.done = succeeded || s.step_index >= config_.horizon;
  return StepResult{s, observe(s), reward, s.done};
}

LowLevelAction PickPlaceEnv::expert_action(const WorldState& s, BehaviourId behaviour) const {
  LowLevelAction a;
  switch (behaviour) {
    case BehaviourId::Approach:
      a.delta_pos = s.object_pos - s.gripper_pos;
      a.gripper_cmd = 1.0;
      break;
    case BehaviourId::Grasp:
      a.rotation = s.grasp_alignment > config_.align_threshold ? 0.0 : 1.0;
      a.gripper_cmd = 0.0;
      break;
    case BehaviourId::Retract:
      a.delta_pos = s.target_pos - s.gripper_pos;
      a.gripper_cmd = 0.0;
      break;
  }
  return a.clamped(config_.max_step);
}

BehaviourId PickPlaceEnv::scripted_behaviour_schedule(const WorldState& s) const {
  if (s.object_held) return BehaviourId::Retract;
  if (in_contact(s)) return BehaviourId::Grasp;
  return BehaviourId::Approach;
}

Observation inject_noise(const Observation& obs, double level, double noise_std, Rng& rng) {
  if (level == 0.0) return obs;
  std::normal_distribution<double> normal(0.0, noise_std);
  Vector v = obs.values();
  for (Index i = 0; i < v.size(); ++i) v[i] += level * normal(rng);
  return Observation(std::move(v));
}

}  // namespace introspect::env
