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
#include <optional>
#include <string_view>

#include "introspect/nn/functional.hpp"

namespace introspect::introspection {

using nn::GaussianLatent;
using nn::Index;
using nn::Rng;
using nn::Vector;

/// How the actor-critic input is assembled from FE features and the internal state.
enum class WiringVariant { Baseline, ConcatFeaturesMeans, MeansOnly, MeansLogvar, SampledLatent };

inline constexpr std::array<WiringVariant, 5> kAllVariants = {
    WiringVariant::Baseline, WiringVariant::ConcatFeaturesMeans, WiringVariant::MeansOnly,
    WiringVariant::MeansLogvar, WiringVariant::SampledLatent};

std::string_view to_string(WiringVariant v);
WiringVariant variant_from_string(std::string_view name);
bool requires_vae(WiringVariant v);
Index input_dim(WiringVariant v, Index feature_dim = 128, Index latent_dim = 50);

struct AcInput {
  Vector values;
  WiringVariant variant = WiringVariant::Baseline;
};

/// Baseline: features. ConcatFeaturesMeans: features ++ mu. MeansOnly: mu.
/// MeansLogvar: mu ++ logvar. SampledLatent: a reparameterized draw, the
/// only variant that consumes `rng`.
AcInput build_ac_input(WiringVariant variant, const Vector& features, const std::optional<GaussianLatent>& latent,
                       Rng& rng);

}  // namespace introspect::introspection
