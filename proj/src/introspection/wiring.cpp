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

#include "introspect/introspection/wiring.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace introspect::introspection {

std::string_view to_string(WiringVariant v) {
  switch (v) {
    case WiringVariant::Baseline: return "baseline";
    case WiringVariant::ConcatFeaturesMeans: return "concat-features-means";
    case WiringVariant::MeansOnly: return "means-only";
    case WiringVariant::MeansLogvar: return "means-logvar";
    case WiringVariant::SampledLatent: return "sampled-latent";
  }
  throw std::invalid_argument("unknown wiring variant");
}

WiringVariant variant_from_string(std::string_view name) {
  for (WiringVariant v : kAllVariants)
    if (to_string(v) == name) return v;
  throw std::invalid_argument(fmt::format("unknown wiring variant '{}'", name));
}

bool requires_vae(WiringVariant v) { return v != WiringVariant::Baseline; }

Index input_dim(WiringVariant v, Index feature_dim, Index latent_dim) {
  switch (v) {
    case WiringVariant::Baseline: return feature_dim;
    case WiringVariant::ConcatFeaturesMeans: return feature_dim + latent_dim;
    case WiringVariant::MeansOnly: return latent_dim;
    case WiringVariant::MeansLogvar: return 2 * latent_dim;
    case WiringVariant::SampledLatent: return latent_dim;
  }
  throw std::invalid_argument("unknown wiring variant");
}

AcInput build_ac_input(WiringVariant variant, const Vector& features, const std::optional<GaussianLatent>& latent,
                       Rng& rng) {
  if (requires_vae(variant) && !latent) {
    throw std::invalid_argument(fmt::format("wiring variant '{}' needs an internal state", to_string(variant)));
  }
  AcInput in;
  in.variant = variant;
  switch (variant) {
    case WiringVariant::Baseline:
      in.values = features;
      break;
    case WiringVariant::ConcatFeaturesMeans:
      in.values.resize(features.size() + latent->dim());
      in.values << features, latent->mu();
      break;
    case WiringVariant::MeansOnly:
      in.values = latent->mu();
      break;
    case WiringVariant::MeansLogvar:
      in.values.resize(2 * latent->dim());
      in.values << latent->mu(), latent->logvar();
      break;
    case WiringVariant::SampledLatent:
      in.values = nn::reparameterized_sample(*latent, rng);
      break;
  }
  return in;
}

}  // namespace introspect::introspection
