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

#include "introspect/nn/functional.hpp"

#include <fmt/format.h>

namespace introspect::nn {

double mse(const Vector& x_real, const Vector& x_recons) {
  require_dim(x_recons.size(), x_real.size(), "mse");
  if (x_real.size() == 0) return 0.0;
  return (x_real - x_recons).squaredNorm() / static_cast<double>(x_real.size());
}

GaussianLatent::GaussianLatent(Vector mu, Vector logvar) : mu_(std::move(mu)), logvar_(std::move(logvar)) {
  require_dim(logvar_.size(), mu_.size(), "GaussianLatent logvar");
  if (!mu_.allFinite() || !logvar_.allFinite()) {
    throw NumericError("GaussianLatent: non-finite mean or log-variance");
  }
}

double kl_std_normal(const GaussianLatent& latent) {
  const auto& lv = latent.logvar().array();
  return 0.5 * (lv.exp() + latent.mu().array().square() - 1.0 - lv).sum();
}

Vector reparameterize(const GaussianLatent& latent, const Vector& eps) {
  require_dim(eps.size(), latent.dim(), "reparameterize eps");
  const Vector lv = clamp_logvar(latent.logvar());
  return latent.mu().array() + (0.5 * lv.array()).exp() * eps.array();
}

Vector reparameterized_sample(const GaussianLatent& latent, Rng& rng) {
  return reparameterize(latent, standard_normal(latent.dim(), rng));
}

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

}  // namespace introspect::nn
