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

#include <cmath>

#include "introspect/nn/types.hpp"

namespace introspect::nn {

/// Bounds applied to log-variances before they are exponentiated.
inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_derivative(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

template <class Derived>
typename Derived::PlainObject elu(const Eigen::MatrixBase<Derived>& x) {
  return x.unaryExpr([](double v) { return elu(v); });
}

template <class Derived>
typename Derived::PlainObject clamp_logvar(const Eigen::MatrixBase<Derived>& logvar) {
  return logvar.cwiseMax(kLogvarMin).cwiseMin(kLogvarMax);
}

/// Mean over elements of squared differences.
double mse(const Vector& x_real, const Vector& x_recons);

/// Diagonal Gaussian over the latent code, the encoder's q(z|x).
class GaussianLatent {
 public:
  GaussianLatent() = default;
  GaussianLatent(Vector mu, Vector logvar);

  const Vector& mu() const { return mu_; }
  const Vector& logvar() const { return logvar_; }
  Index dim() const { return mu_.size(); }

 private:
  Vector mu_;
  Vector logvar_;
};

/// KL(q || N(0, I)), summed over latent dimensions.
double kl_std_normal(const GaussianLatent& latent);

/// z = mu + exp(logvar / 2) * eps with a caller-supplied eps.
Vector reparameterize(const GaussianLatent& latent, const Vector& eps);

/// z = mu + exp(logvar / 2) * eps with eps ~ N(0, I) drawn from `rng`.
Vector reparameterized_sample(const GaussianLatent& latent, Rng& rng);

/// Numerically stable softmax.
Vector softmax(const Vector& logits);

}  // namespace introspect::nn
