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

#include <vector>

#include "introspect/nn/adam.hpp"
#include "introspect/nn/dense.hpp"
#include "introspect/nn/functional.hpp"

namespace introspect::introspection {

using nn::GaussianLatent;
using nn::Index;
using nn::Matrix;
using nn::Param;
using nn::Rng;
using nn::Tape;
using nn::Var;
using nn::Vector;

struct VaeDims {
  Index input = 256;
  std::vector<Index> encoder_hidden{400, 128};
  Index latent = 50;
  std::vector<Index> decoder_hidden{128, 400};

  void validate() const;
};

/// Affine map applied to raw activations before they enter the VAE:
/// x_real = (activations - offset) * scale, elementwise. Identity by default.
struct InputNormalizer {
  Vector offset;
  Vector scale;

  static InputNormalizer identity(Index dim);
  /// Per-unit standardization scaled by sqrt(dim), so the mean-reduced MSE
  /// equals the per-sample squared error of standardized activations.
  /// Constant units get scale 0.
  static InputNormalizer standardizing(const Matrix& samples);

  Vector apply(const Vector& activations) const;
  Matrix apply(const Matrix& activations) const;
};

/// Encoder: ELU hidden stack, then parallel mean and log-variance heads.
/// Decoder: ELU hidden stack, then a linear layer back to the input width.
class VaeModel {
 public:
  VaeModel() = default;
  VaeModel(VaeDims dims, Rng& rng);

  const VaeDims& dims() const { return dims_; }
  Index input_dim() const { return dims_.input; }
  Index latent_dim() const { return dims_.latent; }

  const InputNormalizer& normalizer() const { return normalizer_; }
  void set_normalizer(InputNormalizer n);

  /// Normalizes raw activations, then encodes deterministically; the
  /// log-variance is clamped to the nn range.
  GaussianLatent encode(const Vector& activations) const;
  /// Reconstruction in the normalized input space.
  Vector decode(const Vector& z) const;

  struct LatentBatch {
    Matrix mu;
    Matrix logvar;
  };
  LatentBatch encode(const Matrix& x_batch) const;

  struct Recorded {
    Var mu;
    Var logvar;
    Var z;
    Var recons;
    Var loss;
  };
  /// Full training objective on a column batch of normalized inputs with
  /// reparameterization noise `eps` (latent x batch).
  Recorded record_loss(Tape& tape, Var x_batch, const Matrix& eps);
  /// Encoder applied to already-normalized inputs.
  GaussianLatent encode_normalized(const Vector& x_real) const;

  const std::vector<nn::DenseLayer>& encoder_layers() const { return encoder_; }
  const nn::DenseLayer& mean_head() const { return mean_head_; }
  const nn::DenseLayer& logvar_head() const { return logvar_head_; }
  const std::vector<nn::DenseLayer>& decoder_layers() const { return decoder_; }
  nn::DenseLayer& mean_head() { return mean_head_; }

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  std::vector<Param*> decoder_params();

 private:
  VaeDims dims_;
  InputNormalizer normalizer_;
  std::vector<nn::DenseLayer> encoder_;
  nn::DenseLayer mean_head_;
  nn::DenseLayer logvar_head_;
  std::vector<nn::DenseLayer> decoder_;
};

/// Reconstruction MSE plus KL to the standard normal prior, unweighted.
double vae_loss(const Vector& x_real, const Vector& x_recons, const GaussianLatent& latent);

}  // namespace introspect::introspection
