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

#include <cstdint>
#include <vector>

#include "introspect/introspection/dataset.hpp"
#include "introspect/introspection/vae.hpp"

namespace introspect::introspection {

struct VaeTrainConfig {
  int epochs = 100;
  int batch_size = 128;
  double train_fraction = 0.8;
  /// Fit an InputNormalizer::standardizing on the training split.
  bool standardize_inputs = true;
  nn::AdamConfig adam;
};

struct TrainedVae {
  VaeModel model;
  /// Per-epoch mean loss over training batches / over the validation split.
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  ActivationDataset train;
  ActivationDataset validation;
};

/// Mean loss over `ds` (raw activations, normalized by the model) with reparameterization noise drawn from `rng`.
double evaluate_vae(VaeModel& vae, const ActivationDataset& ds, int batch_size, Rng& rng);

/// Splits `ds`, then trains a VAE with Adam on shuffled minibatches. Throws
/// nn::NumericError naming the epoch and batch if the loss turns non-finite.
TrainedVae train_vae(const ActivationDataset& ds, const VaeDims& dims, const VaeTrainConfig& config,
                     std::uint64_t seed);

}  // namespace introspect::introspection
