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

#include "introspect/introspection/vae_training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace introspect::introspection {

namespace {

nn::Matrix gather(const ActivationDataset& ds, std::span<const std::size_t> idx, const InputNormalizer& norm) {
  nn::Matrix m(ds.dim(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) m.col(static_cast<Index>(j)) = ds.records[idx[j]].activations;
  return norm.apply(m);
}

}  // namespace

double evaluate_vae(VaeModel& vae, const ActivationDataset& ds, int batch_size, Rng& rng) {
  if (ds.empty()) throw std::invalid_argument("evaluate_vae: empty dataset");
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  double total = 0.0;
  for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t n = std::min(idx.size() - start, static_cast<std::size_t>(batch_size));
    const std::span<const std::size_t> batch(idx.data() + start, n);
    Tape tape;
    const Matrix eps = nn::standard_normal(vae.latent_dim(), static_cast<Index>(n), rng);
    auto rec = vae.record_loss(tape, tape.constant(gather(ds, batch, vae.normalizer())), eps);
    total += tape.scalar(rec.loss) * static_cast<double>(n);
  }
  return total / static_cast<double>(ds.size());
}

TrainedVae train_vae(const ActivationDataset& ds, const VaeDims& dims, const VaeTrainConfig& config,
                     std::uint64_t seed) {
  if (config.epochs <= 0 || config.batch_size <= 0) {
    throw std::invalid_argument("train_vae: epochs and batch_size must be positive");
  }
  ds.validate();
  nn::require_dim(ds.dim(), dims.input, "train_vae dataset dimension");

  Rng init_rng = nn::make_rng(seed, 31);
  Rng split_rng = nn::make_rng(seed, 32);
  Rng shuffle_rng = nn::make_rng(seed, 33);
  Rng eps_rng = nn::make_rng(seed, 34);

  TrainedVae out;
  out.model = VaeModel(dims, init_rng);
  std::tie(out.train, out.validation) = split_dataset(ds, config.train_fraction, split_rng);
  if (out.train.empty() || out.validation.empty()) {
    throw std::invalid_argument("train_vae: split left an empty training or validation set");
  }

  if (config.standardize_inputs) out.model.set_normalizer(InputNormalizer::standardizing(out.train.matrix()));

  auto params = out.model.params();
  nn::AdamState adam(config.adam, params);
  std::vector<std::size_t> order(out.train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    int b = 0;
    for (std::size_t start = 0; start < order.size(); start += batch, ++b) {
      const std::size_t n = std::min(order.size() - start, batch);
      const std::span<const std::size_t> idx(order.data() + start, n);
      nn::zero_grad(params);
      Tape tape;
      const Matrix eps = nn::standard_normal(dims.latent, static_cast<Index>(n), eps_rng);
      auto rec = out.model.record_loss(tape, tape.constant(gather(out.train, idx, out.model.normalizer())), eps);
      const double loss = tape.scalar(rec.loss);
      if (!std::isfinite(loss)) {
        throw nn::NumericError(fmt::format("train_vae: non-finite loss at epoch {} batch {}", epoch + 1, b));
      }
      tape.backward(rec.loss);
      nn::adam_step(params, adam);
      total += loss * static_cast<double>(n);
    }
    out.train_loss.push_back(total / static_cast<double>(order.size()));
    // The same validation noise every epoch keeps the curve comparable.
    Rng val_rng = nn::make_rng(seed, 35);
    out.validation_loss.push_back(evaluate_vae(out.model, out.validation, config.batch_size, val_rng));
  }
  return out;
}

}  // namespace introspect::introspection
