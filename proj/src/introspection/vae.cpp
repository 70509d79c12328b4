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

#include "introspect/introspection/vae.hpp"

#include <cmath>

#include <fmt/format.h>

namespace introspect::introspection {

void VaeDims::validate() const {
  if (input <= 0 || latent <= 0) throw std::invalid_argument("VaeDims: input and latent sizes must be positive");
  for (Index h : encoder_hidden)
    if (h <= 0) throw std::invalid_argument("VaeDims: encoder widths must be positive");
  for (Index h : decoder_hidden)
    if (h <= 0) throw std::invalid_argument("VaeDims: decoder widths must be positive");
}

InputNormalizer InputNormalizer::identity(Index dim) {
  return InputNormalizer{Vector::Zero(dim), Vector::Ones(dim)};
}

InputNormalizer InputNormalizer::standardizing(const Matrix& samples) {
  if (samples.cols() == 0) throw std::invalid_argument("InputNormalizer: no samples");
  const Index dim = samples.rows();
  InputNormalizer n;
  n.offset = samples.rowwise().mean();
  const Vector sd = (samples.colwise() - n.offset).array().square().rowwise().mean().sqrt();
  const double gain = std::sqrt(static_cast<double>(dim));
  n.scale = sd.unaryExpr([gain](double s) { return s > 1e-12 ? gain / s : 0.0; });
  return n;
}

Vector InputNormalizer::apply(const Vector& activations) const {
  nn::require_dim(activations.size(), offset.size(), "InputNormalizer input");
  return (activations - offset).cwiseProduct(scale);
}

Matrix InputNormalizer::apply(const Matrix& activations) const {
  nn::require_dim(activations.rows(), offset.size(), "InputNormalizer input");
  return (activations.colwise() - offset).array().colwise() * scale.array();
}

VaeModel::VaeModel(VaeDims dims, Rng& rng) : dims_(std::move(dims)) {
  dims_.validate();
  normalizer_ = InputNormalizer::identity(dims_.input);
  Index width = dims_.input;
  for (std::size_t i = 0; i < dims_.encoder_hidden.size(); ++i) {
    encoder_.push_back(nn::DenseLayer::glorot(fmt::format("vae.encoder{}", i), width, dims_.encoder_hidden[i], rng));
    width = dims_.encoder_hidden[i];
  }
  mean_head_ = nn::DenseLayer::glorot("vae.mu", width, dims_.latent, rng);
  logvar_head_ = nn::DenseLayer::glorot("vae.logvar", width, dims_.latent, rng);
  width = dims_.latent;
  for (std::size_t i = 0; i < dims_.decoder_hidden.size(); ++i) {
    decoder_.push_back(nn::DenseLayer::glorot(fmt::format("vae.decoder{}", i), width, dims_.decoder_hidden[i], rng));
    width = dims_.decoder_hidden[i];
  }
  decoder_.push_back(
      nn::DenseLayer::glorot(fmt::format("vae.decoder{}", dims_.decoder_hidden.size()), width, dims_.input, rng));
}

void VaeModel::set_normalizer(InputNormalizer n) {
  nn::require_dim(n.offset.size(), dims_.input, "normalizer offset");
  nn::require_dim(n.scale.size(), dims_.input, "normalizer scale");
  normalizer_ = std::move(n);
}

GaussianLatent VaeModel::encode(const Vector& activations) const {
  nn::require_dim(activations.size(), dims_.input, "vae_encode input");
  return encode_normalized(normalizer_.apply(activations));
}

GaussianLatent VaeModel::encode_normalized(const Vector& x_real) const {
  nn::require_dim(x_real.size(), dims_.input, "vae_encode input");
  Vector h = x_real;
  for (const auto& layer : encoder_) h = nn::elu(layer.forward(h));
  return GaussianLatent(mean_head_.forward(h), nn::clamp_logvar(logvar_head_.forward(h)));
}

VaeModel::LatentBatch VaeModel::encode(const Matrix& x_batch) const {
  nn::require_dim(x_batch.rows(), dims_.input, "vae_encode input");
  Matrix h = normalizer_.apply(x_batch);
  for (const auto& layer : encoder_) h = nn::elu(layer.forward(h));
  return LatentBatch{mean_head_.forward(h), nn::clamp_logvar(logvar_head_.forward(h))};
}

Vector VaeModel::decode(const Vector& z) const {
  nn::require_dim(z.size(), dims_.latent, "vae_decode input");
  Vector h = z;
  for (std::size_t i = 0; i + 1 < decoder_.size(); ++i) h = nn::elu(decoder_[i].forward(h));
  return decoder_.back().forward(h);
}

VaeModel::Recorded VaeModel::record_loss(Tape& tape, Var x_batch, const Matrix& eps) {
  nn::require_dim(tape.value(x_batch).rows(), dims_.input, "vae input");
  Var h = x_batch;
  for (auto& layer : encoder_) h = tape.elu(layer.forward(tape, h));
  Var mu = mean_head_.forward(tape, h);
  Var logvar = tape.clamp(logvar_head_.forward(tape, h), nn::kLogvarMin, nn::kLogvarMax);
  Var z = tape.reparameterize(mu, logvar, eps);
  Var d = z;
  for (std::size_t i = 0; i + 1 < decoder_.size(); ++i) d = tape.elu(decoder_[i].forward(tape, d));
  Var recons = decoder_.back().forward(tape, d);
  Var loss = tape.add(tape.mse(x_batch, recons), tape.kl_std_normal(mu, logvar));
  return Recorded{mu, logvar, z, recons, loss};
}

std::vector<Param*> VaeModel::params() {
  std::vector<Param*> all;
  auto add = [&all](nn::DenseLayer& l) {
    auto p = l.params();
    all.insert(all.end(), p.begin(), p.end());
  };
  for (auto& l : encoder_) add(l);
  add(mean_head_);
  add(logvar_head_);
  for (auto& l : decoder_) add(l);
  return all;
}

std::vector<const Param*> VaeModel::params() const {
  std::vector<const Param*> all;
  auto add = [&all](const nn::DenseLayer& l) { all.insert(all.end(), {&l.weights(), &l.biases()}); };
  for (const auto& l : encoder_) add(l);
  add(mean_head_);
  add(logvar_head_);
  for (const auto& l : decoder_) add(l);
  return all;
}

std::vector<Param*> VaeModel::decoder_params() {
  std::vector<Param*> all;
  for (auto& l : decoder_) {
    auto p = l.params();
    all.insert(all.end(), p.begin(), p.end());
  }
  return all;
}

double vae_loss(const Vector& x_real, const Vector& x_recons, const GaussianLatent& latent) {
  return nn::mse(x_real, x_recons) + nn::kl_std_normal(latent);
}

}  // namespace introspect::introspection
