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

#include "introspect/nn/dense.hpp"

#include <cmath>

namespace introspect::nn {

DenseLayer::DenseLayer(const std::string& name, Index in_features, Index out_features)
    : name_(name),
      weights_(name + ".weight", Matrix::Zero(out_features, in_features)),
      biases_(name + ".bias", Matrix::Zero(out_features, 1)) {}

DenseLayer DenseLayer::glorot(const std::string& name, Index in_features, Index out_features, Rng& rng) {
  DenseLayer layer(name, in_features, out_features);
  const double limit = std::sqrt(6.0 / static_cast<double>(in_features + out_features));
  std::uniform_real_distribution<double> uniform(-limit, limit);
  Matrix& w = layer.weights_.value;
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) w(i, j) = uniform(rng);
  return layer;
}

Vector DenseLayer::forward(const Vector& input) const {
  require_dim(input.size(), in_features(), name_ + " input");
  return weights_.value * input + biases_.value.col(0);
}

Matrix DenseLayer::forward(const Matrix& batch) const {
  require_dim(batch.rows(), in_features(), name_ + " input");
  Matrix out = weights_.value * batch;
  out.colwise() += biases_.value.col(0);
  return out;
}

Var DenseLayer::forward(Tape& tape, Var input) {
  require_dim(tape.value(input).rows(), in_features(), name_ + " input");
  return tape.affine(tape.param(weights_), input, tape.param(biases_));
}

}  // namespace introspect::nn
