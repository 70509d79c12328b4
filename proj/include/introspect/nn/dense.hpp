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
#include <string>

#include "introspect/nn/tape.hpp"
#include "introspect/nn/types.hpp"

namespace introspect::nn {

/// Fully connected layer: y = W x + b with W of shape (out, in).
class DenseLayer {
 public:
  DenseLayer() = default;
  /// Zero-initialized layer.
  DenseLayer(const std::string& name, Index in_features, Index out_features);

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
  static DenseLayer glorot(const std::string& name, Index in_features, Index out_features, Rng& rng);

  Index in_features() const { return weights_.value.cols(); }
  Index out_features() const { return weights_.value.rows(); }
  const std::string& name() const { return name_; }

  Vector forward(const Vector& input) const;
  Matrix forward(const Matrix& batch) const;
  Var forward(Tape& tape, Var input);

  const Param& weights() const { return weights_; }
  const Param& biases() const { return biases_; }
  Param& weights() { return weights_; }
  Param& biases() { return biases_; }
  std::array<Param*, 2> params() { return {&weights_, &biases_}; }

 private:
  std::string name_;
  Param weights_;
  Param biases_;
};

}  // namespace introspect::nn
