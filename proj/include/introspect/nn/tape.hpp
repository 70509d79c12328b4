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

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "introspect/nn/types.hpp"

namespace introspect::nn {

/// A trainable parameter block. Gradients accumulate into `grad` during
/// Tape::backward; callers reset them with zero_grad between updates.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
};

void zero_grad(std::span<Param* const> params);

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  explicit Var(std::size_t id) : id_(id) {}
  std::size_t id_ = static_cast<std::size_t>(-1);
};

/// Records primitive operations as they are evaluated and replays them in
/// reverse to produce exact gradients of a scalar loss.
///
/// Matrices are batched column-wise: column j is sample j. Reductions that
/// produce a loss (mse, kl_std_normal, mean) return 1x1 values.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// A constant leaf; no gradient flows out of it.
  Var constant(Matrix value);
  /// A differentiable leaf whose gradient is readable with grad() after backward.
  Var leaf(Matrix value);
  /// A parameter leaf; its gradient is added into `p.grad` on backward.
  Var param(Param& p);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;
  double scalar(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// w * x + b, with b broadcast over the columns of x.
  Var affine(Var w, Var x, Var b);
  Var elu(Var x);
  Var tanh(Var x);
  Var exp(Var x);
  Var square(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  /// Elementwise product with a constant matrix of the same shape.
  Var mul_const(Var a, const Matrix& c);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  /// Clips to [lo, hi]; gradient is zero where the clip is active.
  Var clamp(Var x, double lo, double hi);
  Var concat_rows(std::span<const Var> parts);
  Var rows(Var x, Index start, Index count);
  Var sum(Var x);
  Var mean(Var x);

  /// Mean over all entries of (a - b)^2.
  Var mse(Var a, Var b);
  /// Sum over latent rows of the Gaussian-to-standard-normal KL, averaged
  /// over columns.
  Var kl_std_normal(Var mu, Var logvar);
  /// mu + exp(logvar / 2) * eps with eps a constant noise matrix.
  Var reparameterize(Var mu, Var logvar, const Matrix& eps);
  /// Column-wise log-softmax.
  Var log_softmax(Var logits);
  /// Row `index[j]` of column j, as a 1 x cols row.
  Var pick(Var x, std::span<const int> index);

  /// Reverse pass from a 1x1 loss. A tape can be consumed once.
  void backward(Var loss);
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Param* param = nullptr;
    bool needs_grad = false;
    std::function<void(Tape&, std::size_t)> backprop;
  };

  Var push(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> backprop);
  Node& node(Var v);
  const Node& node(Var v) const;
  bool needs(Var v) const { return node(v).needs_grad; }
  void accumulate(Var v, const Matrix& g);

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace introspect::nn
