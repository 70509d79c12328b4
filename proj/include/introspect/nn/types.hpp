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
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace introspect::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Every stochastic component draws from its own mt19937_64 stream.
using Rng = std::mt19937_64;

/// Derives an independent stream from a run seed. Distinct `stream` ids give
/// decorrelated generators for the same seed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Raised on shape disagreements between tensors, layers and inputs.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a value that must stay finite is NaN or infinite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_dim(Index actual, Index expected, const std::string& what);

bool all_finite(const Matrix& m);

/// A vector of i.i.d. standard normal draws.
Vector standard_normal(Index n, Rng& rng);
Matrix standard_normal(Index rows, Index cols, Rng& rng);

}  // namespace introspect::nn
