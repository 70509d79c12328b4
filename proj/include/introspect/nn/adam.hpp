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
#include <span>
#include <vector>

#include "introspect/nn/tape.hpp"

namespace introspect::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-parameter-block moment estimates for bias-corrected Adam.
struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step_count = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::span<Param* const> params);
};

/// One Adam update of `params` from their accumulated gradients. Throws
/// NumericError naming the block if any gradient is non-finite; in that case
/// no parameter is modified.
void adam_step(std::span<Param* const> params, AdamState& state);

}  // namespace introspect::nn
